"""Approximate functional equation weights, the Bessel kernel, and the cubic moment after Petersson."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaincc

from .classical import EPS, kloosterman_table
from .config import SizeLimitError, all_budgets, budget
from .ffarith import euler_phi, is_squarefree, jacobi_table

V_CUTOFF = 1e-12


class ParityError(ValueError):
    """chi(-1) != i^k: every central value in the family vanishes."""


# ---------------------------------------------------------------------------
# V and V3


def V(y, k: int):
    """Gamma(k/2)^{-1} int_{2 pi y}^inf e^{-x} x^{k/2-1} dx, via the finite sum
    e^{-2 pi y} sum_{j < k/2} (2 pi y)^j / j!.  Accepts scalars or arrays."""
    if k % 2:
        raise ValueError(f"k must be even, got {k}")
    arr = np.asarray(y, dtype=float)
    if np.any(arr < 0):
        raise ValueError("V(y) needs y >= 0")
    t = 2 * np.pi * arr
    term = np.ones_like(t)
    s = np.ones_like(t)
    for j in range(1, k // 2):
        term = term * t / j
        s = s + term
    out = np.minimum(np.exp(-t) * s, 1.0)
    return float(out) if np.ndim(y) == 0 else out


def V_tail_integral(Y: float, k: int) -> float:
    """int_Y^inf V(y) dy, from int_z^inf Q(a, t) dt = a Q(a+1, z) - z Q(a, z)."""
    a = k / 2
    z = 2 * np.pi * Y
    return float(max(0.0, a * gammaincc(a + 1, z) - z * gammaincc(a, z)) / (2 * np.pi))


def V_cutoff(k: int, eps: float = V_CUTOFF) -> float:
    """Smallest Y (to 1e-9) with V(Y) <= eps."""
    lo, hi = 0.0, 1.0
    while V(hi, k) > eps:
        hi *= 2
    for _ in range(60):
        mid = (lo + hi) / 2
        if V(mid, k) > eps:
            lo = mid
        else:
            hi = mid
    return hi


@dataclass(frozen=True)
class V3Value:
    value: float
    tail_bound: float | None  # None when the d-sum diverges
    diverges: bool
    d_max: int


def V3(x: float, x1: float, x2: float, q: int, k: int, d_max: int) -> V3Value:
    """V(x) sum_{d <= d_max, (d,q)=1} d^{-1} V(d x1) V(d x2), with a bound for d > d_max."""
    if min(x, x1, x2) < 0:
        raise ValueError("arguments must be nonnegative")
    if d_max < 1:
        raise ValueError("d_max must be >= 1")
    d = np.arange(1, d_max + 1)
    d = d[np.gcd(d, q) == 1]
    vx = V(x, k)
    s = float(np.sum(V(d * x1, k) * V(d * x2, k) / d))
    X = max(x1, x2)
    if X == 0:
        return V3Value(vx * s, None, True, d_max)
    tail = vx * V_tail_integral(d_max * X, k) / (d_max * X)
    return V3Value(vx * s, tail, False, d_max)


# ---------------------------------------------------------------------------
# Bessel


def _bessel_miller(n: int, z: np.ndarray) -> np.ndarray:
    zmax = float(z.max())
    top = int(max(n, zmax) + 20 + 3 * math.sqrt(10 * max(n, zmax)))
    top += top % 2
    jp1 = np.zeros_like(z)
    j = np.full_like(z, 1e-300)
    out = np.zeros_like(z)
    norm = np.zeros_like(z)
    for m in range(top, 0, -1):
        jp1, j = j, (2 * m / z) * j - jp1  # j is now J_{m-1} up to scale
        if m - 1 == n:
            out = j.copy()
        if (m - 1) % 2 == 0:
            norm += j if m == 1 else 2 * j
        big = np.abs(j) > 1e250
        if big.any():
            s = np.where(big, 1e-250, 1.0)
            j *= s
            jp1 *= s
            out *= s
            norm *= s
    return out / norm


def _bessel_hankel(n: int, z: np.ndarray, max_terms: int = 120) -> np.ndarray:
    mu = 4.0 * n * n
    P = np.ones_like(z)
    Q = np.zeros_like(z)
    term = np.ones_like(z)
    prev = np.full_like(z, np.inf)
    done = np.zeros(z.shape, dtype=bool)
    for j in range(1, max_terms):
        term = term * (mu - (2 * j - 1) ** 2) / (8 * j * z)
        a = np.abs(term)
        done |= ((a > prev) & (j > 6)) | (a < 1e-17)
        t = np.where(done, 0.0, term)
        r = j % 4
        if r == 1:
            Q += t
        elif r == 2:
            P -= t
        elif r == 3:
            Q -= t
        else:
            P += t
        prev = np.where(done, prev, a)
        if done.all():
            break
    phase = z - (n / 2 + 0.25) * np.pi
    return np.sqrt(2 / (np.pi * z)) * (P * np.cos(phase) - Q * np.sin(phase))


def bessel_jn(n: int, z):
    """J_n(z) for integer n >= 0 and z >= 0.

    Normalized downward recurrence for z < max(2n, 20) (2(k-1) for the
    kernel), the Hankel expansion truncated at its smallest term beyond.
    """
    arr = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(arr < 0):
        raise ValueError("z must be >= 0")
    out = np.zeros_like(arr)
    zero = arr == 0
    out[zero] = 1.0 if n == 0 else 0.0
    # the Hankel series bottoms out near e^{-2z}, so it also needs z >= 20
    switch = max(2 * n, 20)
    small = (~zero) & (arr < switch)
    large = arr >= switch
    if small.any():
        out[small] = _bessel_miller(n, arr[small])
    if large.any():
        out[large] = _bessel_hankel(n, arr[large])
    return float(out[0]) if np.ndim(z) == 0 else out


def bessel_series(n: int, z: float, terms: int = 40) -> float:
    """Ascending series sum_j (-1)^j (z/2)^{2j+n} / (j! (j+n)!), the small-argument oracle."""
    s = 0.0
    h = z / 2
    t = h**n / math.factorial(n)
    for j in range(terms):
        s += t
        t *= -h * h / ((j + 1) * (j + 1 + n))
    return s


def bessel_kernel(x, k: int):
    """J(x) = 4 pi i^k x^{-1} J_{k-1}(2 pi x) for even k."""
    if k % 2:
        raise ValueError(f"k must be even, got {k}")
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("bessel_kernel needs x > 0")
    sign = -1.0 if (k // 2) % 2 else 1.0
    val = sign * 4 * np.pi / arr * bessel_jn(k - 1, 2 * np.pi * arr)
    return float(val) if np.ndim(x) == 0 else val


# ---------------------------------------------------------------------------
# diagonal


@dataclass(frozen=True)
class DiagonalResult:
    q: int
    k: int
    value: float
    main_term: float
    ratio: float
    cutoff: int
    tail_estimate: float
    tail_warning: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def diagonal_D(q: int, k: int = 12, eps: float = V_CUTOFF) -> DiagonalResult:
    """8 sum_{(d n1 n2, q) = 1} (d n1 n2)^{-1} V(n1 n2/q) V(d n1/q) V(d n2/q).

    Every variable is cut at Y q with V(Y) = eps; for fixed d the (n1, n2)
    block is a quadratic form in a_d[n] = V(dn/q)/n.
    """
    _check_q(q)
    if q > budget("diagonal_q"):
        raise SizeLimitError(f"q={q} exceeds budget diagonal_q={budget('diagonal_q')}")
    Y = V_cutoff(k, eps)
    L = int(math.ceil(Y * q))
    n = np.arange(1, L + 1)
    cop = np.gcd(n, q) == 1
    M = V(np.outer(n, n) / q, k)
    total = 0.0
    for d in range(1, L + 1):
        if math.gcd(d, q) != 1:
            continue
        m = L // d
        a = np.where(cop[:m], V(d * n[:m] / q, k) / n[:m], 0.0)
        total += float(a @ M[:m, :m] @ a) / d
    D = 8 * total
    main = 8 / 3 * euler_phi(q) / q * math.log(q) ** 3
    # each dropped term carries a factor V < eps; three harmonic sums bound the rest
    tail = 8 * 3 * eps * (1 + math.log(L)) ** 3
    return DiagonalResult(q, k, D, main, D / main, L, tail, tail > 1e-6 * D)


def _check_q(q: int) -> None:
    if q < 3 or q % 2 == 0 or not is_squarefree(q):
        raise ValueError(f"q must be odd, squarefree and > 1, got {q}")


# ---------------------------------------------------------------------------
# cubic moment


@dataclass(frozen=True)
class MomentConfig:
    q: int
    k: int = 12
    N_max: int | None = None
    C_max: int | None = None
    d_max: int | None = None

    def __post_init__(self):
        _check_q(self.q)
        if self.k % 2 or self.k < 12:
            raise ValueError(f"k must be even and >= 12, got {self.k}")
        for name in ("N_max", "C_max", "d_max"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be positive")
        chi_m1 = int(jacobi_table(self.q)[self.q - 1])
        ik = -1 if (self.k // 2) % 2 else 1
        if chi_m1 != ik:
            raise ParityError(f"chi_{self.q}(-1) = {chi_m1} but i^{self.k} = {ik}")


@dataclass
class MomentReport:
    q: int
    k: int
    N_max: int
    C_max: int
    d_max: int
    D_value: float
    kloosterman_part: float
    total: float
    tail_estimate: float
    tail_parts: dict
    breakdown: list = field(default_factory=list)  # rows (c, S(c), S(c)/c^2, cumulative)

    SCHEMA_VERSION = 1

    def to_dict(self) -> dict:
        return {
            "schema_version": self.SCHEMA_VERSION,
            "q": self.q,
            "k": self.k,
            "N_max": self.N_max,
            "C_max": self.C_max,
            "d_max": self.d_max,
            "D_value": self.D_value,
            "kloosterman_part": self.kloosterman_part,
            "total": self.total,
            "tail_estimate": self.tail_estimate,
            "tail_parts": self.tail_parts,
            "budgets": all_budgets(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["c", "S(c)", "c^-2 S(c)", "cumulative_total"])
        for c, s, sc, cum in self.breakdown:
            w.writerow([c, repr(float(s)), repr(float(sc)), repr(float(cum))])
        return buf.getvalue()


@dataclass(frozen=True)
class _Box:
    """Per-config data shared by all moduli c."""

    q: int
    k: int
    N: int
    prod: np.ndarray  # n * n1 * n2 over the box
    m: np.ndarray  # n1 * n2
    n: np.ndarray
    weight: np.ndarray  # chi(n n1 n2) V(n/q) W(n1, n2)
    root: np.ndarray  # sqrt(n n1 n2)


def _build_box(q: int, k: int, N: int, d_max: int) -> _Box:
    n = np.arange(1, N + 1)
    chi = jacobi_table(q).astype(float)
    d = np.arange(1, d_max + 1)
    d = d[np.gcd(d, q) == 1]
    A = V(np.outer(d, n) / q, k)
    W = (A.T / d) @ A
    nn = n[:, None, None]
    m = (n[:, None] * n[None, :])[None, :, :]
    prod = nn * m
    weight = chi[prod % q] * V(n / q, k)[:, None, None] * W[None, :, :]
    return _Box(q, k, N, prod, np.broadcast_to(m, prod.shape), np.broadcast_to(nn, prod.shape), weight, np.sqrt(prod.astype(float)))


def _S_of_c(box: _Box, c: int) -> tuple[float, float]:
    """8 sum over the box of chi S(n, n1 n2; c) J(2 sqrt(n n1 n2)/c) V3; also sum of |terms|."""
    tab = kloosterman_table(c)
    mask = box.weight != 0
    n = box.n[mask]
    m = box.m[mask]
    t = (n * m) % c
    S = tab.base[t]
    both = (np.gcd(n, c) > 1) & (np.gcd(m, c) > 1)
    if both.any():
        for a in np.unique(n[both]):
            sel = both & (n == a)
            S[sel] = tab.row(int(a))[m[sel] % c]
    J = bessel_kernel(2 * box.root[mask] / c, box.k)
    terms = box.weight[mask] * S * J
    return 8 * float(np.sum(terms)), 8 * float(np.sum(np.abs(terms)))


def _per_c(args):
    box, c = args
    return _S_of_c(box, c)


def _c_tail_bound(box: _Box, q: int, k: int, C: int) -> float:
    """Bound for sum over c > C, c = 0 mod q, using |S| <= c and
    |J_{k-1}(z)| <= (z/2)^{k-1}/(k-1)!, i.e. |J(x)| <= 4 pi^k x^{k-2}/(k-1)!."""
    B = float(np.sum(np.abs(box.weight) * box.root ** (k - 2)))
    K = 8 * 4 * math.pi**k * 2 ** (k - 2) / math.factorial(k - 1) * B
    j0 = C // q
    # sum_{j > j0} (j q)^{-(k-1)} <= q^{-(k-1)} j0^{-(k-2)} / (k-2)
    return K * q ** (-(k - 1)) * j0 ** (-(k - 2)) / (k - 2)


def _n_tail_bound(q: int, k: int, N: int, C: int) -> float:
    """Terms with some variable above N, using |J(x)| <= 8 pi^2/(k-1) and |S| <= c."""
    a = k / 2
    I = q * V_tail_integral(N / q, k)
    Vall = q * a / (2 * math.pi)
    Wall = (q * a / (2 * math.pi)) ** 2 * 1.2020569031595942  # zeta(3)
    Wtail = 2 * q * q * V_tail_integral(N / q, k) * a / (2 * math.pi) * 1.2020569031595942
    per = 8 * 8 * math.pi**2 / (k - 1) * (I * Wall + Vall * Wtail)
    harmonic = sum(1.0 / c for c in range(q, C + 1, q))
    return per * harmonic


def default_cutoffs(q: int, k: int) -> tuple[int, int]:
    Y = V_cutoff(k)
    N = min(int(math.ceil(3 * k * q)), int(math.ceil(Y * q)))
    return N, int(math.ceil(Y * q))


def cubic_moment_rhs(config: MomentConfig, mapper=map, rel_tail: float = 1e-6) -> MomentReport:
    """D + sum_{c = 0 (q), c <= C_max} c^{-2} S(c).

    ``mapper`` is any order-preserving map (builtin map or Executor.map);
    the sum over c is always reduced in ascending c.  When C_max is not
    given it is the smallest multiple of q whose c-tail bound is below
    ``rel_tail`` times D.
    """
    q, k = config.q, config.k
    if q > budget("moment_q"):
        raise SizeLimitError(f"q={q} exceeds budget moment_q={budget('moment_q')}")
    N_def, d_def = default_cutoffs(q, k)
    N = config.N_max or N_def
    d_max = config.d_max or d_def
    box = _build_box(q, k, N, d_max)
    D = diagonal_D(q, k)
    if config.C_max is not None:
        C = config.C_max
    else:
        C = q
        while _c_tail_bound(box, q, k, C) > rel_tail * D.value:
            C += q
    check_cap = budget("kloosterman_c")
    if C > check_cap:
        raise SizeLimitError(f"C_max={C} exceeds budget kloosterman_c={check_cap}")
    cs = list(range(q, C + 1, q))
    results = list(mapper(_per_c, [(box, c) for c in cs]))
    rows = []
    kl = 0.0
    abs_sum = 0.0
    for c, (s, sa) in zip(cs, results):
        sc = s / (c * c)
        kl += sc
        abs_sum += sa / (c * c)
        rows.append((c, s, sc, D.value + kl))
    tails = {
        "c_tail": _c_tail_bound(box, q, k, C),
        "n_tail": _n_tail_bound(q, k, N, C),
        "d_tail": D.tail_estimate,
        "roundoff": 64 * EPS * (abs_sum + D.value) * math.log2(max(N, 2)) * 3,
    }
    harmonic = sum(1.0 / c for c in cs)
    x_min = d_max / q
    tails["v3_d_tail"] = (8 * 8 * math.pi**2 / (k - 1) * q * (k / 2) / (2 * math.pi) * N * N
                          * V_tail_integral(x_min, k) / x_min * harmonic)
    tail = sum(tails.values())
    return MomentReport(q, k, N, C, d_max, D.value, kl, D.value + kl, tail, tails, rows)
