"""The twisted character sums attached to the cubic moment.

Each sum has a brute-force route straight from its definition; where a closed
form exists it is computed independently so the two can be compared.

Conventions
-----------
chi is always the real character n -> (n/q) for odd squarefree q, extended to
a modulus c = q r by periodicity mod q.  Multiplicative characters vanish at 0,
except that ``g_hybrid(..., trivial_is_one=True)`` evaluates the trivial
character as the constant function 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np

from .classical import (
    SumValue,
    additive_table,
    brute_error,
    gauss_sum,
    kloosterman_angle,
    kloosterman_matrix,
    kloosterman_table,
    ramanujan_sum,
)
from .config import SizeLimitError, budget, check_budget
from .ffarith import (
    FieldChar,
    InvalidModulusError,
    MultChar,
    UnsupportedModulusError,
    build_ext_field,
    divisors,
    enumerate_characters,
    euler_phi,
    is_prime,
    is_squarefree,
    jacobi_character,
    jacobi_table,
    mobius,
    mod_inverse,
)

# unit multiplying m m1 m2 inside H(.; l) in the closed form for G':
# (r h k)^{-1} mod l, selected against the brute-force definition
G_UNIT_CONVENTION = "inv(r*h*k) mod l"


@dataclass
class IdentityReport:
    identity: str
    lhs: Any
    rhs: Any
    deviation: float
    tolerance: float
    passed: bool
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "lhs": _jsonable(self.lhs),
            "rhs": _jsonable(self.rhs),
            "deviation": float(self.deviation),
            "tolerance": float(self.tolerance),
            "pass": bool(self.passed),
            "params": {k: _jsonable(v) for k, v in self.params.items()},
        }


def _jsonable(x):
    if isinstance(x, SumValue):
        x = x.value
    if isinstance(x, (complex, np.complexfloating)):
        x = complex(x)
        if x.imag == 0:
            return float(x.real)
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


def compare(name: str, lhs, rhs, tol: float, **params) -> IdentityReport:
    dev = abs(complex(lhs) - complex(rhs))
    return IdentityReport(name, lhs, rhs, dev, tol, bool(dev <= tol), params)


def _check_odd_squarefree(q: int) -> None:
    if q < 1 or q % 2 == 0 or not is_squarefree(q):
        raise UnsupportedModulusError(f"modulus {q} must be odd and squarefree")


def _chi_float(q: int) -> np.ndarray:
    return jacobi_table(q).astype(float)


def _chi_minus_one(q: int) -> int:
    return 1 if q == 1 else int(jacobi_table(q)[q - 1])


# ---------------------------------------------------------------------------
# H(w; q), H*(w; q), H_r


def _h_weights(q: int, reduced: bool) -> np.ndarray:
    """N[x] = sum over u, v with uv - 1 = x of chi(u(u+1)) chi(v(v+1))."""
    ch = _chi_float(q)
    x = np.arange(q)
    a = ch[(x * (x + 1)) % q]
    uv1 = (np.outer(x, x) - 1) % q
    w = np.outer(a, a)
    if reduced:
        w = w * (np.gcd(uv1, q) == 1)
    return np.bincount(uv1.ravel(), weights=w.ravel(), minlength=q)


def H_sum(w: int, q: int, reduced: bool = False) -> SumValue:
    """H(w; q) = sum_{u,v mod q} chi(uv(u+1)(v+1)) e_q((uv-1)w).

    ``reduced`` restricts to (uv - 1, q) = 1, giving H*(w; q).
    """
    _check_odd_squarefree(q)
    if q == 1:
        return SumValue(1.0 + 0j, 0.0, "brute")
    check_budget("double_sum", q * q, f"H(w; {q})")
    n = _h_weights(q, reduced)
    x = np.arange(q)
    val = complex(np.sum(n * additive_table(q)[(x * (w % q)) % q]))
    return SumValue(val, brute_error(q * q), "brute")


@lru_cache(maxsize=64)
def _H_all(q: int, reduced: bool = False) -> np.ndarray:
    """H(w; q) for every w mod q."""
    if q == 1:
        return np.ones(1, dtype=complex)
    n = _h_weights(q, reduced)
    x = np.arange(q)
    return additive_table(q)[np.outer(x, x) % q] @ n


def H_r_sum(m: int, m1: int, m2: int, q: int, r: int) -> SumValue:
    """H_r(m, m1, m2; q) from its defining double sum.

    sum_{u,v mod q} chi[uv(vr - m)(ur - (vr - m)m1)] e_q(u m2 - v m1 m2)
    """
    _check_odd_squarefree(q)
    if q == 1:
        return SumValue(1.0 + 0j, 0.0, "brute")
    check_budget("double_sum", q * q, f"H_r(.; {q})")
    ch = _chi_float(q)
    u = np.arange(q)[:, None]
    v = np.arange(q)[None, :]
    vr = (v * r - m) % q
    arg = (u * v % q) * vr % q * ((u * r - vr * m1) % q) % q
    ph = (u * m2 - v * m1 * m2) % q
    val = complex(np.sum(ch[arg] * additive_table(q)[ph]))
    return SumValue(val, brute_error(q * q), "brute")


def H_r_shifted_sum(m: int, m1: int, m2: int, q: int, r: int) -> SumValue:
    """H_r after u -> u + v m1: sum chi[v(u + v m1)(vr - m)(ur + m m1)] e_q(u m2)."""
    _check_odd_squarefree(q)
    if q == 1:
        return SumValue(1.0 + 0j, 0.0, "brute")
    ch = _chi_float(q)
    u = np.arange(q)[:, None]
    v = np.arange(q)[None, :]
    arg = v * ((u + v * m1) % q) % q * ((v * r - m) % q) % q * ((u * r + m * m1) % q) % q
    val = complex(np.sum(ch[arg] * additive_table(q)[(u * m2 % q) * np.ones_like(v)]))
    return SumValue(val, brute_error(q * q), "brute")


def H_r_prime(m: int, m1: int, m2: int, p: int, r: int) -> SumValue:
    """Three-case evaluation of H_r at a prime modulus p."""
    if not is_prime(p) or p == 2:
        raise UnsupportedModulusError(f"{p} is not an odd prime")
    mm = m * m1 * m2
    if r % p == 0:
        # chi^2(m m1 m2) tau^2(chi), tau^2 = chi(-1) p
        val = (1 if mm % p else 0) * _chi_minus_one(p) * p
    elif mm % p == 0:
        val = (
            ramanujan_sum(m, p, "closed_form").real
            * ramanujan_sum(m1, p, "closed_form").real
            * ramanujan_sum(m2, p, "closed_form").real
            / (p - 1)
        )
    else:
        return SumValue(complex(_H_all(p)[mod_inverse(r, p) * mm % p]), brute_error(p * p), "closed_form")
    return SumValue(complex(val), 0.0, "closed_form")


def _gcd3(a: int, b: int, c: int) -> int:
    return math.gcd(math.gcd(a, b), c)


def _hkl(m: int, m1: int, m2: int, q: int, r: int) -> tuple[int, int, int]:
    h = math.gcd(r, q)
    k = math.gcd(m * m1 * m2, q // h)
    return h, k, q // (h * k)


def H_r_closed(m: int, m1: int, m2: int, q: int, r: int) -> SumValue:
    """H_r for squarefree q, split as h k l and evaluated factor by factor."""
    _check_odd_squarefree(q)
    h, k, l = _hkl(m, m1, m2, q, r)
    if math.gcd(h, m * m1 * m2) != 1:
        return SumValue(0j, 0.0, "closed_form", {"vanishes": True, "h": h, "k": k, "l": l})
    rk = _ramanujan3(m, m1, m2, k)
    u = mod_inverse(r * h * k, l) if l > 1 else 0
    hv = _H_all(l)[(u * m * m1 * m2) % l]
    val = _chi_minus_one(h) * h / euler_phi(k) * rk * hv
    return SumValue(complex(val), brute_error(l * l, abs(val) + 1), "closed_form", {"h": h, "k": k, "l": l})


def _ramanujan3(m: int, m1: int, m2: int, k: int) -> float:
    return (
        ramanujan_sum(m, k, "closed_form").real
        * ramanujan_sum(m1, k, "closed_form").real
        * ramanujan_sum(m2, k, "closed_form").real
    )


# ---------------------------------------------------------------------------
# G(m, m1, m2; c)


@lru_cache(maxsize=16)
def _G_weights(q: int, r: int) -> np.ndarray:
    """F[a, a1, a2] = chi(a a1 a2) S(a, a1 a2; c) with c = q r."""
    c = q * r
    S = kloosterman_table(c).full()
    ch = _chi_float(q)[np.arange(c) % q]
    a = np.arange(c)
    F = S[:, np.outer(a, a) % c]
    F *= ch[:, None, None] * ch[None, :, None] * ch[None, None, :]
    F.flags.writeable = False
    return F


def _check_G_args(q: int, r: int) -> int:
    _check_odd_squarefree(q)
    if r < 1:
        raise InvalidModulusError(f"r must be positive, got {r}")
    c = q * r
    check_budget("g_brute_c", c, f"G(.; {c})")
    return c


def G_brute(m: int, m1: int, m2: int, q: int, r: int = 1) -> SumValue:
    """G(m, m1, m2; qr) by summing all c^3 terms of its definition."""
    c = _check_G_args(q, r)
    F = _G_weights(q, r)
    a = np.arange(c)
    ph = ((a * m)[:, None, None] + (a * m1)[None, :, None] + (a * m2)[None, None, :]) % c
    val = complex(np.sum(F * additive_table(c)[ph]))
    return SumValue(val, brute_error(c**3, c ** 0.5 * 2), "brute", {"c": c})


def G_grid(q: int, r: int = 1) -> np.ndarray:
    """All G(m, m1, m2; qr), m's mod c, as nested exact DFTs of the definition."""
    c = _check_G_args(q, r)
    F = _G_weights(q, r)
    a = np.arange(c)
    E = additive_table(c)[np.outer(a, a) % c]
    t = np.tensordot(F, E, axes=([2], [0]))  # a, a1, m2
    t = np.tensordot(t, E, axes=([1], [0]))  # a, m2, m1
    t = np.tensordot(t, E, axes=([0], [0]))  # m2, m1, m
    return np.ascontiguousarray(t.transpose(2, 1, 0))


def G_closed(m: int, m1: int, m2: int, q: int, r: int = 1) -> SumValue:
    """G'(m, m1, m2; c) = e_c(-m m1 m2) G(m, m1, m2; c) in closed form.

    With h = (r, q), k = (m m1 m2, q), l = q/(hk) and u = (r h k)^{-1} mod l:

        chi_{kl}(-1) r^2 q h / phi(k) * R(m;k) R(m1;k) R(m2;k) * H(u m m1 m2; l)

    and zero unless (m, r) = 1 and (m1 m2, q, r) = 1.  A vanishing value is
    flagged with ``meta["vanishes"] = True``.
    """
    _check_odd_squarefree(q)
    if r < 1:
        raise InvalidModulusError(f"r must be positive, got {r}")
    meta = {"unit_convention": G_UNIT_CONVENTION}
    if math.gcd(m, r) != 1 or _gcd3(m1 * m2, q, r) != 1:
        return SumValue(0j, 0.0, "closed_form", {**meta, "vanishes": True})
    h, k, l = _hkl(m, m1, m2, q, r)
    u = mod_inverse(r * h * k, l) if l > 1 else 0
    hv = _H_all(l)[(u * m * m1 * m2) % l]
    val = _chi_minus_one(k * l) * r * r * q * h / euler_phi(k) * _ramanujan3(m, m1, m2, k) * hv
    err = brute_error(l * l, r * r * q * h * k * k)
    return SumValue(complex(val), err, "closed_form", {**meta, "vanishes": False, "h": h, "k": k, "l": l})


def G_from_closed(m: int, m1: int, m2: int, q: int, r: int = 1) -> complex:
    """e_c(m m1 m2) G', which should reproduce G_brute."""
    c = q * r
    return complex(G_closed(m, m1, m2, q, r).value * additive_table(c)[(m * m1 * m2) % c])


# ---------------------------------------------------------------------------
# g(chi, psi), H* spectral expansion


def _psi_table(psi: MultChar, trivial_is_one: bool) -> np.ndarray:
    vals = np.array(psi.values)
    if trivial_is_one and psi.is_principal:
        vals = np.ones(psi.q, dtype=complex)
    return vals


def g_hybrid(chi: MultChar, psi: MultChar, q: int | None = None, *, trivial_is_one: bool = True) -> SumValue:
    """g(chi, psi) = sum_{u,v mod q} chi(uv(u+1)(v+1)) psi(uv - 1).

    The trivial psi is the constant 1 when ``trivial_is_one`` (so that
    g(chi, 1) = 1); otherwise it is the principal Dirichlet character.
    """
    q = chi.q if q is None else q
    if chi.q != q or psi.q != q:
        raise InvalidModulusError(f"characters mod {chi.q}, {psi.q} do not match modulus {q}")
    if chi.kind != "jacobi_real" and q > 1:
        raise InvalidModulusError("chi must be the real Jacobi character")
    check_budget("double_sum", q * q, f"g(chi, psi) mod {q}")
    ch = chi.values.real
    x = np.arange(q)
    a = ch[(x * (x + 1)) % q]
    uv = np.outer(x, x) % q
    pv = _psi_table(psi, trivial_is_one)[(uv - 1) % q]
    val = complex(np.sum(np.outer(a, a) * pv))
    return SumValue(val, brute_error(q * q), "brute")


def g_all(q: int, *, trivial_is_one: bool = True) -> list[tuple[MultChar, SumValue]]:
    chi = jacobi_character(q)
    return [(psi, g_hybrid(chi, psi, q, trivial_is_one=trivial_is_one)) for psi in enumerate_characters(q)]


def hstar_spectral(w: int, q: int) -> SumValue:
    """phi(q)^{-1} sum_psi tau(conj psi) g(chi, psi) psi(w), q prime."""
    if q == 1:
        return SumValue(1.0 + 0j, 0.0, "identity")
    if not is_prime(q) or q == 2:
        raise UnsupportedModulusError(f"spectral expansion implemented for odd primes, got {q}")
    if math.gcd(w, q) != 1:
        raise InvalidModulusError(f"(w, q) = ({w}, {q}) is not coprime")
    chi = jacobi_character(q)
    total = 0j
    for psi in enumerate_characters(q):
        g = g_hybrid(chi, psi, q, trivial_is_one=False).value
        total += gauss_sum(psi.conj()).value * g * psi(w)
    val = total / euler_phi(q)
    return SumValue(val, brute_error(q**3), "identity")


# ---------------------------------------------------------------------------
# identity checks


def multiplicativity_check(q1: int, q2: int, sample: int | None = None, r_values=(1, 2, 3), seed: int = 0) -> list[IdentityReport]:
    """Twisted multiplicativity of H_r and H, and the Moebius expansion of H in H*."""
    _check_odd_squarefree(q1)
    _check_odd_squarefree(q2)
    if math.gcd(q1, q2) != 1:
        raise InvalidModulusError(f"{q1} and {q2} are not coprime")
    q = q1 * q2
    rng = np.random.default_rng(seed)
    tol = 1e-8
    ws = list(range(q)) if sample is None or sample >= q else sorted(int(x) for x in rng.choice(q, sample, replace=False))
    i1 = mod_inverse(q1, q2) if q2 > 1 else 0
    i2 = mod_inverse(q2, q1) if q1 > 1 else 0
    reports = []

    # H_r(m, m1, m2; q1 q2) = H_r(m, m1 q1bar, m2; q2) H_r(m, m1, m2 q2bar; q1)
    n_trip = len(ws)
    trips = [tuple(int(x) for x in rng.integers(0, q, 3)) for _ in range(n_trip)]
    worst = (0.0, None, 0j, 0j)
    for r in r_values:
        for m, m1, m2 in trips:
            lhs = H_r_sum(m, m1, m2, q, r).value
            rhs = H_r_sum(m, m1 * i1, m2, q2, r).value * H_r_sum(m, m1, m2 * i2, q1, r).value
            d = abs(lhs - rhs)
            if worst[1] is None or d > worst[0]:
                worst = (d, (m, m1, m2, r), lhs, rhs)
    reports.append(IdentityReport("H_r multiplicativity", worst[2], worst[3], worst[0], tol, worst[0] <= tol,
                                  {"q1": q1, "q2": q2, "cases": n_trip * len(r_values), "worst": list(worst[1])}))

    def _worst(fn):
        best = (0.0, None, 0j, 0j)
        for w in ws:
            lhs, rhs = fn(w)
            d = abs(lhs - rhs)
            if best[1] is None or d > best[0]:
                best = (d, w, lhs, rhs)
        return best

    Hq, Hq1, Hq2 = _H_all(q), _H_all(q1), _H_all(q2)
    d, w, l, rr = _worst(lambda w: (Hq[w % q], Hq2[(w * i1) % q2] * Hq1[(w * i2) % q1]))
    reports.append(IdentityReport("H twisted multiplicativity", l, rr, d, tol, d <= tol, {"q1": q1, "q2": q2, "cases": len(ws), "worst_w": w}))

    hstar = {d_: _H_all(d_, True) for d_ in divisors(q)}

    def moebius_side(w):
        s = 0j
        for a in divisors(q):
            b = q // a
            ia = mod_inverse(a, b) if b > 1 else 0
            s += mobius(a) * _chi_minus_one(a) * hstar[b][(ia * w) % b]
        return Hq[w % q], s

    d, w, l, rr = _worst(moebius_side)
    reports.append(IdentityReport("H Moebius expansion in H*", l, rr, d, tol, d <= tol, {"q": q, "cases": len(ws), "worst_w": w}))

    lhs = H_unit_diagonal(q)
    rhs = mobius(q) * _chi_minus_one(q)
    reports.append(compare("H restricted to uv = 1", lhs, rhs, tol, q=q))
    return reports


def H_unit_diagonal(q: int) -> float:
    """sum over uv = 1 (mod q) of chi(uv(u+1)(v+1))."""
    _check_odd_squarefree(q)
    if q == 1:
        return 1.0
    ch = _chi_float(q)
    x = np.arange(q)
    uv = np.outer(x, x) % q
    arg = uv * ((x + 1)[:, None] * (x + 1)[None, :] % q) % q
    return float(np.sum(ch[arg] * (uv == 1)))


def g_field(chi: FieldChar, psi: FieldChar, *, trivial_is_one: bool = True) -> SumValue:
    """g(chi, psi) over F_q by the O(q^2) double sum over u, v in F_q."""
    F = chi.field
    if psi.field != F:
        raise InvalidModulusError("characters live on different fields")
    q = F.size
    check_budget("double_sum", q * q, f"g over F_{q}")
    el = np.arange(q)
    a = chi.values[F.mul_arr(el, F.add_const(el, 1))]
    pv = np.ones(q, dtype=complex) if (trivial_is_one and psi.is_principal) else psi.values
    total = 0j
    for u in range(q):
        if a[u] == 0:
            continue
        uv = F.mul_arr(np.full(q, u), el)
        total += a[u] * np.sum(a * pv[F.add_const(uv, -1)])
    return SumValue(complex(total), brute_error(q * q), "brute")


def second_moment(p: int, m: int = 1, chi: FieldChar | None = None) -> list[IdentityReport]:
    """Mean square of g(chi, psi) over all characters psi of F_q^*, q = p^m.

    The stated value is q^2 - 2q - 2.  Two diagnostics go with it: the raw
    count over pairs with u1 v1 = u2 v2 (uv = 1 included), and the mean
    square compared with q^2 - 2q - 3, which is what orthogonality gives
    once the uv = 1 pairs are dropped (psi(0) = 0 for every psi).
    """
    if p == 2:
        raise UnsupportedModulusError("p must be odd")
    F = build_ext_field(p, m)
    q = F.size
    if chi is None:
        chi = F.quadratic_character()
    if chi.is_principal:
        raise InvalidModulusError("chi must be nontrivial")
    values = [g_field(chi, psi, trivial_is_one=False).value for psi in F.characters()]
    mean_sq = float(sum(abs(v) ** 2 for v in values) / (q - 1))
    stated = q * q - 2 * q - 2
    corrected = stated - 1
    params = {"p": p, "m": m, "q": q, "chi_j": chi.j, "psi_zero_convention": "psi(0)=0"}
    out = [
        IdentityReport("mean square of g(chi,psi) = q^2-2q-2", mean_sq, stated, abs(mean_sq - stated), 1e-4 * stated,
                       abs(mean_sq - stated) <= 1e-4 * stated, params),
    ]
    count = _paired_count(chi)
    out.append(compare("second moment pair count incl. uv=1", count, stated, 1e-6 * stated, **params))
    out.append(compare("second moment with uv=1 removed", mean_sq, corrected, 1e-6 * stated, **params))
    return out


def _paired_count(chi: FieldChar) -> complex:
    """sum over u1 v1 = u2 v2 of chi(u1v1(u1+1)(v1+1)) conj chi(u2v2(u2+1)(v2+1))."""
    F = chi.field
    q = F.size
    el = np.arange(q)
    a = chi.values[F.mul_arr(el, F.add_const(el, 1))]
    # B[w] = sum_{uv = w} a(u) a(v)
    B = np.zeros(q, dtype=complex)
    for u in range(1, q):
        if a[u] == 0:
            continue
        uv = F.mul_arr(np.full(q, u), el)
        np.add.at(B, uv, a[u] * a)
    return complex(np.sum(np.abs(B) ** 2))


# ---------------------------------------------------------------------------
# real character, psi = chi


def _g_chi_chi_forms(p: int) -> dict[str, float]:
    ch = _chi_float(p)
    u = np.arange(p)[:, None]
    v = np.arange(p)[None, :]
    f1 = ch[(u * v % p) * ((u + 1) * (v + 1) % p) % p * ((u * v - 1) % p) % p].sum()
    f2 = ch[(u * v % p) * ((u + 1) * (v + 1) % p) % p * ((u - v) % p) % p].sum()
    f4 = ch[(2 * ((u * u - 1) % p) % p) * ((v * v - 1) % p) % p * ((u - v) % p) % p].sum()
    return {"direct": float(f1), "shifted": float(f2), "separated": float(f4)}


def g_chi_chi(p: int) -> int:
    return int(round(_g_chi_chi_forms(p)["direct"]))


def nu_brute(a: int, p: int) -> int:
    """Number of (d1, d2, d3, d4) in (F_p^*)^4 with a(d1+d2) = d3+d4 and
    a(1/d1 + 1/d2) = 1/d3 + 1/d4, counted through a histogram join."""
    d = np.arange(1, p)
    dinv = np.array([pow(int(x), -1, p) for x in d])
    s = (d[:, None] + d[None, :]) % p
    t = (dinv[:, None] + dinv[None, :]) % p
    hist = np.bincount((s * p + t).ravel(), minlength=p * p)
    key = ((a * s) % p) * p + (a * t) % p
    return int(hist[key].sum())


def nu_formula(a: int, p: int) -> int:
    delta = 1 if (a * a) % p == 1 else 0
    return 2 * (p - 1) * (p - 3) + p * (p - 1) * delta


def T_from_sums(p: int) -> float:
    """8/(p(p-1)^2) sum_{x,y} (sum_a chi(a) S^2(ax, ay; p))^2."""
    ch = _chi_float(p)
    K2 = kloosterman_matrix(p).real ** 2
    a = np.arange(p)
    total = 0.0
    for x in range(p):
        rows = (a * x) % p
        inner = (ch[:, None] * K2[rows[:, None], (a[:, None] * a[None, :]) % p]).sum(axis=0)
        total += float(np.sum(inner**2))
    return 8.0 / (p * (p - 1) ** 2) * total


def T_from_nu(p: int) -> float:
    """8p/(p-1)^2 sum_{a1,a2} chi(a1 a2) nu(a1/a2) with nu counted by brute force."""
    ch = _chi_float(p)
    nu = np.zeros(p)
    for b in range(1, p):
        nu[b] = nu_brute(b, p)
    a = np.arange(1, p)
    ratio = (a[:, None] * np.array([pow(int(x), -1, p) for x in a])[None, :]) % p
    s = float(np.sum(ch[a][:, None] * ch[a][None, :] * nu[ratio]))
    return 8.0 * p / (p - 1) ** 2 * s


def real_character_suite(p: int, nu_samples: int = 5, seed: int = 0) -> list[IdentityReport]:
    if p == 2 or not is_prime(p):
        raise UnsupportedModulusError(f"p must be an odd prime, got {p}")
    if p > budget("real_char_p"):
        raise SizeLimitError(f"p={p} exceeds budget real_char_p={budget('real_char_p')}")
    chi = jacobi_character(p)
    ch = _chi_float(p)
    cm1 = _chi_minus_one(p)
    reports = []
    forms = _g_chi_chi_forms(p)
    g = forms["direct"]
    rel = lambda x: 1e-6 * max(1.0, abs(x))
    reports.append(compare("g(chi,chi) change of variables", g, forms["shifted"], rel(g), p=p))
    reports.append(compare("g(chi,chi) separated form", g, forms["separated"], rel(g), p=p))
    reports.append(compare("g(chi,chi) vanishes when chi(-1) = -1", g if cm1 == -1 else 0.0, 0.0, 1e-9, p=p, chi_minus_one=cm1))

    K = kloosterman_matrix(p)
    u = np.arange(p)
    e = additive_table(p)
    worst = (0.0, 1, 0j, 0j)
    for a in range(1, p):
        lhs = complex(np.sum(ch[(u * u - 1) % p] * e[(2 * a * u) % p]))
        rhs = complex(K[a, a])
        d = abs(lhs - rhs)
        if d > worst[0] or a == 1:
            worst = max(worst, (d, a, lhs, rhs), key=lambda t: t[0])
    reports.append(IdentityReport("quadratic sum equals S(a,a;p)", worst[2], worst[3], worst[0], 1e-6 * 2 * math.sqrt(p),
                                  worst[0] <= 1e-6 * 2 * math.sqrt(p), {"p": p, "worst_a": worst[1]}))

    tau = gauss_sum(chi).value
    diag = np.array([K[a, a].real for a in range(p)])
    lhs = g * tau
    rhs = complex(np.sum(ch * diag**2))
    reports.append(compare("g(chi,chi) tau(chi) = sum chi(a) S^2(a,a;p)", lhs, rhs, rel(abs(rhs)), p=p))

    rng = np.random.default_rng(seed + p)
    pool = list(range(1, p))
    picks = sorted({1, p - 1} | {int(x) for x in rng.choice(pool, size=min(len(pool), nu_samples), replace=False)})[:max(nu_samples, 2)]
    worst_nu = None
    for a in picks:
        nb, nf = nu_brute(a, p), nu_formula(a, p)
        if worst_nu is None or abs(nb - nf) > abs(worst_nu[1] - worst_nu[2]):
            worst_nu = (a, nb, nf)
    reports.append(IdentityReport("nu(a) count", worst_nu[1], worst_nu[2], abs(worst_nu[1] - worst_nu[2]), 0.0,
                                  worst_nu[1] == worst_nu[2], {"p": p, "sampled_a": picks, "worst_a": worst_nu[0]}))

    T_closed = 8 * p * p * (1 + cm1)
    T_sum = T_from_sums(p)
    reports.append(IdentityReport("T = 8p^2(1+chi(-1)) from Kloosterman sums", T_sum, T_closed, abs(T_sum - T_closed),
                                  1e-6 * max(1.0, T_closed), round(T_sum) == T_closed and abs(T_sum - T_closed) <= 1e-6 * max(1.0, T_closed), {"p": p}))
    T_nu = T_from_nu(p)
    reports.append(IdentityReport("T from nu counts", T_nu, T_closed, abs(T_nu - T_closed), 1e-6 * max(1.0, T_closed),
                                  abs(T_nu - T_closed) <= 1e-6 * max(1.0, T_closed), {"p": p}))

    reports.append(IdentityReport("g(chi,chi)^2 <= T", g * g, T_closed, max(0.0, g * g - T_closed), 0.0, g * g <= T_sum + 1e-6 * max(1.0, T_closed), {"p": p}))
    reports.append(IdentityReport("|g(chi,chi)| <= 4p", abs(g), 4 * p, max(0.0, abs(g) - 4 * p), 0.0, abs(g) <= 4 * p, {"p": p}))

    omegas = np.array([kloosterman_angle(a, p) for a in range(1, p)])
    twist = complex(np.sum(ch[1:] * np.exp(2j * omegas)))
    bound = 2 * math.sqrt(p)
    reports.append(IdentityReport("twisted angle sum |sum chi(a) e^{2i omega}| <= 2 sqrt(p)", abs(twist), bound,
                                  max(0.0, abs(twist) - bound), 1e-6, abs(twist) <= bound + 1e-6, {"p": p, "sum": twist}))
    cos_sum = float(np.sum(ch[1:] * np.cos(2 * omegas)))
    recon = tau * (1 + cm1) * cos_sum
    reports.append(compare("g(chi,chi) = tau(1+chi(-1)) sum chi(a) cos(2 omega)", g, recon, rel(g), p=p))
    return reports


# ---------------------------------------------------------------------------
# p = 1 mod 4: Jacobi sums and eta(4z)^6


def eta6_coefficients(N: int) -> list[int]:
    """a(1..N) for q prod_{n>=1} (1 - q^{4n})^6."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    L = (N - 1) // 4 + 1
    c = [0] * L
    c[0] = 1
    for n in range(1, L):
        for _ in range(6):
            for i in range(L - 1, n - 1, -1):
                c[i] -= c[i - n]
    out = [0] * N
    for j in range(L):
        if 4 * j + 1 <= N:
            out[4 * j] = c[j]
    return out


def quartic_character(p: int) -> MultChar:
    """Character mod p sending the smallest primitive root to +i."""
    if p % 4 != 1 or not is_prime(p):
        raise InvalidModulusError(f"no quartic character mod {p}")
    return MultChar(p, (p,), ((p - 1) // 4,))


def jacobi_sum(chi: MultChar, psi: MultChar) -> complex:
    """J(chi, psi) = sum_a chi(a) psi(1 - a)."""
    q = chi.q
    a = np.arange(q)
    return complex(np.sum(chi.values * psi.values[(1 - a) % q]))


def jacobi_sum_suite(p: int) -> list[IdentityReport]:
    if p % 4 != 1 or not is_prime(p):
        raise InvalidModulusError(f"p must be a prime = 1 (mod 4), got {p}")
    chi = jacobi_character(p)
    psi = quartic_character(p)
    g = g_chi_chi(p)
    J = jacobi_sum(chi, psi)
    Jc = jacobi_sum(chi, psi.conj())
    two_re = 2 * (J * J).real
    two_re_c = 2 * (Jc * Jc).real
    a_p = eta6_coefficients(p)[p - 1]
    return [
        compare("g(chi,chi) = 2 Re J(chi,psi4)^2", g, two_re, 1e-8 * p, p=p, J=J),
        compare("2 Re J^2 independent of quartic choice", two_re, two_re_c, 1e-8 * p, p=p),
        IdentityReport("g(chi,chi) = a(p) of eta(4z)^6", g, a_p, abs(g - a_p), 0.0, g == a_p, {"p": p}),
    ]


def hybrid_bound_audit(p: int) -> IdentityReport:
    """max over psi of |g(chi, psi)| / p, checked against 4."""
    chi = jacobi_character(p)
    ratios = [abs(g_hybrid(chi, psi, p).value) / p for psi in enumerate_characters(p)]
    worst = max(ratios)
    return IdentityReport("max |g(chi,psi)|/p <= 4", worst, 4.0, max(0.0, worst - 4.0), 0.0, worst <= 4.0,
                          {"p": p, "argmax_psi": int(np.argmax(ratios))})
