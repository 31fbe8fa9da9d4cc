"""Gauss, Ramanujan and Kloosterman sums."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .config import check_budget
from .ffarith import MultChar, divisor_count, divisors, is_prime, mobius

EPS = float(np.finfo(float).eps)


class AngleUndefinedError(ValueError):
    pass


@dataclass(frozen=True)
class SumValue:
    """A computed sum with an absolute error bound and provenance tag."""

    value: complex
    abs_error: float
    method: str  # "brute" | "closed_form" | "identity"
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def imag(self) -> float:
        return self.value.imag

    def __complex__(self) -> complex:
        return complex(self.value)

    def to_dict(self) -> dict:
        return {
            "re": float(self.value.real),
            "im": float(self.value.imag),
            "abs_error": float(self.abs_error),
            "method": self.method,
            **({"meta": self.meta} if self.meta else {}),
        }


def brute_error(n_terms: int, scale: float = 1.0) -> float:
    """Error model for a fixed-order double-precision sum of unit-size terms."""
    return 4.0 * max(n_terms, 1) * EPS * scale


@lru_cache(maxsize=256)
def additive_table(c: int) -> np.ndarray:
    """e_c(x) for x = 0..c-1."""
    t = np.exp(2j * np.pi * np.arange(c) / c)
    t.flags.writeable = False
    return t


@lru_cache(maxsize=512)
def units_and_inverses(c: int) -> tuple[np.ndarray, np.ndarray]:
    if c == 1:
        d = np.array([0], dtype=np.int64)
        return d, d
    d = np.array([x for x in range(c) if math.gcd(x, c) == 1], dtype=np.int64)
    dbar = np.array([pow(int(x), -1, c) for x in d], dtype=np.int64)
    d.flags.writeable = False
    dbar.flags.writeable = False
    return d, dbar


# ---------------------------------------------------------------------------


def gauss_sum(chi: MultChar) -> SumValue:
    """tau(chi) = sum_{x mod q} chi(x) e_q(x)."""
    q = chi.q
    val = complex(np.sum(chi.values * additive_table(q)))
    return SumValue(val, brute_error(q), "brute")


def ramanujan_sum(m: int, q: int, method: str = "brute") -> SumValue:
    """R(m; q) = sum over d mod q, (d,q)=1 of e_q(dm)."""
    if q < 1:
        raise ValueError(f"modulus must be positive, got {q}")
    if method == "closed_form":
        g = math.gcd(m, q)
        val = sum(d * mobius(q // d) for d in divisors(g))
        return SumValue(complex(val), 0.0, "closed_form")
    d, _ = units_and_inverses(q)
    val = complex(np.sum(additive_table(q)[(d * (m % q)) % q]))
    return SumValue(val, brute_error(q), "brute")


def weil_bound(m: int, n: int, c: int) -> float:
    """(m, n, c)^{1/2} c^{1/2} tau(c)."""
    g = math.gcd(math.gcd(m, n), c)
    return math.sqrt(g) * math.sqrt(c) * divisor_count(c)


def kloosterman(m: int, n: int, c: int, want_angle: bool = False) -> SumValue:
    """S(m, n; c) by direct summation over units d in ascending order.

    With ``want_angle`` the Kloosterman angle omega in [0, pi], defined by
    S = 2 sqrt(c) cos(omega), is stored in ``meta["angle"]``; this needs c
    prime and (mn, c) = 1.
    """
    if c < 1:
        raise ValueError(f"modulus must be positive, got {c}")
    d, dbar = units_and_inverses(c)
    idx = ((m % c) * d + (n % c) * dbar) % c
    val = complex(np.sum(additive_table(c)[idx]))
    meta = {}
    if want_angle:
        if not is_prime(c) or math.gcd(m * n, c) != 1:
            raise AngleUndefinedError(f"Kloosterman angle undefined for (m, n, c) = ({m}, {n}, {c})")
        meta["angle"] = float(np.arccos(np.clip(val.real / (2 * math.sqrt(c)), -1.0, 1.0)))
    return SumValue(val, brute_error(c), "brute", meta)


def kloosterman_angle(a: int, p: int) -> float:
    return kloosterman(a, a, p, want_angle=True).meta["angle"]


def kloosterman_matrix(c: int) -> np.ndarray:
    """Complex S(m, n; c) for all m, n mod c, straight from the definition."""
    d, dbar = units_and_inverses(c)
    e = additive_table(c)
    x = np.arange(c)
    left = e[np.outer(x, d) % c]
    right = e[np.outer(dbar, x) % c]
    return left @ right


class KloostermanTable:
    """S(1, t; c) for every t mod c, from one pass over the units.

    S(a, t; c) = S(1, a t; c) when (a, c) = 1; other rows are summed directly
    and cached.
    """

    def __init__(self, c: int):
        check_budget("kloosterman_c", c, f"Kloosterman table mod {c}")
        self.c = c
        d, dbar = units_and_inverses(c)
        e = additive_table(c)
        base = np.empty(c)
        imag = 0.0
        chunk = max(1, 2_000_000 // max(len(d), 1))
        t_all = np.arange(c)
        for s in range(0, c, chunk):
            t = t_all[s : s + chunk]
            vals = e[(d[None, :] + np.outer(t, dbar)) % c].sum(axis=1)
            base[s : s + chunk] = vals.real
            imag = max(imag, float(np.max(np.abs(vals.imag))) if len(vals) else 0.0)
        self.base = base
        self.max_imag = imag
        self._rows: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    def __call__(self, m: int, n: int) -> float:
        c = self.c
        m %= c
        n %= c
        if math.gcd(m, c) == 1:
            return float(self.base[(m * n) % c])
        if math.gcd(n, c) == 1:
            return float(self.base[(m * n) % c])
        return float(self.row(m)[n])

    def row(self, a: int) -> np.ndarray:
        """S(a, t; c) for t = 0..c-1."""
        c = self.c
        a %= c
        if math.gcd(a, c) == 1:
            return self.base[(a * np.arange(c)) % c]
        with self._lock:
            r = self._rows.get(a)
            if r is None:
                d, dbar = units_and_inverses(c)
                e = additive_table(c)
                r = e[(a * d[None, :] + np.outer(np.arange(c), dbar)) % c].sum(axis=1).real
                self._rows[a] = r
            return r

    def full(self) -> np.ndarray:
        """Real c x c matrix of S(a, t; c)."""
        return np.stack([self.row(a) for a in range(self.c)])


_TABLES: dict[int, KloostermanTable] = {}
_TABLES_LOCK = threading.Lock()


def kloosterman_table(c: int) -> KloostermanTable:
    """Memoized KloostermanTable; built once per modulus."""
    t = _TABLES.get(c)
    if t is not None:
        return t
    with _TABLES_LOCK:
        t = _TABLES.get(c)
        if t is None:
            t = KloostermanTable(c)
            _TABLES[c] = t
    return t


def clear_tables() -> None:
    with _TABLES_LOCK:
        _TABLES.clear()
