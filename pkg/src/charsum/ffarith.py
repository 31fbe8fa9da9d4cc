"""Modular and finite-field arithmetic.

Residues, Jacobi symbols, Dirichlet characters on squarefree moduli and an
explicit polynomial-basis model of F_{p^m} with its norm map down to F_p.

Character values are carried as exact root-of-unity indices: ``index(x) == k``
means the value e^{2 pi i k / order}; ``None`` marks a non-unit (value 0).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .config import check_budget


class InvalidModulusError(ValueError):
    pass


class NotInvertibleError(ValueError):
    pass


class UnsupportedModulusError(ValueError):
    pass


# ---------------------------------------------------------------------------
# integers


@lru_cache(maxsize=4096)
def _factor(n: int) -> tuple[tuple[int, int], ...]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization of ``n >= 1`` as ascending ``(prime, exponent)`` pairs."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    return list(_factor(n))


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = _factor(n)
    return len(f) == 1 and f[0][1] == 1


def euler_phi(n: int) -> int:
    out = n
    for p, _ in _factor(n):
        out = out // p * (p - 1)
    return out


def mobius(n: int) -> int:
    f = _factor(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def divisor_count(n: int) -> int:
    return math.prod(e + 1 for _, e in _factor(n))


def divisors(n: int) -> list[int]:
    out = [1]
    for p, e in _factor(n):
        out = [d * p**i for d in out for i in range(e + 1)]
    return sorted(out)


def is_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in _factor(n))


@dataclass(frozen=True)
class Modulus:
    q: int
    factorization: tuple[tuple[int, int], ...]

    @classmethod
    def of(cls, q: "int | Modulus") -> "Modulus":
        if isinstance(q, Modulus):
            return q
        if q < 1:
            raise InvalidModulusError(f"modulus must be positive, got {q}")
        return cls(q, _factor(q))

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factorization)

    @property
    def is_squarefree(self) -> bool:
        return all(e == 1 for _, e in self.factorization)

    @property
    def is_odd(self) -> bool:
        return self.q % 2 == 1


def jacobi_symbol(n: int, q: int) -> int:
    """Jacobi symbol (n/q) for odd positive q."""
    if q <= 0 or q % 2 == 0:
        raise InvalidModulusError(f"Jacobi symbol needs odd positive modulus, got {q}")
    n %= q
    result = 1
    while n:
        while n % 2 == 0:
            n //= 2
            if q % 8 in (3, 5):
                result = -result
        n, q = q, n
        if n % 4 == 3 and q % 4 == 3:
            result = -result
        n %= q
    return result if q == 1 else 0


def mod_inverse(a: int, c: int) -> int:
    """Return x in [0, c) with a*x = 1 (mod c)."""
    if c < 1:
        raise InvalidModulusError(f"modulus must be positive, got {c}")
    if c == 1:
        return 0
    if math.gcd(a, c) != 1:
        raise NotInvertibleError(f"{a} is not invertible mod {c}")
    return pow(a, -1, c)


@lru_cache(maxsize=1024)
def primitive_root(p: int) -> int:
    """Smallest positive primitive root of the prime p."""
    if not is_prime(p):
        raise InvalidModulusError(f"{p} is not prime")
    if p == 2:
        return 1
    rs = [r for r, _ in _factor(p - 1)]
    for g in range(2, p):
        if all(pow(g, (p - 1) // r, p) != 1 for r in rs):
            return g
    raise AssertionError("unreachable")


@lru_cache(maxsize=1024)
def _dlog_table(p: int) -> np.ndarray:
    """dlog[x] relative to primitive_root(p); dlog[0] = -1."""
    g = primitive_root(p)
    table = np.full(p, -1, dtype=np.int64)
    x = 1
    for j in range(p - 1):
        table[x] = j
        x = x * g % p
    table.flags.writeable = False
    return table


def discrete_log(x: int, p: int) -> int:
    j = int(_dlog_table(p)[x % p])
    if j < 0:
        raise NotInvertibleError(f"0 has no discrete log mod {p}")
    return j


# ---------------------------------------------------------------------------
# Dirichlet characters on squarefree moduli


@dataclass(frozen=True)
class MultChar:
    """Character mod squarefree q, the CRT product of per-prime characters.

    The factor at prime p sends the smallest primitive root r_p to
    e^{2 pi i e_p / (p-1)} where e_p is the stored exponent.
    """

    q: int
    primes: tuple[int, ...]
    exponents: tuple[int, ...]

    @property
    def modulus(self) -> Modulus:
        return Modulus.of(self.q)

    @cached_property
    def order(self) -> int:
        o = 1
        for p, e in zip(self.primes, self.exponents):
            o = math.lcm(o, (p - 1) // math.gcd(e, p - 1))
        return o

    @property
    def is_principal(self) -> bool:
        return all(e == 0 for e in self.exponents)

    @property
    def is_real(self) -> bool:
        return self.order <= 2

    @property
    def kind(self) -> str:
        if self.is_principal:
            return "principal"
        if self.q % 2 == 1 and all(2 * e == p - 1 for p, e in zip(self.primes, self.exponents)):
            return "jacobi_real"
        return "general"

    @property
    def parity(self) -> int:
        return 1 if self.index(-1) == 0 else -1

    def index(self, n: int) -> int | None:
        """k with chi(n) = e^{2 pi i k/order}, or None if (n, q) > 1."""
        acc = Fraction(0)
        for p, e in zip(self.primes, self.exponents):
            j = int(_dlog_table(p)[n % p])
            if j < 0:
                return None
            acc += Fraction(e * j, p - 1)
        acc -= math.floor(acc)
        k = acc * self.order
        assert k.denominator == 1
        return int(k)

    def __call__(self, n: int) -> complex:
        k = self.index(n)
        if k is None:
            return 0j
        return _root_of_unity(k, self.order)

    @cached_property
    def indices(self) -> np.ndarray:
        """Index table over residues 0..q-1; -1 marks non-units."""
        idx = np.zeros(self.q, dtype=np.int64)
        unit = np.ones(self.q, dtype=bool)
        x = np.arange(self.q)
        for p, e in zip(self.primes, self.exponents):
            d = _dlog_table(p)[x % p]
            unit &= d >= 0
            # e*d/(p-1) scaled to the common denominator `order`
            o_p = (p - 1) // math.gcd(e, p - 1)
            idx += (e // math.gcd(e, p - 1)) * np.where(d >= 0, d, 0) * (self.order // o_p)
        idx %= self.order
        idx[~unit] = -1
        idx.flags.writeable = False
        return idx

    @cached_property
    def values(self) -> np.ndarray:
        """Complex value table over residues 0..q-1."""
        idx = self.indices
        vals = np.where(idx >= 0, _roots_of_unity(self.order)[np.maximum(idx, 0)], 0)
        vals = vals.astype(complex)
        vals.flags.writeable = False
        return vals

    def conj(self) -> "MultChar":
        return MultChar(self.q, self.primes, tuple((-e) % (p - 1) for p, e in zip(self.primes, self.exponents)))

    def __mul__(self, other: "MultChar") -> "MultChar":
        if other.q != self.q:
            raise InvalidModulusError("characters have different moduli")
        return MultChar(self.q, self.primes, tuple((a + b) % (p - 1) for p, a, b in zip(self.primes, self.exponents, other.exponents)))

    def __pow__(self, n: int) -> "MultChar":
        return MultChar(self.q, self.primes, tuple((e * n) % (p - 1) for p, e in zip(self.primes, self.exponents)))

    def restrict(self, d: int) -> "MultChar":
        """The component of this character on the primes dividing d."""
        keep = [(p, e) for p, e in zip(self.primes, self.exponents) if d % p == 0]
        return MultChar(math.prod(p for p, _ in keep), tuple(p for p, _ in keep), tuple(e for _, e in keep))

    def __repr__(self) -> str:
        return f"MultChar(q={self.q}, exponents={self.exponents}, order={self.order})"


def _root_of_unity(k: int, n: int) -> complex:
    return complex(_roots_of_unity(n)[k % n])


@lru_cache(maxsize=512)
def _roots_of_unity(n: int) -> np.ndarray:
    r = np.exp(2j * np.pi * np.arange(n) / n)
    # exact values where they are representable
    for k in range(n):
        f = Fraction(k, n)
        if f.denominator in (1, 2, 4):
            r[k] = {Fraction(0): 1, Fraction(1, 4): 1j, Fraction(1, 2): -1, Fraction(3, 4): -1j}[f]
    r.flags.writeable = False
    return r


def _squarefree_modulus(q: "int | Modulus") -> Modulus:
    mod = Modulus.of(q)
    if not mod.is_squarefree:
        raise UnsupportedModulusError(f"modulus {mod.q} is not squarefree")
    return mod


def enumerate_characters(q: "int | Modulus") -> list[MultChar]:
    """All phi(q) characters mod squarefree q, lexicographic in per-prime exponents."""
    mod = _squarefree_modulus(q)
    primes = mod.primes
    ranges = [range(p - 1) for p in primes]
    return [MultChar(mod.q, primes, tuple(es)) for es in itertools.product(*ranges)]


def principal_character(q: int) -> MultChar:
    mod = _squarefree_modulus(q)
    return MultChar(mod.q, mod.primes, tuple(0 for _ in mod.primes))


def jacobi_character(q: int) -> MultChar:
    """The real character n -> (n/q) for odd squarefree q."""
    mod = _squarefree_modulus(q)
    if not mod.is_odd:
        raise UnsupportedModulusError(f"Jacobi character needs odd modulus, got {q}")
    return MultChar(mod.q, mod.primes, tuple((p - 1) // 2 for p in mod.primes))


@lru_cache(maxsize=256)
def jacobi_table(q: int) -> np.ndarray:
    """(x/q) for x = 0..q-1 as int8."""
    if q == 1:
        return np.ones(1, dtype=np.int8)
    t = np.array([jacobi_symbol(x, q) for x in range(q)], dtype=np.int8)
    t.flags.writeable = False
    return t


# ---------------------------------------------------------------------------
# polynomials over F_p (coefficient lists, lowest degree first)


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: list[int], f: list[int], p: int) -> list[int]:
    a = [x % p for x in a]
    _trim(a)
    df = len(f) - 1
    inv_lead = pow(f[-1], -1, p)
    while len(a) - 1 >= df:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - df
        for i, fi in enumerate(f):
            a[shift + i] = (a[shift + i] - c * fi) % p
        _trim(a)
    return a


def _pmulmod(a: list[int], b: list[int], f: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _pmod(out, f, p)


def _ppowmod(a: list[int], n: int, f: list[int], p: int) -> list[int]:
    result = [1]
    base = _pmod(a, f, p)
    while n:
        if n & 1:
            result = _pmulmod(result, base, f, p)
        base = _pmulmod(base, base, f, p)
        n >>= 1
    return result


def _pgcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _trim([x % p for x in a]), _trim([x % p for x in b])
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def is_irreducible(f: list[int], p: int) -> bool:
    """f (monic, degree m) is irreducible iff gcd(f, x^{p^i} - x) = 1 for i <= m/2."""
    m = len(f) - 1
    if m <= 0:
        return False
    if m == 1:
        return True
    xp = [0, 1]
    for _ in range(m // 2):
        xp = _ppowmod(xp, p, f, p)
        diff = list(xp) + [0] * max(0, 2 - len(xp))
        diff[1] = (diff[1] - 1) % p
        if len(_pgcd(f, diff, p)) > 1:
            return False
    return True


def smallest_irreducible(p: int, m: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree m over F_p.

    Candidates are ordered by (c_{m-1}, ..., c_0); returned lowest degree first.
    """
    for t in range(p**m):
        low = [(t // p**i) % p for i in range(m)]
        f = low + [1]
        if is_irreducible(f, p):
            return tuple(f)
    raise AssertionError("no irreducible polynomial found")


# ---------------------------------------------------------------------------
# extension fields


@dataclass(frozen=True)
class ExtField:
    """F_{p^m} = F_p[x]/(f). Element a_0 + a_1 x + ... is encoded as sum a_i p^i."""

    p: int
    m: int
    modulus_poly: tuple[int, ...]
    generator: int

    @property
    def size(self) -> int:
        return self.p**self.m

    def to_coeffs(self, a: int) -> list[int]:
        return [(a // self.p**i) % self.p for i in range(self.m)]

    def from_coeffs(self, c) -> int:
        return sum((int(x) % self.p) * self.p**i for i, x in enumerate(c))

    @cached_property
    def digits(self) -> np.ndarray:
        """(size, m) coefficient table."""
        a = np.arange(self.size, dtype=np.int64)
        d = np.stack([(a // self.p**i) % self.p for i in range(self.m)], axis=1)
        d.flags.writeable = False
        return d

    @cached_property
    def _weights(self) -> np.ndarray:
        return self.p ** np.arange(self.m, dtype=np.int64)

    @cached_property
    def exp_table(self) -> np.ndarray:
        """exp_table[j] = generator**j for j in [0, size-1)."""
        return _power_table(self.p, self.m, self.modulus_poly, self.generator)

    @cached_property
    def log_table(self) -> np.ndarray:
        """log_table[a] = j with generator**j = a; -1 at 0."""
        log = np.full(self.size, -1, dtype=np.int64)
        log[self.exp_table] = np.arange(self.size - 1)
        log.flags.writeable = False
        return log

    # scalar ops
    def add(self, a: int, b: int) -> int:
        return self.from_coeffs([x + y for x, y in zip(self.to_coeffs(a), self.to_coeffs(b))])

    def neg(self, a: int) -> int:
        return self.from_coeffs([-x for x in self.to_coeffs(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp_table[(self.log_table[a] + self.log_table[b]) % (self.size - 1)])

    def pow(self, a: int, n: int) -> int:
        if a == 0:
            return 0 if n > 0 else 1
        return int(self.exp_table[(self.log_table[a] * n) % (self.size - 1)])

    def inv(self, a: int) -> int:
        if a == 0:
            raise NotInvertibleError("0 is not invertible")
        return self.pow(a, -1)

    def embed(self, a: int) -> int:
        """The element of F_p inside F_{p^m}."""
        return a % self.p

    # vectorized ops on encoded arrays
    def add_arr(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        d = (self.digits[a] + self.digits[b]) % self.p
        return d @ self._weights

    def neg_arr(self, a: np.ndarray) -> np.ndarray:
        return ((-self.digits[a]) % self.p) @ self._weights

    def add_const(self, a: np.ndarray, c: int) -> np.ndarray:
        """a + c for c in F_p (only the constant coefficient moves)."""
        a = np.asarray(a)
        d0 = a % self.p
        return a - d0 + (d0 + c) % self.p

    def mul_arr(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        la, lb = self.log_table[a], self.log_table[b]
        out = self.exp_table[(la + lb) % (self.size - 1)]
        return np.where((la < 0) | (lb < 0), 0, out)

    @cached_property
    def norm_table(self) -> np.ndarray:
        """N(a) = a^{(p^m-1)/(p-1)} as an integer mod p, for every element."""
        e = (self.size - 1) // (self.p - 1)
        log = self.log_table
        out = self.exp_table[(np.maximum(log, 0) * e) % (self.size - 1)]
        out = np.where(log < 0, 0, out)
        assert np.all(out < self.p), "norm left the prime field"
        out.flags.writeable = False
        return out

    def norm(self, a: int) -> int:
        return int(self.norm_table[a])

    def character(self, j: int) -> "FieldChar":
        return FieldChar(self, j % (self.size - 1))

    def characters(self) -> list["FieldChar"]:
        """All characters of F_q^*, sending the generator to e(j/(q-1)), j ascending."""
        return [FieldChar(self, j) for j in range(self.size - 1)]

    def lift_character(self, chi: MultChar) -> "FieldChar":
        """chi composed with the norm, as a character of F_{p^m}^*."""
        if chi.q != self.p:
            raise InvalidModulusError(f"character mod {chi.q} cannot lift to F_{self.p}^{self.m}")
        e = chi.exponents[0] if chi.exponents else 0
        t = discrete_log(self.norm(self.generator), self.p) if self.p > 2 else 0
        j = e * t * ((self.size - 1) // (self.p - 1))
        return FieldChar(self, j % (self.size - 1))

    def quadratic_character(self) -> "FieldChar":
        if self.p == 2:
            raise UnsupportedModulusError("no quadratic character in characteristic 2")
        return FieldChar(self, (self.size - 1) // 2)


def _power_table(p: int, m: int, f: tuple[int, ...], g: int) -> np.ndarray:
    """Powers g^0 .. g^{q-2} as encoded ints, in blocks via multiplication matrices."""
    q = p**m
    n = q - 1
    f = list(f)

    def mult_matrix(c: list[int]) -> np.ndarray:
        # column i is c * x^i reduced mod f
        cols = []
        for i in range(m):
            v = _pmulmod(c, [0] * i + [1], f, p)
            cols.append(v + [0] * (m - len(v)))
        return np.array(cols, dtype=np.int64).T

    gc = [(g // p**i) % p for i in range(m)]
    B = max(1, math.isqrt(n))
    block = np.zeros((B, m), dtype=np.int64)
    cur = [1] + [0] * (m - 1)
    for j in range(B):
        block[j] = cur
        cur = _pmulmod(cur, gc, f, p)
        cur = cur + [0] * (m - len(cur))
    step = mult_matrix(_ppowmod(gc, B, f, p))
    weights = p ** np.arange(m, dtype=np.int64)
    out = np.empty(((n + B - 1) // B) * B, dtype=np.int64)
    for s in range(0, n, B):
        out[s : s + B] = block @ weights
        block = (block @ step.T) % p
    out = out[:n]
    out.flags.writeable = False
    return out


@lru_cache(maxsize=64)
def build_ext_field(p: int, m: int) -> ExtField:
    if not is_prime(p):
        raise InvalidModulusError(f"{p} is not prime")
    if m < 1:
        raise InvalidModulusError(f"degree must be >= 1, got {m}")
    check_budget("ext_field", p**m, f"F_{p}^{m}")
    f = smallest_irreducible(p, m)
    q = p**m
    rs = [r for r, _ in _factor(q - 1)] if q > 2 else []
    fl = list(f)
    gen = None
    for a in range(1, q):
        c = [(a // p**i) % p for i in range(m)]
        if all(_ppowmod(c, (q - 1) // r, fl, p) != [1] for r in rs):
            gen = a
            break
    assert gen is not None
    field = ExtField(p, m, f, gen)
    assert len(np.unique(field.exp_table)) == q - 1, "generator is not primitive"
    return field


@dataclass(frozen=True)
class FieldChar:
    """Character of F_q^* with generator -> e(j/(q-1)); value 0 at 0."""

    field: ExtField
    j: int

    @property
    def q(self) -> int:
        return self.field.size

    @cached_property
    def order(self) -> int:
        n = self.field.size - 1
        return n // math.gcd(self.j, n)

    @property
    def is_principal(self) -> bool:
        return self.j == 0

    @property
    def is_real(self) -> bool:
        return self.order <= 2

    @property
    def kind(self) -> str:
        if self.is_principal:
            return "principal"
        return "quadratic" if self.order == 2 else "general"

    @property
    def parity(self) -> int:
        return 1 if self.index(self.field.neg(1)) == 0 else -1

    def index(self, a: int) -> int | None:
        log = int(self.field.log_table[a])
        if log < 0:
            return None
        n = self.field.size - 1
        return (self.j * log // (n // self.order)) % self.order

    def __call__(self, a: int) -> complex:
        k = self.index(a)
        return 0j if k is None else _root_of_unity(k, self.order)

    @cached_property
    def indices(self) -> np.ndarray:
        n = self.field.size - 1
        log = self.field.log_table
        idx = (self.j * np.maximum(log, 0) // (n // self.order)) % self.order
        idx = np.where(log < 0, -1, idx)
        idx.flags.writeable = False
        return idx

    @cached_property
    def values(self) -> np.ndarray:
        idx = self.indices
        vals = np.where(idx >= 0, _roots_of_unity(self.order)[np.maximum(idx, 0)], 0).astype(complex)
        vals.flags.writeable = False
        return vals

    def conj(self) -> "FieldChar":
        return FieldChar(self.field, (-self.j) % (self.field.size - 1))

    def __repr__(self) -> str:
        return f"FieldChar(F_{self.field.p}^{self.field.m}, j={self.j}, order={self.order})"
