"""Hybrid sums over extension fields and recovery of their L-function.

For a fixed character psi mod p, the values g_m = g(chi_m, psi_m) over
F_{p^m} satisfy a linear recurrence whose characteristic roots are the
reciprocal roots of L(T).  We fit that recurrence numerically and read off
the weights 2 log|root| / log p.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .classical import SumValue, brute_error
from .config import budget, check_budget
from .ffarith import (
    ExtField,
    FieldChar,
    InvalidModulusError,
    MultChar,
    UnsupportedModulusError,
    build_ext_field,
    enumerate_characters,
    is_prime,
)
from .twisted import IdentityReport, g_field

D_MAX = 4
FIT_THRESHOLD = 1e-3
WEIGHT_FLAG = 2.1


@dataclass
class LSeriesFit:
    p: int
    psi_index: int | None
    sequence: list[complex]
    recurrence_order: int
    reciprocal_roots: list[complex]
    signs: list[int]
    weights: list[float]
    residual: float
    in_sample_residual: float
    threshold: float
    passed: bool
    zero_roots: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sequence"] = [[float(z.real), float(z.imag)] for z in self.sequence]
        d["reciprocal_roots"] = [[float(z.real), float(z.imag)] for z in self.reciprocal_roots]
        d["weights"] = [float(w) for w in self.weights]
        d["pass"] = d.pop("passed")
        return d


# ---------------------------------------------------------------------------
# g over F_{p^m}


@lru_cache(maxsize=16)
def _correlation(p: int, m: int) -> np.ndarray:
    """B[w] = chi(w) sum_u chi(u(u+1)) chi(u+w), chi quadratic on F_{p^m}.

    Then g(chi, psi) = sum_w B[w] psi(w - 1).  The inner sum is an additive
    convolution on (Z/p)^m, done with an m-dimensional FFT and rounded back
    to the integers it must be.
    """
    F = build_ext_field(p, m)
    eta = F.quadratic_character().values.real
    el = np.arange(F.size)
    f = eta * eta[F.add_const(el, 1)]
    f_rev = f[F.neg_arr(el)]
    shape = (p,) * m
    # element index = sum a_i p^i, so digit i is axis m-1-i in C order; the
    # convolution does not care which axis is which
    A = np.fft.ifftn(np.fft.fftn(f_rev.reshape(shape)) * np.fft.fftn(eta.reshape(shape))).real.reshape(-1)
    B = eta * np.rint(A)
    B.flags.writeable = False
    return B


def _psi_values(psi: FieldChar, trivial_is_one: bool) -> np.ndarray:
    if trivial_is_one and psi.is_principal:
        return np.ones(psi.field.size, dtype=complex)
    return psi.values


def g_field_fast(psi: FieldChar, *, trivial_is_one: bool = True) -> SumValue:
    """g(chi_m, psi) with chi_m quadratic and psi any character of F_q^*."""
    F = psi.field
    check_budget("ext_field", F.size, f"F_{F.p}^{F.m}")
    B = _correlation(F.p, F.m)
    el = np.arange(F.size)
    val = complex(np.sum(B * _psi_values(psi, trivial_is_one)[F.add_const(el, -1)]))
    return SumValue(val, brute_error(F.size, F.size), "brute", {"q": F.size, "route": "fft"})


def g_extension(p: int, m: int, psi: MultChar, *, method: str = "fft", trivial_is_one: bool = True) -> SumValue:
    """g(chi_m, psi_m) over F_{p^m}, both characters lifted through the norm."""
    if not is_prime(p) or p == 2:
        raise UnsupportedModulusError(f"p must be an odd prime, got {p}")
    if psi.q != p:
        raise InvalidModulusError(f"psi has modulus {psi.q}, expected {p}")
    if m < 1:
        raise ValueError(f"degree must be >= 1, got {m}")
    check_budget("ext_field", p**m, f"F_{p}^{m}")
    F = build_ext_field(p, m)
    psi_m = F.lift_character(psi)
    if method == "fft":
        return g_field_fast(psi_m, trivial_is_one=trivial_is_one)
    if method == "brute":
        return g_field(F.quadratic_character(), psi_m, trivial_is_one=trivial_is_one)
    raise ValueError(f"unknown method {method!r}")


def g_sequence(p: int, psi: MultChar, M: int, **kw) -> list[complex]:
    return [g_extension(p, m, psi, **kw).value for m in range(1, M + 1)]


# ---------------------------------------------------------------------------
# recurrence fitting


def _fit_order(seq: np.ndarray, d: int):
    """Least-squares recurrence of order d on seq[:-1], predicting seq[-1]."""
    n = len(seq) - 1
    rows = np.array([seq[i : i + d][::-1] for i in range(n - d)])
    rhs = seq[d:n]
    coef, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    in_res = float(np.max(np.abs(rows @ coef - rhs))) if len(rhs) else 0.0
    pred = np.dot(coef, seq[n - d : n][::-1])
    return coef, in_res, float(abs(pred - seq[-1]))


def fit_lfunction(sequence, p: int, D_max: int = D_MAX, psi_index: int | None = None,
                  threshold: float = FIT_THRESHOLD) -> LSeriesFit:
    """Smallest-order recurrence that fits g_1..g_M.

    An order is accepted when both the in-sample and the held-out (last
    term) residuals are below ``threshold * max|g_m|``.  If none qualifies,
    the fit with the smallest held-out residual is returned with
    ``passed = False``.
    """
    seq = np.asarray(sequence, dtype=complex)
    M = len(seq)
    if M < 3:
        raise ValueError(f"need at least 3 terms, got {M}")
    scale = float(np.max(np.abs(seq)))
    tol = threshold * max(scale, 1e-300)
    d_cap = min(D_max, (M - 1) // 2)
    best = None
    chosen = None
    if scale == 0.0:
        chosen = (0, np.zeros(0, dtype=complex), 0.0, 0.0)
    else:
        for d in range(1, d_cap + 1):
            coef, in_res, held = _fit_order(seq, d)
            cand = (d, coef, in_res, held)
            if best is None or held < best[3]:
                best = cand
            if in_res <= tol and held <= tol:
                chosen = cand
                break
    passed = chosen is not None
    d, coef, in_res, held = chosen if passed else best

    roots = np.roots(np.concatenate([[1.0], -coef])) if d else np.zeros(0, dtype=complex)
    zero_mask = np.abs(roots) < 1e-9
    roots = roots[~zero_mask]
    signs: list[int] = []
    if len(roots):
        V = np.array([[r**k for r in roots] for k in range(1, M + 1)])
        amp, *_ = np.linalg.lstsq(V, seq, rcond=None)
        signs = [int(np.sign(round(a.real))) if abs(a.real) >= 0.5 else 0 for a in amp]
    weights = [2 * math.log(abs(r)) / math.log(p) for r in roots]
    order = sorted(range(len(roots)), key=lambda i: (-weights[i], roots[i].real, roots[i].imag))
    return LSeriesFit(
        p=p,
        psi_index=psi_index,
        sequence=[complex(z) for z in seq],
        recurrence_order=d,
        reciprocal_roots=[complex(roots[i]) for i in order],
        signs=[signs[i] for i in order],
        weights=[weights[i] for i in order],
        residual=held,
        in_sample_residual=in_res,
        threshold=tol,
        passed=passed,
        zero_roots=int(zero_mask.sum()),
    )


def default_terms(p: int) -> int:
    """Largest M with p^M inside the default extension-field budget, capped at 9."""
    cap = budget("ext_field")
    M = 1
    while M < 9 and p ** (M + 1) <= cap:
        M += 1
    return M


def lfit(p: int, psi_index: int, M: int, D_max: int = D_MAX) -> LSeriesFit:
    chars = enumerate_characters(p)
    if not 0 <= psi_index < len(chars):
        raise InvalidModulusError(f"psi index {psi_index} out of range 0..{len(chars) - 1}")
    seq = g_sequence(p, chars[psi_index], M)
    return fit_lfunction(seq, p, D_max, psi_index)


def weight_audit(p: int, M: int | None = None, D_max: int = D_MAX) -> list[dict]:
    """Fit L(T) for every psi mod p and flag weights above 2.1."""
    M = default_terms(p) if M is None else M
    rows = []
    for i, psi in enumerate(enumerate_characters(p)):
        fit = lfit(p, i, M, D_max)
        rows.append({
            "psi_index": i,
            "kind": psi.kind,
            "is_chi": psi.kind == "jacobi_real",
            "flagged": any(w > WEIGHT_FLAG for w in fit.weights),
            "max_root_ratio": max((math.log(abs(r)) / math.log(p) for r in fit.reciprocal_roots), default=0.0),
            "fit": fit,
        })
    return rows


def extension_second_moment(p: int, m: int) -> IdentityReport:
    """Mean of |g(chi_m, psi)|^2 over every character psi of F_q^*, compared with q^2 - 2q - 2."""
    F: ExtField = build_ext_field(p, m)
    q = F.size
    vals = [g_field_fast(psi, trivial_is_one=False).value for psi in F.characters()]
    mean_sq = float(sum(abs(v) ** 2 for v in vals) / (q - 1))
    stated = q * q - 2 * q - 2
    dev = abs(mean_sq - stated)
    return IdentityReport("second moment over all characters of F_q", mean_sq, stated, dev, 1e-4 * stated, dev <= 1e-4 * stated,
                          {"p": p, "m": m, "q": q, "psi_zero_convention": "psi(0)=0", "corrected_rhs": stated - 1})
