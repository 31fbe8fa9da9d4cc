"""Verification suites behind ``charsum verify``.

A suite is an ordered list of tasks; each task returns a list of
IdentityReport dicts.  Tasks may run in worker processes but results are
always collected in task order, so the report does not depend on the number
of workers.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import analytic, classical, lfunction, twisted
from .config import all_budgets, reset_budgets, set_budget
from .ffarith import enumerate_characters, is_prime, is_squarefree, jacobi_character
from .twisted import IdentityReport, compare

SCHEMA_VERSION = 1
SCOPES = ("classical", "paper", "extension", "analytic")

G_CASES = ((5, 1), (5, 2), (15, 1), (15, 3), (21, 1), (5, 5), (33, 1))
ODD_PRIMES_101 = [p for p in range(3, 102) if is_prime(p)]


def _dicts(reports) -> list[dict]:
    return [r.to_dict() for r in reports]


# ---------------------------------------------------------------------------
# classical


def t_kloosterman_reality(c_max: int = 100) -> list[dict]:
    worst = (0.0, 1)
    for c in range(1, c_max + 1):
        im = float(np.max(np.abs(classical.kloosterman_matrix(c).imag)))
        if im > worst[0]:
            worst = (im, c)
    return _dicts([IdentityReport("Kloosterman sums are real", worst[0], 0.0, worst[0], 1e-9, worst[0] <= 1e-9,
                                  {"c_max": c_max, "worst_c": worst[1]})])


def t_weil(c_max: int = 300, per_c: int = 200, seed: int = 0) -> list[dict]:
    """Weil bound on sampled (m, n) for every c <= c_max, read through the memoized tables."""
    worst_ratio = 0.0
    first_fail = None
    for c in range(1, c_max + 1):
        rng = np.random.default_rng([seed, c])
        tab = classical.kloosterman_table(c)
        for m, n in rng.integers(0, c, size=(per_c, 2)):
            s = tab(int(m), int(n))
            b = classical.weil_bound(int(m), int(n), c)
            ratio = abs(s) / b
            worst_ratio = max(worst_ratio, ratio)
            if first_fail is None and abs(s) > b * (1 + 1e-9):
                first_fail = {"m": int(m), "n": int(n), "c": c, "S": s, "bound": b}
    params = {"c_max": c_max, "samples_per_c": per_c, "max_ratio": worst_ratio}
    if first_fail:
        params["first_failure"] = first_fail
        return _dicts([IdentityReport("Weil bound", first_fail["S"], first_fail["bound"],
                                      abs(first_fail["S"]) - first_fail["bound"], 0.0, False, params)])
    return _dicts([IdentityReport("Weil bound", worst_ratio, 1.0, 0.0, 0.0, True, params)])


def t_table_vs_direct(cs=(1, 2, 9, 15, 28, 45, 60)) -> list[dict]:
    out = []
    for c in cs:
        tab = classical.kloosterman_table(c)
        direct = classical.kloosterman_matrix(c).real
        dev = float(np.max(np.abs(tab.full() - direct)))
        out.append(IdentityReport("Kloosterman table matches direct sum", dev, 0.0, dev, 1e-9, dev <= 1e-9, {"c": c}))
    return _dicts(out)


def t_gauss_ramanujan(q_max: int = 101) -> list[dict]:
    worst_g = (0.0, 1)
    for q in range(3, q_max + 1, 2):
        if not is_squarefree(q):
            continue
        chi = jacobi_character(q)
        tau = classical.gauss_sum(chi).value
        d = abs(tau * tau - chi(-1) * q)
        worst_g = max(worst_g, (d, q))
    worst_r = (0.0, (0, 1))
    for q in range(1, q_max + 1):
        for m in range(0, 2 * q):
            d = abs(classical.ramanujan_sum(m, q).value - classical.ramanujan_sum(m, q, "closed_form").value)
            worst_r = max(worst_r, (d, (m, q)))
    return _dicts([
        IdentityReport("tau(chi)^2 = chi(-1) q", worst_g[0], 0.0, worst_g[0], 1e-8, worst_g[0] <= 1e-8, {"q_max": q_max, "worst_q": worst_g[1]}),
        IdentityReport("Ramanujan sum divisor formula", worst_r[0], 0.0, worst_r[0], 1e-8, worst_r[0] <= 1e-8,
                       {"q_max": q_max, "worst": list(worst_r[1])}),
    ])


# ---------------------------------------------------------------------------
# twisted sums


def t_G_oracle(q: int, r: int, sample: int = 500, seed: int = 0) -> list[dict]:
    c = q * r
    tol = 1e-6 * q**3 * r**2
    if c <= 35:
        grid = twisted.G_grid(q, r)
        triples = itertools.product(range(c), repeat=3)
        brute = lambda t: grid[t]
        n = c**3
    else:
        rng = np.random.default_rng([seed, q, r])
        triples = [tuple(int(x) for x in t) for t in rng.integers(0, c, size=(sample, 3))]
        brute = lambda t: twisted.G_brute(*t, q, r).value
        n = sample
    worst = (-1.0, None, 0j, 0j)
    for t in triples:
        lhs = twisted.G_from_closed(*t, q, r)
        rhs = brute(t)
        d = abs(lhs - rhs)
        if d > worst[0]:
            worst = (d, t, lhs, rhs)
    return _dicts([IdentityReport("closed form G vs brute force", worst[2], worst[3], worst[0], tol, worst[0] <= tol,
                                  {"q": q, "r": r, "c": c, "triples": n, "worst": list(worst[1]),
                                   "unit_convention": twisted.G_UNIT_CONVENTION})])


def t_G_spot() -> list[dict]:
    q = 15
    chi = jacobi_character(q)
    expected = chi(-1) * q * 8**2
    closed = twisted.G_closed(0, 0, 0, q).value
    brute = twisted.G_brute(0, 0, 0, q).value
    return _dicts([
        compare("G'(0,0,0;15) closed form", closed, expected, 1e-8, q=q),
        compare("G(0,0,0;15) brute force", brute, expected, 1e-6 * q**3, q=q),
    ])


def t_Hr_symmetry(q: int = 15, r: int = 1) -> list[dict]:
    worst = (0.0, (0, 0, 0))
    for m, a, b in itertools.product(range(q), repeat=3):
        if a < b:
            d = abs(twisted.H_r_sum(m, a, b, q, r).value - twisted.H_r_sum(m, b, a, q, r).value)
            worst = max(worst, (d, (m, a, b)))
    return _dicts([IdentityReport("H_r symmetric in m1, m2", worst[0], 0.0, worst[0], 1e-8, worst[0] <= 1e-8,
                                  {"q": q, "r": r, "worst": list(worst[1])})])


def t_multiplicativity(q1: int, q2: int) -> list[dict]:
    return _dicts(twisted.multiplicativity_check(q1, q2))


def t_hstar(q: int) -> list[dict]:
    worst = (0.0, 1, 0j, 0j)
    for w in range(1, q):
        lhs = twisted.hstar_spectral(w, q).value
        rhs = twisted.H_sum(w, q, reduced=True).value
        d = abs(lhs - rhs)
        if d >= worst[0]:
            worst = (d, w, lhs, rhs)
    return _dicts([IdentityReport("H* spectral expansion", worst[2], worst[3], worst[0], 1e-8, worst[0] <= 1e-8,
                                  {"q": q, "worst_w": worst[1]})])


def t_second_moment(p: int, m: int) -> list[dict]:
    out = twisted.second_moment(p, m)
    q = p**m
    out[0].identity = f"second moment q={q}: {out[0].lhs:g} = {out[0].rhs}"
    return _dicts(out)


def t_real_character(p: int) -> list[dict]:
    return _dicts(twisted.real_character_suite(p))


def t_jacobi_sum(p: int) -> list[dict]:
    return _dicts(twisted.jacobi_sum_suite(p))


def t_eta_spot() -> list[dict]:
    a = twisted.eta6_coefficients(13)
    return _dicts([
        IdentityReport("eta(4z)^6 coefficients a(1), a(5), a(9), a(13)", [a[0], a[4], a[8], a[12]], [1, -6, 9, 10],
                       0.0 if [a[0], a[4], a[8], a[12]] == [1, -6, 9, 10] else 1.0, 0.0,
                       [a[0], a[4], a[8], a[12]] == [1, -6, 9, 10], {"N": 13}),
    ])


def t_hybrid_bound(primes) -> list[dict]:
    reports = [twisted.hybrid_bound_audit(p) for p in primes]
    worst = max(reports, key=lambda r: r.lhs)
    ok = all(r.passed for r in reports)
    return _dicts([IdentityReport("max |g(chi,psi)|/p <= 4", worst.lhs, 4.0, max(0.0, worst.lhs - 4.0), 0.0, ok,
                                  {"primes": list(primes), "worst_p": worst.params["p"]})])


# ---------------------------------------------------------------------------
# extension fields and L-functions


def t_m1_consistency(p: int) -> list[dict]:
    chi = jacobi_character(p)
    worst = 0.0
    for psi in enumerate_characters(p):
        a = lfunction.g_extension(p, 1, psi).value
        b = twisted.g_hybrid(chi, psi, p).value
        worst = max(worst, abs(a - b))
    return _dicts([IdentityReport("g over F_p equals hybrid sum mod p", worst, 0.0, worst, 1e-8, worst <= 1e-8, {"p": p})])


def t_fft_vs_brute(p: int, m: int) -> list[dict]:
    worst = 0.0
    for psi in enumerate_characters(p):
        a = lfunction.g_extension(p, m, psi).value
        b = lfunction.g_extension(p, m, psi, method="brute").value
        worst = max(worst, abs(a - b))
    return _dicts([IdentityReport("g over F_q: convolution vs double sum", worst, 0.0, worst, 1e-6, worst <= 1e-6, {"p": p, "m": m})])


def t_conjugation(p: int, M: int) -> list[dict]:
    worst = 0.0
    for psi in enumerate_characters(p):
        for m in range(1, M + 1):
            a = lfunction.g_extension(p, m, psi.conj()).value
            b = lfunction.g_extension(p, m, psi).value.conjugate()
            worst = max(worst, abs(a - b))
    return _dicts([IdentityReport("g(chi, conj psi) = conj g(chi, psi)", worst, 0.0, worst, 1e-6, worst <= 1e-6, {"p": p, "M": M})])


def t_ext_second_moment(p: int, m: int) -> list[dict]:
    return _dicts([lfunction.extension_second_moment(p, m)])


def t_weight_audit(p: int, M: int | None = None) -> list[dict]:
    out = []
    for row in lfunction.weight_audit(p, M):
        fit = row["fit"]
        bound = p**1.05
        top = max((abs(r) for r in fit.reciprocal_roots), default=0.0)
        ok = fit.passed and top <= bound
        out.append(IdentityReport("L(T) reciprocal roots |root| <= p^1.05", top, bound, max(0.0, top - bound), 0.0, ok, {
            "p": p, "psi_index": row["psi_index"], "kind": row["kind"], "is_chi": row["is_chi"],
            "terms": len(fit.sequence), "order": fit.recurrence_order, "weights": fit.weights,
            "held_out_residual": fit.residual, "threshold": fit.threshold, "flagged": row["flagged"],
        }))
    return _dicts(out)


def t_synthetic_fits() -> list[dict]:
    alpha = 1.3 + 0.4j
    geo = lfunction.fit_lfunction([alpha**m for m in range(1, 6)], 5, threshold=1e-8)
    theta = 0.7
    pair = lfunction.fit_lfunction([2 * 5**m * math.cos(m * theta) for m in range(1, 7)], 5, threshold=1e-8)
    scale = max(abs(z) for z in pair.sequence)
    return _dicts([
        IdentityReport("geometric sequence fit", geo.residual, 0.0, geo.residual, 1e-8 * max(abs(z) for z in geo.sequence),
                       geo.passed and geo.recurrence_order == 1, {"root": geo.reciprocal_roots}),
        IdentityReport("weight-2 pair fit", pair.residual, 0.0, pair.residual, 1e-8 * scale,
                       pair.passed and pair.recurrence_order == 2 and all(abs(w - 2) < 1e-6 for w in pair.weights),
                       {"weights": pair.weights}),
    ])


# ---------------------------------------------------------------------------
# analytic


def t_V_quadrature() -> list[dict]:
    from scipy.integrate import quad

    worst = (0.0, 0, 0.0)
    for k in (12, 14, 16):
        for y in np.linspace(0.0, 4.0, 20):
            ref = quad(lambda x: math.exp(-x) * x ** (k / 2 - 1), 2 * math.pi * y, np.inf, epsabs=0, epsrel=1e-13)[0] / math.gamma(k / 2)
            d = abs(analytic.V(float(y), k) - ref)
            worst = max(worst, (d, k, float(y)))
    return _dicts([IdentityReport("V closed form vs quadrature", worst[0], 0.0, worst[0], 1e-9, worst[0] <= 1e-9,
                                  {"worst_k": worst[1], "worst_y": worst[2], "points_per_k": 20})])


def t_bessel() -> list[dict]:
    out = []
    worst = 0.0
    for n in (11, 13, 15):
        for x in np.linspace(0.01, 2.0, 50):
            ref = analytic.bessel_series(n, 2 * math.pi * x)
            worst = max(worst, abs(analytic.bessel_jn(n, 2 * math.pi * x) - ref) / abs(ref))
    out.append(IdentityReport("Bessel recurrence vs ascending series (x <= 2)", worst, 0.0, worst, 1e-10, worst <= 1e-10, {"orders": [11, 13, 15]}))
    k = 12
    x = 1e-3
    ratio = analytic.bessel_kernel(x, k) / analytic.bessel_kernel(x / 2, k)
    out.append(compare("kernel small-x scaling J(x)/J(x/2) = 2^(k-2)", ratio, 2.0 ** (k - 2), 1e-4 * 2 ** (k - 2), k=k, x=x))
    xs = np.linspace(10, 1000, 20000)
    env = float(np.max(np.abs(analytic.bessel_kernel(xs, k)) * xs**1.5))
    out.append(IdentityReport("kernel large-x decay |J(x)| x^{3/2} <= 4.2", env, 4.2, max(0.0, env - 4.2), 0.0, env <= 4.2,
                              {"k": k, "x_range": [10, 1000]}))
    return _dicts(out)


def t_V3() -> list[dict]:
    a = analytic.V3(0.3, 0.2, 0.7, 5, 12, 40).value
    b = analytic.V3(0.3, 0.7, 0.2, 5, 12, 40).value
    far = analytic.V3(0.1, 120.0, 0.2, 5, 12, 40)
    return _dicts([
        compare("V3 symmetric in its last two arguments", a, b, 1e-14),
        IdentityReport("V3 negligible for large x1", far.value, 0.0, abs(far.value), 1e-12, abs(far.value) <= 1e-12, {"x1": 120.0}),
    ])


def t_diagonal() -> list[dict]:
    rs = [analytic.diagonal_D(q, 12) for q in (101, 211, 401)]
    first = rs[0]
    gaps = [abs(r.ratio - 1) for r in rs]
    return _dicts([
        IdentityReport("diagonal D(101) within factor 2 of main term", first.ratio, 1.0, abs(first.ratio - 1), 1.0,
                       0.5 <= first.ratio <= 2.0, {"q": 101, "D": first.value, "main_term": first.main_term}),
        IdentityReport("diagonal ratio approaches 1 along q = 101, 211, 401", [r.ratio for r in rs], 1.0, gaps[-1], gaps[0],
                       gaps[0] > gaps[1] > gaps[2], {"q": [101, 211, 401]}),
        IdentityReport("diagonal D increases with q", [r.value for r in rs], None, 0.0, 0.0,
                       rs[0].value < rs[1].value < rs[2].value and rs[0].value > 0, {"q": [101, 211, 401]}),
    ])


def t_moment(q: int = 5, k: int = 12) -> list[dict]:
    rep = analytic.cubic_moment_rhs(analytic.MomentConfig(q, k))
    dbl = analytic.cubic_moment_rhs(analytic.MomentConfig(q, k, N_max=2 * rep.N_max, C_max=2 * rep.C_max))
    params = {"q": q, "k": k, "N_max": rep.N_max, "C_max": rep.C_max, "D": rep.D_value, "kloosterman_part": rep.kloosterman_part}
    return _dicts([
        IdentityReport("cubic moment total >= -tail_estimate", rep.total, -rep.tail_estimate, 0.0, rep.tail_estimate,
                       rep.total >= -rep.tail_estimate, params),
        IdentityReport("cubic moment stable under doubled cutoffs", dbl.total, rep.total, abs(dbl.total - rep.total), rep.tail_estimate,
                       abs(dbl.total - rep.total) <= rep.tail_estimate, params),
    ])


# ---------------------------------------------------------------------------
# assembling suites


def suite_tasks(scope: str) -> list[tuple[str, tuple]]:
    if scope == "all":
        return [t for s in SCOPES for t in suite_tasks(s)]
    if scope == "classical":
        return [("t_kloosterman_reality", ()), ("t_weil", ()), ("t_table_vs_direct", ()), ("t_gauss_ramanujan", ())]
    if scope == "paper":
        tasks = [("t_G_oracle", qr) for qr in G_CASES]
        tasks += [("t_G_spot", ()), ("t_Hr_symmetry", ())]
        tasks += [("t_multiplicativity", qq) for qq in ((3, 5), (3, 7), (3, 11))]
        tasks += [("t_hstar", (q,)) for q in (5, 7, 13)]
        tasks += [("t_second_moment", pm) for pm in ((5, 1), (7, 1), (11, 1), (13, 1), (3, 2), (5, 2))]
        tasks += [("t_real_character", (p,)) for p in ODD_PRIMES_101]
        tasks += [("t_jacobi_sum", (p,)) for p in ODD_PRIMES_101 if p % 4 == 1]
        tasks += [("t_eta_spot", ()), ("t_hybrid_bound", (tuple(ODD_PRIMES_101),))]
        return tasks
    if scope == "extension":
        tasks = [("t_m1_consistency", (p,)) for p in (3, 5, 7, 11, 13)]
        tasks += [("t_fft_vs_brute", pm) for pm in ((3, 2), (3, 3), (5, 2), (7, 2))]
        tasks += [("t_conjugation", (5, 3)), ("t_ext_second_moment", (3, 2)), ("t_ext_second_moment", (5, 2))]
        tasks += [("t_weight_audit", (p,)) for p in (3, 5, 7)]
        tasks += [("t_synthetic_fits", ())]
        return tasks
    if scope == "analytic":
        return [("t_V_quadrature", ()), ("t_bessel", ()), ("t_V3", ()), ("t_diagonal", ()), ("t_moment", ())]
    raise ValueError(f"unknown scope {scope!r}")


def run_task(task: tuple[str, tuple], budgets: dict | None = None) -> list[dict]:
    name, args = task
    if budgets is not None:
        reset_budgets()
        for k, v in budgets.items():
            set_budget(k, v)
    return globals()[name](*args)


def _run_task_with(args):
    task, budgets = args
    return run_task(task, budgets)


def run_suite(scope: str, workers: int = 1) -> dict:
    tasks = suite_tasks(scope)
    budgets = all_budgets()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(_run_task_with, [(t, budgets) for t in tasks]))
    else:
        chunks = [run_task(t) for t in tasks]
    results = [r for chunk in chunks for r in chunk]
    failed = [r for r in results if not r["pass"]]
    return {
        "schema_version": SCHEMA_VERSION,
        "scope": scope,
        "budgets": budgets,
        "summary": {"total": len(results), "passed": len(results) - len(failed), "failed": len(failed)},
        "pass": not failed,
        "results": results,
    }
