import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from charsum import twisted
from charsum.ffarith import InvalidModulusError, UnsupportedModulusError, enumerate_characters, jacobi_character, jacobi_symbol


def e(x, q):
    return cmath.exp(2j * math.pi * x / q)


def naive_H(w, q):
    return sum(jacobi_symbol(u * v * (u + 1) * (v + 1), q) * e((u * v - 1) * w, q) for u in range(q) for v in range(q))


def naive_kl(m, n, c):
    return sum(e(m * d + n * pow(d, -1, c), c) for d in range(1, c) if math.gcd(d, c) == 1) if c > 1 else 1


def naive_G(m, m1, m2, q, r):
    c = q * r
    S = {}
    tot = 0j
    for a, a1, a2 in itertools.product(range(c), repeat=3):
        ch = jacobi_symbol(a * a1 * a2, q)
        if ch == 0:
            continue
        key = (a, a1 * a2 % c)
        if key not in S:
            S[key] = naive_kl(a, a1 * a2, c)
        tot += ch * S[key] * e(a * m + a1 * m1 + a2 * m2, c)
    return tot


def test_H_value_mod_5():
    v = twisted.H_sum(1, 5).value
    assert v == pytest.approx(-4.854101966 - 1.902113033j, abs=1e-8)
    assert v == pytest.approx(naive_H(1, 5), abs=1e-9)


@pytest.mark.parametrize("q", [3, 7, 15])
def test_H_against_naive(q):
    for w in range(q):
        assert twisted.H_sum(w, q).value == pytest.approx(naive_H(w, q), abs=1e-8)


def test_H_rejects_even_or_square_moduli():
    with pytest.raises(UnsupportedModulusError):
        twisted.H_sum(1, 9)
    with pytest.raises(UnsupportedModulusError):
        twisted.H_sum(1, 10)


@pytest.mark.parametrize("q,r", [(5, 1), (3, 2), (5, 3)])
def test_G_brute_against_naive(q, r):
    rng = np.random.default_rng(q * r)
    c = q * r
    for m, m1, m2 in rng.integers(0, c, size=(3, 3)):
        assert twisted.G_brute(int(m), int(m1), int(m2), q, r).value == pytest.approx(naive_G(m, m1, m2, q, r), abs=1e-7)


def test_G_grid_matches_single_evaluations():
    grid = twisted.G_grid(5, 2)
    for t in [(0, 0, 0), (1, 2, 3), (9, 4, 7)]:
        assert grid[t] == pytest.approx(twisted.G_brute(*t, 5, 2).value, abs=1e-8)


def test_G_closed_full_grid_15():
    grid = twisted.G_grid(15, 1)
    for t in itertools.product(range(15), repeat=3):
        assert abs(twisted.G_from_closed(*t, 15, 1) - grid[t]) <= 1e-6 * 15**3


@pytest.mark.parametrize("q,r", [(5, 2), (3, 3), (5, 5), (21, 1)])
def test_G_closed_grids(q, r):
    grid = twisted.G_grid(q, r)
    c = q * r
    dev = max(abs(twisted.G_from_closed(*t, q, r) - grid[t]) for t in itertools.product(range(c), repeat=3))
    assert dev <= 1e-6 * q**3 * r**2


def test_G_zero_triple_value():
    chi = jacobi_character(15)
    assert twisted.G_closed(0, 0, 0, 15).value == pytest.approx(chi(-1) * 15 * 64)
    assert twisted.G_brute(0, 0, 0, 15).value == pytest.approx(chi(-1) * 15 * 64, abs=1e-6)


def test_G_vanishing_flag_and_bound():
    v = twisted.G_closed(3, 1, 1, 5, 3)
    assert v.meta["vanishes"] and v.value == 0
    assert twisted.G_closed(1, 1, 1, 5, 3).meta["unit_convention"] == twisted.G_UNIT_CONVENTION
    grid = twisted.G_grid(5, 3)
    assert np.max(np.abs(grid)) <= 5**3 * 3**2 + 1e-6


def test_G_budget():
    from charsum.config import SizeLimitError

    with pytest.raises(SizeLimitError):
        twisted.G_brute(1, 1, 1, 11, 11)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 20), st.integers(0, 20), st.integers(0, 20), st.sampled_from([3, 5, 7, 11]), st.integers(1, 12))
def test_H_r_prime_cases(m, m1, m2, p, r):
    assert twisted.H_r_prime(m, m1, m2, p, r).value == pytest.approx(twisted.H_r_sum(m, m1, m2, p, r).value, abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 40), st.integers(0, 40), st.integers(0, 40), st.sampled_from([15, 21, 35, 105]), st.integers(1, 15))
def test_H_r_closed(m, m1, m2, q, r):
    assert twisted.H_r_closed(m, m1, m2, q, r).value == pytest.approx(twisted.H_r_sum(m, m1, m2, q, r).value, abs=1e-7)


def test_H_r_shift_of_variables():
    for m, m1, m2 in itertools.product(range(5), repeat=3):
        assert twisted.H_r_shifted_sum(m, m1, m2, 15, 2).value == pytest.approx(twisted.H_r_sum(m, m1, m2, 15, 2).value, abs=1e-9)


def test_H_r_prime_special_cases():
    # q | r and q does not divide m m1 m2: chi(-1) q
    assert twisted.H_r_prime(1, 2, 3, 7, 14).value == pytest.approx(-7)
    rs = [twisted.ramanujan_sum(x, 5, "closed_form").real for x in (1, 5, 2)]
    assert twisted.H_r_sum(1, 5, 2, 5, 3).value == pytest.approx(np.prod(rs) / 4, abs=1e-9)


def test_H_r_symmetric_in_m1_m2():
    for m, a, b in itertools.product(range(15), repeat=3):
        assert twisted.H_r_sum(m, a, b, 15, 1).value == pytest.approx(twisted.H_r_sum(m, b, a, 15, 1).value, abs=1e-9)


@pytest.mark.parametrize("q1,q2", [(3, 5), (3, 7), (5, 7), (1, 15)])
def test_multiplicativity(q1, q2):
    for rep in twisted.multiplicativity_check(q1, q2):
        assert rep.passed, rep.to_dict()


def test_multiplicativity_needs_coprime():
    with pytest.raises(InvalidModulusError):
        twisted.multiplicativity_check(3, 15)


@pytest.mark.parametrize("q", [3, 5, 7, 15, 105])
def test_H_unit_diagonal(q):
    from charsum.ffarith import mobius

    assert twisted.H_unit_diagonal(q) == mobius(q) * jacobi_symbol(-1, q)


@pytest.mark.parametrize("q", [5, 7, 13])
def test_hstar_spectral(q):
    for w in range(1, q):
        assert twisted.hstar_spectral(w, q).value == pytest.approx(twisted.H_sum(w, q, reduced=True).value, abs=1e-8)
    assert twisted.hstar_spectral(1, 1).value == 1


def test_g_trivial_character_conventions():
    chi = jacobi_character(7)
    psi0 = enumerate_characters(7)[0]
    assert twisted.g_hybrid(chi, psi0).value == pytest.approx(1)
    # with psi0(0) = 0 the uv = 1 terms drop out and chi(-1) is added back
    assert twisted.g_hybrid(chi, psi0, trivial_is_one=False).value == pytest.approx(1 + chi(-1))


def test_g_hybrid_rejects_mismatch():
    with pytest.raises(InvalidModulusError):
        twisted.g_hybrid(jacobi_character(5), enumerate_characters(7)[1], 5)


@pytest.mark.parametrize("p,m", [(5, 1), (7, 1), (11, 1), (13, 1), (3, 2), (5, 2)])
def test_second_moment_diagnostics(p, m):
    stated, count, removed = twisted.second_moment(p, m)
    q = p**m
    assert stated.rhs == q * q - 2 * q - 2
    assert count.passed  # pair count including uv = 1 gives the stated value
    assert removed.passed  # the mean square is one less
    assert stated.lhs == pytest.approx(q * q - 2 * q - 3)


def test_second_moment_trivial_chi_rejected():
    from charsum.ffarith import build_ext_field

    F = build_ext_field(5, 1)
    with pytest.raises(InvalidModulusError):
        twisted.second_moment(5, 1, F.character(0))


@pytest.mark.parametrize("p,g", [(5, -6), (7, 0), (13, 10), (17, -30), (29, 42), (37, -70), (11, 0)])
def test_g_chi_chi_values(p, g):
    assert twisted.g_chi_chi(p) == g


@pytest.mark.parametrize("p", [5, 7, 13, 31])
def test_real_character_suite_small(p):
    reps = {r.identity: r for r in twisted.real_character_suite(p)}
    failing = [k for k, r in reps.items() if not r.passed]
    assert not failing


def test_T_values():
    assert twisted.T_from_sums(5) == pytest.approx(400)
    assert twisted.T_from_sums(7) == pytest.approx(0, abs=1e-8)
    assert twisted.T_from_nu(13) == pytest.approx(2704)


@pytest.mark.parametrize("p", [5, 7, 11])
def test_nu_counts_all_a(p):
    for a in range(1, p):
        assert twisted.nu_brute(a, p) == twisted.nu_formula(a, p)


def test_nu_brute_naive_p5():
    p = 5
    inv = {d: pow(d, -1, p) for d in range(1, p)}
    for a in range(1, p):
        cnt = sum(
            1
            for d in itertools.product(range(1, p), repeat=4)
            if (a * (d[0] + d[1]) - d[2] - d[3]) % p == 0 and (a * (inv[d[0]] + inv[d[1]]) - inv[d[2]] - inv[d[3]]) % p == 0
        )
        assert twisted.nu_brute(a, p) == cnt


def test_real_character_suite_rejects_p2():
    with pytest.raises(UnsupportedModulusError):
        twisted.real_character_suite(2)


def test_eta_coefficients():
    a = twisted.eta6_coefficients(60)
    assert a[0] == 1
    assert a[4] == -6 and a[8] == 9 and a[12] == 10
    assert all(a[n - 1] == 0 for n in range(1, 61) if n % 4 != 1)


@pytest.mark.parametrize("p", [5, 13, 17, 29, 37, 41, 53, 61, 73, 89, 97, 101])
def test_jacobi_sum_suite(p):
    for rep in twisted.jacobi_sum_suite(p):
        assert rep.passed, rep.to_dict()


def test_jacobi_sum_suite_rejects_3_mod_4():
    with pytest.raises(InvalidModulusError):
        twisted.jacobi_sum_suite(7)


def test_quartic_character_sends_root_to_i():
    from charsum.ffarith import primitive_root

    for p in (5, 13, 29):
        assert twisted.quartic_character(p)(primitive_root(p)) == pytest.approx(1j)


def test_hybrid_bound_audit():
    rep = twisted.hybrid_bound_audit(29)
    assert rep.passed and rep.lhs <= 3


def test_identity_report_schema():
    d = twisted.compare("x", 1 + 1j, 1, 0.1, q=5).to_dict()
    assert set(d) == {"identity", "lhs", "rhs", "deviation", "tolerance", "pass", "params"}
    assert d["lhs"] == [1.0, 1.0] and d["pass"] is False
