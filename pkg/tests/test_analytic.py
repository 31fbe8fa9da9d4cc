import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import jv

from charsum import analytic
from charsum.analytic import MomentConfig, ParityError


def V_quad(y, k):
    return quad(lambda x: math.exp(-x) * x ** (k / 2 - 1), 2 * math.pi * y, np.inf, epsabs=0, epsrel=1e-13)[0] / math.gamma(k / 2)


@pytest.mark.parametrize("k", [12, 14, 16])
def test_V_against_quadrature(k):
    for y in np.linspace(0, 4, 20):
        assert analytic.V(float(y), k) == pytest.approx(V_quad(y, k), abs=1e-9)


def test_V_examples():
    assert analytic.V(0.0, 12) == 1.0
    t = 2 * math.pi
    assert analytic.V(1.0, 12) == pytest.approx(math.exp(-t) * sum(t**j / math.factorial(j) for j in range(6)), rel=1e-14)
    with pytest.raises(ValueError):
        analytic.V(-0.1, 12)


@given(st.floats(0, 20), st.floats(0.001, 5), st.sampled_from([12, 14, 16, 20]))
def test_V_decreasing_and_bounded(y, h, k):
    a, b = analytic.V(y, k), analytic.V(y + h, k)
    assert 0 <= b <= a + 1e-15 and a <= 1


def test_V_tail_integral():
    for Y in (0.0, 0.5, 2.0):
        ref = quad(lambda y: analytic.V(y, 12), Y, np.inf)[0]
        assert analytic.V_tail_integral(Y, 12) == pytest.approx(ref, rel=1e-8)


def test_V_cutoff():
    Y = analytic.V_cutoff(12)
    assert analytic.V(Y, 12) <= 1e-12 < analytic.V(Y - 1e-6, 12)


@settings(max_examples=40)
@given(st.floats(0, 3), st.floats(0.01, 3), st.floats(0.01, 3))
def test_V3_symmetric(x, a, b):
    assert analytic.V3(x, a, b, 5, 12, 30).value == pytest.approx(analytic.V3(x, b, a, 5, 12, 30).value, rel=1e-13)


def test_V3_growth_and_decay():
    r1 = analytic.V3(0, 0, 0, 5, 12, 100)
    r2 = analytic.V3(0, 0, 0, 5, 12, 1000)
    assert r1.diverges and r1.tail_bound is None
    assert r2.value - r1.value == pytest.approx(sum(1 / d for d in range(101, 1001) if d % 5), rel=1e-12)
    far = analytic.V3(0.1, 120.0, 0.3, 5, 12, 50)
    assert abs(far.value) < 1e-12 and far.tail_bound < 1e-12


def test_V3_tail_bound_holds():
    full = analytic.V3(0.2, 0.05, 0.1, 3, 12, 5000).value
    part = analytic.V3(0.2, 0.05, 0.1, 3, 12, 40)
    assert 0 <= full - part.value <= part.tail_bound


@pytest.mark.parametrize("n", [11, 13, 15])
def test_bessel_against_series(n):
    for x in np.linspace(0.01, 2.0, 40):
        z = 2 * math.pi * x
        ref = analytic.bessel_series(n, z)
        assert analytic.bessel_jn(n, z) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("n", [0, 1, 11, 13])
def test_bessel_against_scipy(n):
    z = np.concatenate([np.linspace(0.001, 60, 700), np.linspace(60, 6.3e4, 300)])
    ours = analytic.bessel_jn(n, z)
    env = np.minimum(1.0, np.sqrt(2 / (np.pi * z)))
    assert np.max(np.abs(ours - jv(n, z)) / env) < 1e-10


def test_bessel_branches_meet():
    n = 11
    z = np.array([2 * n - 1e-9, 2 * n])
    a, b = analytic.bessel_jn(n, z)
    assert a == pytest.approx(b, rel=1e-9)


def test_kernel_sign_and_domain():
    x = 0.3
    base = 4 * math.pi / x * jv(11, 2 * math.pi * x)
    assert analytic.bessel_kernel(x, 12) == pytest.approx(base, rel=1e-10)  # i^12 = 1
    assert analytic.bessel_kernel(x, 14) == pytest.approx(-4 * math.pi / x * jv(13, 2 * math.pi * x), rel=1e-10)
    with pytest.raises(ValueError):
        analytic.bessel_kernel(0.0, 12)


def test_kernel_small_x_scaling():
    for x in (1e-3, 1e-2):
        ratio = analytic.bessel_kernel(x, 12) / analytic.bessel_kernel(x / 2, 12)
        assert ratio == pytest.approx(2.0**10, rel=1e-3)


def test_kernel_large_x_decay():
    xs = np.linspace(10, 1000, 5000)
    assert np.max(np.abs(analytic.bessel_kernel(xs, 12)) * xs**1.5) <= 4.2


def test_diagonal_positive_and_growing():
    vals = [analytic.diagonal_D(q, 12) for q in (101, 211)]
    assert all(v.value > 0 for v in vals)
    assert vals[0].value < vals[1].value
    assert 0.5 <= vals[0].ratio <= 2
    assert not vals[0].tail_warning


def test_diagonal_against_loop():
    q, k = 7, 12
    Y = analytic.V_cutoff(k)
    L = math.ceil(Y * q)
    total = 0.0
    for d in range(1, L + 1):
        for n1 in range(1, L // d + 1):
            for n2 in range(1, L // d + 1):
                if math.gcd(d * n1 * n2, q) == 1:
                    total += analytic.V(n1 * n2 / q, k) * analytic.V(d * n1 / q, k) * analytic.V(d * n2 / q, k) / (d * n1 * n2)
    assert analytic.diagonal_D(q, k).value == pytest.approx(8 * total, rel=1e-12)


def test_moment_config_validation():
    with pytest.raises(ParityError):
        MomentConfig(7, 12)
    with pytest.raises(ValueError):
        MomentConfig(5, 10)
    with pytest.raises(ValueError):
        MomentConfig(9, 12)
    MomentConfig(7, 14)
    MomentConfig(3, 14)


@pytest.fixture(scope="module")
def moment5():
    return analytic.cubic_moment_rhs(MomentConfig(5, 12))


def test_moment_report_consistency(moment5):
    rep = moment5
    assert rep.total == pytest.approx(rep.D_value + rep.kloosterman_part, rel=1e-15)
    assert sum(r[2] for r in rep.breakdown) == pytest.approx(rep.kloosterman_part, rel=1e-12)
    assert rep.breakdown[-1][3] == pytest.approx(rep.total, rel=1e-15)
    assert rep.total >= -rep.tail_estimate
    assert [r[0] for r in rep.breakdown] == list(range(5, rep.C_max + 1, 5))


def test_moment_single_c_against_loop(moment5):
    """S(c) for c = 5 at a small box, summed term by term."""
    from charsum.classical import kloosterman
    from charsum.ffarith import jacobi_symbol

    q, k, N, dmax = 5, 12, 8, 34
    box = analytic._build_box(q, k, N, dmax)
    got, _ = analytic._S_of_c(box, 10)
    ref = 0.0
    for n in range(1, N + 1):
        for n1 in range(1, N + 1):
            for n2 in range(1, N + 1):
                ch = jacobi_symbol(n * n1 * n2, q)
                if ch == 0:
                    continue
                v3 = analytic.V3(n / q, n1 / q, n2 / q, q, k, dmax).value
                x = 2 * math.sqrt(n * n1 * n2) / 10
                ref += ch * kloosterman(n, n1 * n2, 10).real * analytic.bessel_kernel(x, k) * v3
    assert got == pytest.approx(8 * ref, rel=1e-10)


def test_moment_doubled_cutoffs(moment5):
    rep = moment5
    dbl = analytic.cubic_moment_rhs(MomentConfig(5, 12, N_max=2 * rep.N_max, C_max=2 * rep.C_max))
    assert abs(dbl.total - rep.total) <= rep.tail_estimate


def test_moment_outputs(moment5):
    d = json.loads(moment5.to_json())
    assert d["schema_version"] == 1 and "budgets" in d
    rows = list(csv.reader(io.StringIO(moment5.to_csv())))
    assert rows[0] == ["c", "S(c)", "c^-2 S(c)", "cumulative_total"]
    assert len(rows) == len(moment5.breakdown) + 1


def test_moment_budget():
    from charsum.config import SizeLimitError

    with pytest.raises(SizeLimitError):
        analytic.cubic_moment_rhs(MomentConfig(11, 14))
