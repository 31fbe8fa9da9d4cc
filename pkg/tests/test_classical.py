import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from charsum import classical
from charsum.classical import (
    AngleUndefinedError,
    gauss_sum,
    kloosterman,
    kloosterman_angle,
    kloosterman_table,
    ramanujan_sum,
    weil_bound,
)
from charsum.ffarith import enumerate_characters, jacobi_character


def naive_kloosterman(m, n, c):
    s = 0j
    for d in range(c):
        if math.gcd(d, c) == 1:
            s += cmath.exp(2j * math.pi * (m * d + n * pow(d, -1, c)) / c)
    return s


def test_kloosterman_examples():
    assert kloosterman(1, 1, 5).real == pytest.approx(0.381966011250105, abs=1e-12)
    assert kloosterman(0, 0, 12).real == pytest.approx(4)


@settings(max_examples=80)
@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(1, 80))
def test_kloosterman_against_naive(m, n, c):
    assert abs(kloosterman(m, n, c).value - naive_kloosterman(m, n, c)) < 1e-9


@settings(max_examples=80)
@given(st.integers(0, 200), st.integers(0, 200), st.integers(1, 200))
def test_kloosterman_real_symmetric_and_weil(m, n, c):
    s = kloosterman(m, n, c).value
    assert abs(s.imag) < 1e-9
    assert abs(s - kloosterman(n, m, c).value) < 1e-9
    assert abs(s) <= weil_bound(m, n, c) + 1e-9


@settings(max_examples=50)
@given(st.integers(0, 60), st.integers(0, 60), st.sampled_from([(3, 5), (4, 7), (5, 9), (8, 11)]))
def test_kloosterman_twisted_multiplicativity(m, n, cs):
    c1, c2 = cs
    i1, i2 = pow(c1, -1, c2), pow(c2, -1, c1)
    lhs = kloosterman(m, n, c1 * c2).value
    rhs = kloosterman(m * i2, n * i2, c1).value * kloosterman(m * i1, n * i1, c2).value
    assert abs(lhs - rhs) < 1e-8


@pytest.mark.parametrize("c", [1, 2, 7, 12, 15, 36, 49])
def test_table_matches_direct(c):
    tab = classical.KloostermanTable(c)
    for m in range(c):
        for n in range(c):
            assert tab(m, n) == pytest.approx(kloosterman(m, n, c).real, abs=1e-9)
    assert tab.max_imag < 1e-9


def test_table_memoized():
    assert kloosterman_table(11) is kloosterman_table(11)


def test_angle():
    w = kloosterman_angle(1, 7)
    assert 0 <= w <= math.pi
    assert 2 * math.sqrt(7) * math.cos(w) == pytest.approx(kloosterman(1, 1, 7).real)
    with pytest.raises(AngleUndefinedError):
        kloosterman(1, 1, 9, want_angle=True)
    with pytest.raises(AngleUndefinedError):
        kloosterman(7, 1, 7, want_angle=True)


@pytest.mark.parametrize("q", [3, 5, 7, 11, 13, 15, 21, 35, 105])
def test_gauss_sum_square(q):
    chi = jacobi_character(q)
    tau = gauss_sum(chi).value
    assert tau * tau == pytest.approx(chi(-1) * q, abs=1e-9)


def test_gauss_sum_chi5():
    assert gauss_sum(jacobi_character(5)).value == pytest.approx(math.sqrt(5))


@pytest.mark.parametrize("q", [5, 7, 13])
def test_gauss_sum_modulus(q):
    for chi in enumerate_characters(q):
        if not chi.is_principal:
            assert abs(gauss_sum(chi).value) == pytest.approx(math.sqrt(q))


@given(st.integers(-300, 300), st.integers(1, 150))
def test_ramanujan_closed_form(m, q):
    assert ramanujan_sum(m, q).value == pytest.approx(ramanujan_sum(m, q, "closed_form").value, abs=1e-9)


def test_ramanujan_examples():
    assert ramanujan_sum(3, 15, "closed_form").real == -2
    assert ramanujan_sum(0, 15, "closed_form").real == 8
    assert ramanujan_sum(1, 15, "closed_form").real == 1


def test_kloosterman_matrix_is_real():
    for c in (9, 20, 31):
        assert np.max(np.abs(classical.kloosterman_matrix(c).imag)) < 1e-9
