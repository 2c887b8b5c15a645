import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from jamlab import theory
from jamlab.errors import DomainError


def test_constants():
    c = theory.CONSTANTS
    assert c.p_dimer_1d == pytest.approx(0.1353352832366127, abs=1e-16)
    assert c.p_annihilation_1d == pytest.approx(0.36787944117144233, abs=1e-16)
    assert c.variance_bound == pytest.approx(1.6449340668482264, abs=1e-15)


def test_harmonic_values():
    assert theory.harmonic(0) == 0
    assert theory.harmonic(1) == 1
    assert theory.harmonic(4) == Fraction(25, 12)
    assert theory.harmonic_float(399) == pytest.approx(6.567429691176507, abs=1e-12)


def test_harmonic_differences():
    for m in range(1, 1001):
        assert theory.harmonic(m) - theory.harmonic(m - 1) == Fraction(1, m)


def test_harmonic_float_agrees_with_exact():
    for m in (1, 10, 399, 1000):
        assert theory.harmonic_float(m) == pytest.approx(float(theory.harmonic(m)), rel=1e-15)


def test_harmonic_cap():
    with pytest.raises(DomainError):
        theory.harmonic(theory.EXACT_HARMONIC_CAP + 1)
    with pytest.raises(DomainError):
        theory.harmonic(-1)


def test_asymptotic_prediction():
    assert theory.asymptotic_prediction(399, math.exp(-2)) == pytest.approx(4.567429691176507, abs=1e-12)
    assert round(theory.asymptotic_prediction(400, math.exp(-2)), 4) == 4.5699
    assert theory.asymptotic_prediction(17, 1.0) == theory.harmonic_float(17)
    with pytest.raises(DomainError, match="p must be > 0"):
        theory.asymptotic_prediction(10, 0.0)


def test_independent_model_small():
    assert theory.independent_model_mean(2, 0.5) == pytest.approx(0.875, abs=1e-15)
    assert theory.independent_model_mean(13, 1.0) == theory.harmonic_float(13)


def test_independent_model_converges():
    p = math.exp(-2)
    gaps = [abs(theory.independent_model_mean(N, p) - theory.asymptotic_prediction(N, p)) for N in (10, 10**2, 10**3, 10**4, 10**5)]
    assert gaps[3] < 1e-3
    # the gap reaches double-precision round-off by N = 1000
    assert gaps[0] > gaps[1] > gaps[2]
    assert max(gaps[2:]) < 1e-12


@given(st.integers(1, 300), st.floats(0.01, 0.99))
def test_independent_model_bounds(N, p):
    v = theory.independent_model_mean(N, p)
    h = theory.harmonic_float(N)
    assert p * h - 1e-12 <= v < h


@given(st.integers(1, 500), st.floats(0.01, 0.98))
def test_prediction_monotone(N, p):
    base = theory.asymptotic_prediction(N, p)
    assert theory.asymptotic_prediction(N + 1, p) > base
    assert theory.asymptotic_prediction(N, p + 0.01) > base
