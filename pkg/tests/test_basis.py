import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from jain_durrmeyer.basis import (OperatorParams, TruncationPolicy, basis_log_value,
                                  basis_log_values, basis_mass, basis_value, basis_values,
                                  truncation_index)
from jain_durrmeyer.errors import DomainError


def test_params_parsing_and_validation():
    p = OperatorParams(3, "1/4")
    assert p.exact == Fraction(1, 4) and p.beta == 0.25 and p.is_exact
    assert OperatorParams(3, 0).exact == 0
    assert not OperatorParams(3, 0.25).is_exact
    assert OperatorParams(3, "0.25").beta == 0.25
    assert OperatorParams(3, Fraction(1, 4)).with_n(7) == OperatorParams(7, Fraction(1, 4))
    for n, beta in [(0, 0.1), (2.5, 0.1), (True, 0.1), (1, 1.0), (1, -0.1), (1, Fraction(3, 2))]:
        with pytest.raises(DomainError):
            OperatorParams(n, beta)


@pytest.mark.parametrize("mass_tol,cap", [(0.0, 10), (1.0, 10), (1e-12, 0)])
def test_policy_validation(mass_tol, cap):
    with pytest.raises(DomainError):
        TruncationPolicy(mass_tol, cap)


def test_basis_examples():
    assert basis_log_value(OperatorParams(1, 0.3), 0, 1.0) == -1.0
    assert basis_log_value(OperatorParams(1, 0.5), 1, 1.0) == pytest.approx(-1.5, abs=1e-15)
    assert basis_value(OperatorParams(1, 0.5), 1, 1.0) == pytest.approx(0.2231302, abs=1e-7)
    assert basis_value(OperatorParams(2, 0.0), 2, 1.0) == pytest.approx(2 * math.exp(-2), rel=1e-14)
    assert basis_value(OperatorParams(2, 0.0), 2, 1.0) == pytest.approx(0.2706706, abs=1e-7)


def test_basis_at_zero():
    p = OperatorParams(4, 0.5)
    assert basis_log_value(p, 0, 0.0) == 0.0
    assert basis_log_value(p, 3, 0.0) == -math.inf
    assert basis_value(p, 3, 0.0) == 0.0
    assert basis_mass(p, 0.0, 0) == 1.0
    assert truncation_index(p, 0.0).k_max == 0


def test_domain_errors():
    p = OperatorParams(1, 0.5)
    with pytest.raises(DomainError):
        basis_log_value(p, -1, 1.0)
    with pytest.raises(DomainError):
        basis_log_value(p, 1, -1.0)
    with pytest.raises(DomainError):
        truncation_index(p, -0.5)


def test_truncation_examples():
    p = OperatorParams(10, 0.0)
    t = truncation_index(p, 1.0, TruncationPolicy(1e-12))
    assert t.k_max <= 60 and not t.saturated
    assert math.fsum(stats.poisson.pmf(np.arange(t.k_max + 1), 10.0)) >= 1 - 1e-12
    p = OperatorParams(5, 0.5)
    t = truncation_index(p, 2.0, TruncationPolicy(1e-10))
    assert basis_mass(p, 2.0, t.k_max) >= 1 - 1e-10
    # smallest such index
    assert basis_mass(p, 2.0, t.k_max - 1) < 1 - 1e-10


def test_mass_examples():
    p = OperatorParams(3, 0.4)
    t = truncation_index(p, 2.0, TruncationPolicy(1e-13))
    assert basis_mass(p, 2.0, t.k_max) == pytest.approx(1.0, abs=1e-12)
    assert basis_mass(OperatorParams(1, 0.0), 1.0, 40) == pytest.approx(
        math.fsum(stats.poisson.pmf(np.arange(41), 1.0)), abs=1e-15)


def test_saturation_flagged():
    t = truncation_index(OperatorParams(1, 0.9), 1.0, TruncationPolicy(1e-12, hard_cap=50))
    assert t.saturated and t.k_max == 50 and t.mass < 1 - 1e-12


@pytest.mark.parametrize("beta", [0.0, 0.3, 0.7, 0.95])
@pytest.mark.parametrize("n", [1, 5, 50])
@pytest.mark.parametrize("x", [0.1, 1.0, 10.0])
def test_normalization_grid(beta, n, x):
    p = OperatorParams(n, beta)
    policy = TruncationPolicy(1e-12)
    t = truncation_index(p, x, policy)
    assert not t.saturated
    assert abs(basis_mass(p, x, t.k_max) - 1.0) <= 1e-12 + 1e-13


def test_poisson_reduction():
    for n, x in [(1, 0.5), (3, 2.0), (10, 4.0)]:
        p = OperatorParams(n, 0.0)
        k = np.arange(81)
        ours = basis_values(p, x, 80)
        ref = stats.poisson.pmf(k, n * x)
        mask = ref > 1e-290
        np.testing.assert_allclose(ours[mask], ref[mask], rtol=1e-12)


def test_generalized_poisson_mean():
    p = OperatorParams(5, 0.3)
    t = truncation_index(p, 2.0)
    vals = basis_values(p, 2.0, 2 * t.k_max)
    mean = math.fsum(np.arange(vals.size) * vals)
    assert mean == pytest.approx(5 * 2.0 / 0.7, rel=1e-12)


def test_large_k_does_not_overflow():
    p = OperatorParams(50, 0.9)
    vals = basis_log_values(p, np.array([600, 5000, 20000]), 20.0)
    assert np.all(np.isfinite(vals))


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 60), beta=st.floats(0.0, 0.9), x=st.floats(0.0, 20.0),
       k=st.integers(0, 3000))
def test_log_consistency_and_nonnegativity(n, beta, x, k):
    p = OperatorParams(n, beta)
    lv = basis_log_value(p, k, x)
    v = basis_value(p, k, x)
    assert v >= 0.0
    vec = basis_log_values(p, np.array([k]), x)[0]
    assert vec == lv or abs(vec - lv) <= 1e-12 * max(1.0, abs(lv))
    if v > 1e-300:
        assert abs(math.exp(lv) - v) <= 1e-13 * v


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 50), beta=st.floats(0.0, 0.9), x=st.floats(0.01, 10.0))
def test_mass_property(n, beta, x):
    p = OperatorParams(n, beta)
    t = truncation_index(p, x)
    assert not t.saturated
    assert abs(t.mass - 1.0) <= 1e-12 + 1e-13
    assert basis_mass(p, x, t.k_max) <= 1 + 1e-12
    assert basis_mass(p, x, t.k_max) >= basis_mass(p, x, max(0, t.k_max - 5))
