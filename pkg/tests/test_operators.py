import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jain_durrmeyer.basis import OperatorParams, TruncationPolicy
from jain_durrmeyer.errors import AccuracyError, DomainError, SaturationError
from jain_durrmeyer.functions import builtin, from_expression, monomial
from jain_durrmeyer.moments import t_series
from jain_durrmeyer.operators import (auxiliary_apply, durrmeyer_apply, durrmeyer_apply_with_error,
                                      durrmeyer_weights, jain_apply, jain_tail_bound)
from jain_durrmeyer.quadrature import QuadratureConfig

SWEEP = [(n, b) for n in (1, 5, 10, 50) for b in (0.0, 0.25, 0.5, 0.75)]
SWEEP_X = (0.0, 0.5, 1.0, 4.0)


def test_jain_examples():
    for n, b in [(1, 0.0), (5, 0.3), (50, 0.75)]:
        assert jain_apply(OperatorParams(n, b), monomial(0), 1.3) == pytest.approx(1.0, abs=1e-12)
    assert jain_apply(OperatorParams(5, 0.3), monomial(1), 2.0) == pytest.approx(2 / 0.7, abs=1e-10)
    f = builtin("exp_decay")
    assert jain_apply(OperatorParams(5, 0.3), f, 0.0) == 1.0
    assert jain_apply(OperatorParams(5, 0.3), builtin("abs_kink", 1.0), 0.0) == 1.0


def test_jain_tail_bound_small():
    p = OperatorParams(5, 0.3)
    assert jain_tail_bound(p, monomial(3), 2.0) < 1e-12
    assert jain_tail_bound(p, monomial(3), 0.0) == 0.0


def test_durrmeyer_examples():
    for n, b in [(1, 0.0), (5, 0.3), (50, 0.75)]:
        for x in (0.0, 0.7, 3.0):
            assert durrmeyer_apply(OperatorParams(n, b), monomial(0), x) == pytest.approx(1.0, abs=1e-11)
    for n, b in [(1, 0.0), (3, 0.5), (20, 0.9)]:
        assert durrmeyer_apply(OperatorParams(n, b), monomial(1), 0.0) == pytest.approx(1 / n, rel=1e-12)
    assert durrmeyer_apply(OperatorParams(10, 0.0), monomial(2), 1.0) == pytest.approx(1.42, abs=1e-8)


def test_durrmeyer_at_zero_is_gamma_average():
    # D(f, 0) = n int e^{-nt} f(t) dt; for exp_decay this is n/(n+1)
    for n in (1, 4, 25):
        assert durrmeyer_apply(OperatorParams(n, 0.6), builtin("exp_decay"), 0.0) == pytest.approx(
            n / (n + 1), rel=1e-12)


def test_auxiliary_examples():
    p = OperatorParams(10, 0.0)
    assert auxiliary_apply(OperatorParams(7, 0.4), monomial(0), 1.5) == pytest.approx(1.0, abs=1e-11)
    assert auxiliary_apply(p, monomial(1), 1.0) == pytest.approx(1.0, abs=1e-8)
    # D(e2) - (x + s)^2 + x^2 with s = 1/(n(1-b)), from the series values
    for n, b, x in [(10, 0.0, 1.0), (20, 0.5, 2.0)]:
        p = OperatorParams(n, b)
        s = 1 / (n * (1 - b))
        expected = t_series(p, 2, x).float_value - (x + s) ** 2 + x ** 2
        assert auxiliary_apply(p, monomial(2), x) == pytest.approx(expected, abs=1e-8)


def test_array_and_scalar_agree():
    p = OperatorParams(8, 0.35)
    xs = np.array([0.0, 0.25, 1.0, 2.5])
    f = builtin("sin_bounded")
    arr = durrmeyer_apply(p, f, xs)
    assert arr.shape == xs.shape
    for x, v in zip(xs, arr):
        assert durrmeyer_apply(p, f, float(x)) == v
    aux = auxiliary_apply(p, f, xs)
    assert aux.shape == xs.shape


def test_error_estimate_reported():
    value, err = durrmeyer_apply_with_error(OperatorParams(10, 0.5), builtin("abs_kink", 1.0), 1.0)
    assert 0 < err < 1e-9
    assert value == durrmeyer_apply(OperatorParams(10, 0.5), builtin("abs_kink", 1.0), 1.0)


def test_weights_cached():
    p = OperatorParams(6, 0.2)
    f = builtin("exp_decay")
    assert durrmeyer_weights(p, f) is durrmeyer_weights(p, f)


@pytest.mark.parametrize("n,b", SWEEP)
def test_monomial_consistency_over_sweep(n, b):
    p = OperatorParams(n, b)
    for r in range(5):
        values = durrmeyer_apply(p, monomial(r), np.array(SWEEP_X))
        for x, v in zip(SWEEP_X, values):
            assert v == pytest.approx(t_series(p, r, x).float_value, abs=1e-8, rel=1e-10), (r, x)


@pytest.mark.parametrize("name", ["exp_decay", "sin_bounded", "step_smooth", "abs_kink", "e0", "e2"])
def test_positivity(name):
    f = builtin(name)
    xs = np.linspace(0, 5, 11)
    for n, b in [(3, 0.0), (10, 0.5), (40, 0.8)]:
        p = OperatorParams(n, b)
        if name == "sin_bounded":
            continue  # changes sign
        assert np.all(durrmeyer_apply(p, f, xs) >= -1e-12)
        assert all(jain_apply(p, f, float(x)) >= -1e-12 for x in xs)


def test_positivity_expression():
    f = from_expression("(t - 2)^2 * exp(-t)")
    p = OperatorParams(12, 0.3)
    assert np.all(durrmeyer_apply(p, f, np.linspace(0, 6, 13)) >= -1e-12)


@pytest.mark.parametrize("name", ["exp_decay", "sin_bounded", "step_smooth"])
def test_boundedness(name):
    f = builtin(name)
    sup = f.sup_on(0, 200, 200001)
    for n, b in [(2, 0.0), (10, 0.5), (40, 0.75)]:
        vals = durrmeyer_apply(OperatorParams(n, b), f, np.linspace(0, 6, 25))
        assert np.all(np.abs(vals) <= sup + 1e-10)


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(-3, 3), gamma=st.floats(-3, 3), x=st.floats(0, 4),
       n=st.sampled_from([2, 7, 15]), b=st.sampled_from([0.0, 0.3, 0.6]))
def test_linearity(alpha, gamma, x, n, b):
    p = OperatorParams(n, b)
    # smooth summands: an expression carries no kink hint for the quadrature
    f, g = builtin("exp_decay"), builtin("sin_bounded")
    h = from_expression(f"({alpha!r})*exp(-t) + ({gamma!r})*sin(t)/(1 + t)")
    lhs = durrmeyer_apply(p, h, x)
    rhs = alpha * durrmeyer_apply(p, f, x) + gamma * durrmeyer_apply(p, g, x)
    assert lhs == pytest.approx(rhs, abs=1e-10)
    lhs = jain_apply(p, h, x)
    rhs = alpha * jain_apply(p, f, x) + gamma * jain_apply(p, g, x)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_errors():
    p = OperatorParams(5, 0.5)
    with pytest.raises(DomainError):
        jain_apply(p, monomial(1), -1.0)
    with pytest.raises(DomainError):
        durrmeyer_apply(p, monomial(1), np.array([1.0, -1.0]))
    with pytest.raises(SaturationError):
        jain_apply(OperatorParams(1, 0.9), monomial(1), 1.0, TruncationPolicy(1e-12, hard_cap=40))
    with pytest.raises(AccuracyError) as info:
        durrmeyer_apply(OperatorParams(5, 0.5), from_expression("sin(40*t)"), 1.0,
                        quad=QuadratureConfig(1e-15, 1e-300, 2))
    assert "k=" in str(info.value)
