import math

import numpy as np
import pytest

from jain_durrmeyer.errors import DomainError, ExprEvalError
from jain_durrmeyer.functions import (BUILTINS, Growth, builtin, classify_growth,
                                      finite_difference_derivatives, from_expression, monomial,
                                      resolve_function)
from jain_durrmeyer.expr import parse_expr


def test_builtins_values():
    t = np.array([0.0, 0.5, 2.0])
    for r in range(6):
        np.testing.assert_array_equal(monomial(r)(t), t ** r)
    np.testing.assert_allclose(builtin("exp_decay")(t), np.exp(-t))
    np.testing.assert_allclose(builtin("sin_bounded")(t), np.sin(t) / (1 + t))
    np.testing.assert_allclose(builtin("abs_kink", 1.5)(t), np.abs(t - 1.5))
    step = builtin("step_smooth", 1.0)
    assert step(1.0) == pytest.approx(0.5)
    assert step(10.0) == pytest.approx(1.0) and step(-10.0 + 10.0) < 0.02
    assert builtin("abs_kink", 2.0).breakpoints == (2.0,)
    with pytest.raises(DomainError):
        builtin("cosh")
    with pytest.raises(DomainError):
        builtin("abs_kink", -1.0)


@pytest.mark.parametrize("name", BUILTINS)
def test_builtin_growth_is_an_actual_bound(name):
    f = builtin(name)
    t = np.concatenate([np.linspace(0, 50, 5001), np.logspace(2, 6, 200)])
    assert np.all(np.abs(f(t)) <= f.growth.bound(0) * (1 + t) ** f.growth.degree + 1e-12)


@pytest.mark.parametrize("name", BUILTINS)
def test_builtin_derivatives(name):
    f = builtin(name)
    for x in (0.3, 1.7, 3.2):
        d1, d2 = finite_difference_derivatives(f, x, 1e-3)
        assert float(f.d1(x)) == pytest.approx(d1, abs=1e-7)
        assert float(f.d2(x)) == pytest.approx(d2, abs=1e-5)


@pytest.mark.parametrize("text,degree", [
    ("exp(-t)", 0), ("sin(t)/(1 + t)", 0), ("t", 1), ("abs(t - 3)", 1), ("t^2 + 1", 2),
    ("sqrt(t)", 1), ("t^3 * exp(-t) + t", 1), ("min(t, 1)", 0), ("t^5 - t", 5),
])
def test_growth_classification(text, degree):
    g = classify_growth(parse_expr(text))
    assert g.degree == degree
    f = from_expression(text)
    t = np.concatenate([np.linspace(0, 10, 1001), np.logspace(1, 4, 100)])
    assert np.all(np.abs(f(t)) <= g.bound(0) * (1 + t) ** g.degree)


def test_growth_rejects_exponential():
    with pytest.raises(DomainError):
        classify_growth(parse_expr("exp(t)"))


def test_growth_labels():
    assert Growth(0, 1.0).label() == "bounded"
    assert Growth(3, 1.0).label() == "polynomial(3)"


def test_resolve_function():
    assert resolve_function("abs_kink:1.5").name == "abs_kink:1.5"
    assert resolve_function("e2").name == "e2"
    f = resolve_function("exp(-t)*(1+t)")
    assert f.kind == "expression" and f(0.0) == 1.0
    assert f == resolve_function("exp(-t) * (1 + t)")
    with pytest.raises(ExprEvalError):
        resolve_function("1/t")


def test_finite_differences():
    f = from_expression("t^3")
    d1, d2 = finite_difference_derivatives(f, 2.0)
    assert d1 == pytest.approx(12.0, rel=1e-9)
    assert d2 == pytest.approx(12.0, rel=1e-6)
    with pytest.raises(DomainError):
        finite_difference_derivatives(f, 0.0)


def test_function_specs_hashable_and_equal_by_name():
    assert builtin("e2") == monomial(2)
    assert hash(builtin("exp_decay")) == hash(builtin("exp_decay"))
    assert builtin("abs_kink", 1.0) != builtin("abs_kink", 2.0)
