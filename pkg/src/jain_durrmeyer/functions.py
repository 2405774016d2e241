"""Test functions f on [0, inf): named builtins and parsed expressions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, ExprEvalError
from .expr import Node, evaluate, parse_expr, to_text

# probe points for growth classification of expressions
_PROBE = np.unique(np.concatenate([np.linspace(0.0, 10.0, 201), np.logspace(1.0, 4.0, 61)]))
_MAX_DEGREE = 12


@dataclass(frozen=True)
class Growth:
    """|f(t)| <= constant * (1 + t)^degree on [0, inf); degree 0 means bounded."""

    degree: int
    constant: float

    @property
    def bounded(self) -> bool:
        return self.degree == 0

    def bound(self, t_max: float) -> float:
        return self.constant * (1.0 + t_max) ** self.degree

    def label(self) -> str:
        return "bounded" if self.bounded else f"polynomial({self.degree})"


@dataclass(frozen=True)
class FunctionSpec:
    """A named builtin or a parsed expression.

    ``breakpoints`` lists points where f is not smooth; quadrature seeds panel
    edges there. ``d1``/``d2`` are analytic derivatives when known.
    """

    kind: str
    name: str
    growth: Growth
    breakpoints: tuple = ()
    expression: Optional[Node] = None
    _fn: Optional[Callable] = field(default=None, compare=False, repr=False)
    _d1: Optional[Callable] = field(default=None, compare=False, repr=False)
    _d2: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __call__(self, t):
        if self.expression is not None:
            return evaluate(self.expression, t)
        return self._fn(np.asarray(t, dtype=float))

    @property
    def has_derivatives(self) -> bool:
        return self._d1 is not None and self._d2 is not None

    def d1(self, t):
        return self._d1(np.asarray(t, dtype=float))

    def d2(self, t):
        return self._d2(np.asarray(t, dtype=float))

    def sup_on(self, a: float, b: float, points: int = 4001) -> float:
        grid = np.linspace(a, b, points)
        return float(np.max(np.abs(self(grid))))


def _monomial(r: int) -> FunctionSpec:
    def fn(t):
        return t ** r

    def d1(t):
        return r * t ** (r - 1) if r >= 1 else np.zeros_like(t)

    def d2(t):
        return r * (r - 1) * t ** (r - 2) if r >= 2 else np.zeros_like(t)

    return FunctionSpec("builtin", f"e{r}", Growth(r, 1.0), (), None, fn, d1, d2)


def _exp_decay() -> FunctionSpec:
    return FunctionSpec("builtin", "exp_decay", Growth(0, 1.0), (), None,
                        lambda t: np.exp(-t), lambda t: -np.exp(-t), lambda t: np.exp(-t))


def _sin_bounded() -> FunctionSpec:
    def fn(t):
        return np.sin(t) / (1.0 + t)

    def d1(t):
        return np.cos(t) / (1.0 + t) - np.sin(t) / (1.0 + t) ** 2

    def d2(t):
        return (-np.sin(t) / (1.0 + t) - 2.0 * np.cos(t) / (1.0 + t) ** 2
                + 2.0 * np.sin(t) / (1.0 + t) ** 3)

    return FunctionSpec("builtin", "sin_bounded", Growth(0, 1.0), (), None, fn, d1, d2)


def _abs_kink(c: float) -> FunctionSpec:
    if c < 0:
        raise DomainError(f"abs_kink needs c >= 0, got {c}")
    return FunctionSpec(
        "builtin", f"abs_kink:{c!r}", Growth(1, max(1.0, c)), (float(c),), None,
        lambda t: np.abs(t - c), lambda t: np.sign(t - c), lambda t: np.zeros_like(t))


def _step_smooth(c: float, width: float = 0.25) -> FunctionSpec:
    def fn(t):
        return 0.5 * (1.0 + np.tanh((t - c) / width))

    def d1(t):
        return 0.5 / width / np.cosh((t - c) / width) ** 2

    def d2(t):
        u = (t - c) / width
        return -np.tanh(u) / np.cosh(u) ** 2 / width ** 2

    return FunctionSpec("builtin", f"step_smooth:{c!r}", Growth(0, 1.0), (), None, fn, d1, d2)


BUILTINS = ("e0", "e1", "e2", "e3", "e4", "e5", "exp_decay", "sin_bounded", "abs_kink",
            "step_smooth")


def builtin(name: str, c: float = 1.0) -> FunctionSpec:
    """Builtin by name; ``c`` is the kink/step location for abs_kink and step_smooth."""
    if name.startswith("e") and name[1:].isdigit() and 0 <= int(name[1:]) <= 5:
        return _monomial(int(name[1:]))
    if name == "exp_decay":
        return _exp_decay()
    if name == "sin_bounded":
        return _sin_bounded()
    if name == "abs_kink":
        return _abs_kink(float(c))
    if name == "step_smooth":
        return _step_smooth(float(c))
    raise DomainError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}")


def monomial(r: int) -> FunctionSpec:
    return _monomial(r)


def classify_growth(node: Node) -> Growth:
    """Smallest degree d with |f| <= C (1+t)^d on the probe grid, not rising at the far end."""
    near_grid = _PROBE[_PROBE <= 10.0]
    evaluate(node, near_grid)
    try:
        values = np.abs(evaluate(node, _PROBE))
    except ExprEvalError as exc:
        # finite near the origin but overflowing further out
        raise DomainError(f"expression grows faster than any admitted polynomial degree ({exc})") from None
    base = np.log1p(_PROBE)
    near = (_PROBE >= 10.0) & (_PROBE <= 1e3)
    far = _PROBE > 1e3
    for d in range(_MAX_DEGREE + 1):
        ratio = values / np.exp(d * base)
        if ratio[far].max() <= 2.0 * ratio[near].max() + 1e-300:
            return Growth(d, 1.5 * float(ratio.max()))
    raise DomainError("expression grows faster than any admitted polynomial degree")


def from_expression(text: str) -> FunctionSpec:
    node = parse_expr(text)
    try:
        growth = classify_growth(node)
    except ExprEvalError as exc:
        raise ExprEvalError(f"cannot evaluate {text!r} on [0, inf): {exc}") from exc
    return FunctionSpec("expression", to_text(node), growth, (), node)


def resolve_function(text: str) -> FunctionSpec:
    """Builtin name (``abs_kink:1.5`` style for parameters) or expression text."""
    head, _, arg = text.strip().partition(":")
    if head in BUILTINS:
        return builtin(head, float(arg) if arg else 1.0)
    return from_expression(text)


def finite_difference_derivatives(f: FunctionSpec, x: float, h: float = 1e-4) -> tuple[float, float]:
    """Central differences with one Richardson step, for expressions without analytic derivatives."""
    if x - 2 * h < 0:
        raise DomainError(f"finite differences need x >= {2 * h}, got {x}")

    def d1(step):
        return float((f(x + step) - f(x - step)) / (2 * step))

    def d2(step):
        return float((f(x + step) - 2 * f(x) + f(x - step)) / step ** 2)

    first = (4 * d1(h) - d1(2 * h)) / 3
    second = (4 * d2(h) - d2(2 * h)) / 3
    if not (math.isfinite(first) and math.isfinite(second)):
        raise DomainError(f"finite differences failed at x={x}")
    return first, second
