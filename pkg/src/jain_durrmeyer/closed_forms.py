"""Reference closed forms for the moments, and their gaps to the exact engine.

The formulas are kept verbatim, suspect coefficients included. The tables
below are written over generic scalars so that floats and Fractions both work.
Whether a closed form is an identity is decided by ``discrepancy_sweep``,
never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .basis import DEFAULT_POLICY, OperatorParams, TruncationPolicy
from .errors import DomainError, UnsupportedOrderError
from .moments import (MomentValue, central_moment_series, p_exact, s_ratio_exact,
                      series_support, t_series)

FAMILIES = ("jain_B", "S_closed", "P_closed", "T_closed", "mu_closed", "T_recur")
MAX_ORDER = {"jain_B": 5, "S_closed": 4, "P_closed": 5, "T_closed": 5, "mu_closed": 4,
             "T_recur": 5}
# families indexed by basis index k; the rest are evaluated at a point x
K_FAMILIES = ("S_closed", "P_closed")


@dataclass(frozen=True)
class ClosedFormId:
    family: str
    order: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown closed-form family {self.family!r}")
        lo = 1 if self.family == "T_recur" else 0
        if not lo <= self.order <= MAX_ORDER[self.family]:
            raise UnsupportedOrderError(
                f"{self.family} is defined for orders {lo}..{MAX_ORDER[self.family]}, "
                f"got {self.order}")

    @property
    def indexed_by_k(self) -> bool:
        return self.family in K_FAMILIES


def _check(family: str, r: int, lo: int = 0):
    if not lo <= r <= MAX_ORDER[family]:
        raise UnsupportedOrderError(
            f"{family} is defined for orders {lo}..{MAX_ORDER[family]}, got {r}")


# --------------------------------------------------------------------------
# generic formula tables: f(n, b, x) or f(n, b, k)
# --------------------------------------------------------------------------

def jain_closed_expr(r, n, b, x):
    q = 1 - b
    if r == 0:
        return x ** 0
    if r == 1:
        return x / q
    if r == 2:
        return x ** 2 / q ** 2 + x / (n * q ** 3)
    if r == 3:
        return x ** 3 / q ** 3 + 3 * x ** 2 / (n * q ** 4) + (1 + 2 * b) * x / (n ** 2 * q ** 5)
    if r == 4:
        return (x ** 4 / q ** 4 + 6 * x ** 3 / (n * q ** 5)
                + (7 + 8 * b) * x ** 2 / (n ** 2 * q ** 6)
                + (6 * b ** 2 + 8 * b + 1) * x / (n ** 3 * q ** 7))
    if r == 5:
        return (x ** 5 / q ** 5 + 10 * x ** 4 / (n * q ** 6)
                + 5 * (4 * b + 5) * x ** 3 / (n ** 2 * q ** 7)
                + 15 * (2 * b ** 2 + 4 * b + 1) * x ** 2 / (n ** 3 * q ** 8)
                + (24 * b ** 3 + 58 * b ** 2 + 22 * b + 1) * x / (n ** 4 * q ** 9))
    raise UnsupportedOrderError(f"jain_B is defined for orders 0..5, got {r}")


def s_closed_expr(r, b, k):
    q = 1 - b
    if r == 0:
        return k ** 0
    if r == 1:
        return q * k + b / q
    if r == 2:
        return q ** 2 * k ** 2 + 3 * b * k - b / q
    if r == 3:
        return q ** 3 * k ** 3 + 6 * b * q * k ** 2 + b * (7 * b - 4) * k / q + b / q
    if r == 4:
        return (q ** 4 * k ** 4 + 10 * b * q ** 2 * k ** 3 + 5 * b * (5 * b - 2) * k ** 2
                + 5 * b * (1 - 3 * b) * k / q - b / q)
    raise UnsupportedOrderError(f"S_closed is defined for orders 0..4, got {r}")


def p_closed_expr(r, n, b, k):
    q = 1 - b
    if r == 0:
        return k ** 0
    if r == 1:
        return (q * k + 1 / q) / n
    if r == 2:
        return (q ** 2 * k ** 2 + 3 * k + 2 / q) / n ** 2
    if r == 3:
        return (q ** 3 * k ** 3 + 6 * q * k ** 2 + (11 - 8 * b) * k / q + 6 / q) / n ** 3
    if r == 4:
        return (q ** 4 * k ** 4 + 10 * q ** 2 * k ** 3 + 5 * (7 - 4 * b) * k ** 2
                + 10 * (5 - 3 * b) * k / q + 24 / q) / n ** 4
    if r == 5:
        return (q ** 5 * k ** 5 + 15 * q ** 3 * k ** 4 + 5 * q * (17 - 8 * b) * k ** 3
                + 15 * (15 - 20 * b + 6 * b ** 2) * k ** 2 / q
                + (274 - 144 * b) * k / q + 120 / q) / n ** 5
    raise UnsupportedOrderError(f"P_closed is defined for orders 0..5, got {r}")


def t_closed_expr(r, n, b, x):
    q = 1 - b
    if r == 0:
        return x ** 0
    if r == 1:
        return x + 1 / (n * q)
    if r == 2:
        return x ** 2 + 4 * x / (n * q) + 2 / (n ** 2 * q)
    if r == 3:
        return (x ** 3 + 9 * x ** 2 / (n * q) + 6 * (3 - b) * x / (n ** 2 * q ** 2)
                + 6 / (n ** 3 * q))
    if r == 4:
        return (x ** 4 + 16 * x ** 3 / (n * q) + 12 * (6 - b) * x ** 2 / (n ** 2 * q ** 2)
                + 12 * (3 * b ** 2 - 6 * b + 8) * x / (n ** 3 * q ** 3) + 24 / (n ** 4 * q))
    if r == 5:
        return (x ** 5 + 25 * x ** 4 / (n * q) + 20 * (10 - b) * x ** 3 / (n ** 2 * q ** 2)
                + 120 * (b ** 2 - 2 * b + 5) * x ** 2 / (n ** 3 * q ** 3)
                + 120 * (5 - 6 * b + 6 * b ** 2 - b ** 3) * x / (n ** 4 * q ** 4)
                + 120 / (n ** 5 * q))
    raise UnsupportedOrderError(f"T_closed is defined for orders 0..5, got {r}")


def mu_closed_expr(r, n, b, x):
    q = 1 - b
    if r == 0:
        return x ** 0
    if r == 1:
        return 1 / (n * q) + 0 * x
    if r == 2:
        return 2 * x / (n * q) + 2 / (n ** 2 * q)
    if r == 3:
        return 12 * x / (n ** 2 * q ** 2) + 6 / (n ** 3 * q)
    if r == 4:
        # (1-beta)^2 in the x/n^3 term, where the T family implies (1-beta)^3
        return (12 * x ** 2 / (n ** 2 * q ** 2) + 12 * (6 - 2 * b + b ** 2) * x / (n ** 3 * q ** 2)
                + 24 / (n ** 4 * q))
    raise UnsupportedOrderError(f"mu_closed is defined for orders 0..4, got {r}")


# A_j^r coefficients, keyed (r, j)
A_TABLE = {
    (0, 0): lambda b: 1 + 2 * b,
    (1, 0): lambda b: 4 + 4 * b,
    (1, 1): lambda b: 2 * b + 6 * b ** 2,
    (2, 0): lambda b: 9 + 6 * b,
    (2, 1): lambda b: 6 * b + 30 * b ** 2,
    (2, 2): lambda b: 12 * b ** 2 + 24 * b ** 3,
    (3, 0): lambda b: 16 + 8 * b,
    (3, 1): lambda b: 12 * b + 84 * b ** 2,
    (3, 2): lambda b: 60 * b ** 2 + 96 * b ** 3,
    (3, 3): lambda b: -12 * b ** 2 + 48 * b ** 3 + 120 * b ** 4,
}


def a_coefficient(r: int, j: int, b):
    try:
        return A_TABLE[(r, j)](b)
    except KeyError:
        raise UnsupportedOrderError(f"A_{j}^{r} is not in the coefficient table") from None


def t_recurrence_expr(r, n, b, x):
    """T_r from T_{r-1}, ..., T_0 of the closed-form list through the A-coefficient recurrence."""
    if not 1 <= r <= 5:
        raise UnsupportedOrderError(f"T_recur covers orders 1..5, got {r}")
    q = 1 - b
    T = [t_closed_expr(j, n, b, x) for j in range(r)]
    value = (x + (2 * r - 1) / (n * q)) * T[r - 1]
    for j in range(r - 1):
        value = value - (-1) ** j * a_coefficient(r - 2, j, b) / (n ** (j + 2) * q ** (j + 2)) * T[r - j - 2]
    return value


# --------------------------------------------------------------------------
# float-facing operations
# --------------------------------------------------------------------------

def jain_moment_closed(params: OperatorParams, r: int, x: float) -> float:
    _check("jain_B", r)
    return float(jain_closed_expr(r, float(params.n), params.beta, float(x)))


def s_closed(k: int, beta: float, r: int) -> float:
    _check("S_closed", r)
    return float(s_closed_expr(r, float(beta), float(k)))


def p_closed(params: OperatorParams, k: int, r: int) -> float:
    _check("P_closed", r)
    return float(p_closed_expr(r, float(params.n), params.beta, float(k)))


def t_closed(params: OperatorParams, r: int, x: float) -> float:
    _check("T_closed", r)
    return float(t_closed_expr(r, float(params.n), params.beta, float(x)))


def t_recurrence_closed(params: OperatorParams, r: int, x: float) -> float:
    return float(t_recurrence_expr(r, float(params.n), params.beta, float(x)))


def mu_closed(params: OperatorParams, r: int, x: float) -> float:
    _check("mu_closed", r)
    return float(mu_closed_expr(r, float(params.n), params.beta, float(x)))


def jain_moment_series(params: OperatorParams, r: int, x: float,
                       policy: TruncationPolicy = DEFAULT_POLICY) -> MomentValue:
    """B_n(e_r, x) = sum_k L_{n,k}(x) (k/n)^r, summed directly."""
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return MomentValue(1.0 if r == 0 else 0.0, None, 0.0)
    support = series_support(params, x, policy)
    k = np.arange(support.k_sum + 1)
    terms = support.weights * (k / params.n) ** r
    tail = 2.0 * support.tail_mass * (2.0 * support.k_sum / params.n) ** r
    rounding = support.rounding * math.fsum(np.abs(terms))
    return MomentValue(math.fsum(terms), None, tail + rounding)


# --------------------------------------------------------------------------
# discrepancy measurement
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Sweep:
    """Grid of (n, beta, point); point is k for S/P families and x otherwise."""

    n_values: Sequence[int] = (1, 5, 10, 50)
    beta_values: Sequence = (0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
    points: Sequence = (0, 0.5, 1, 4)


DEFAULT_K_POINTS = tuple(range(0, 21))


@dataclass
class DiscrepancyRow:
    n: int
    beta: float
    beta_exact: Optional[Fraction]
    point: float
    exact: MomentValue
    closed: float
    abs_gap: float
    rel_gap: float
    exact_gap: Optional[Fraction] = None


@dataclass
class DiscrepancyReport:
    formula: ClosedFormId
    rows: list = field(default_factory=list)

    @property
    def max_abs_gap(self) -> float:
        return max((r.abs_gap for r in self.rows), default=0.0)

    @property
    def max_rel_gap(self) -> float:
        return max((r.rel_gap for r in self.rows), default=0.0)

    def as_records(self) -> list[dict]:
        out = []
        for r in self.rows:
            out.append({
                "family": self.formula.family,
                "order": self.formula.order,
                "n": r.n,
                "beta": r.beta_exact if r.beta_exact is not None else r.beta,
                "point": r.point,
                "exact": r.exact.exact_value if r.exact.exact_value is not None else r.exact.float_value,
                "exact_error_bound": r.exact.abs_error_bound,
                "closed": r.closed,
                "abs_gap": r.abs_gap,
                "rel_gap": r.rel_gap,
            })
        return out


def exact_value_for(formula: ClosedFormId, params: OperatorParams, point,
                    policy: TruncationPolicy = DEFAULT_POLICY) -> MomentValue:
    """Engine value that a closed-form family is compared against."""
    fam, r = formula.family, formula.order
    if fam == "S_closed":
        k = int(point)
        x = params.exact * k if params.is_exact else params.beta * k
        v = s_ratio_exact(k, x, r)
        if isinstance(v, Fraction):
            return MomentValue.exact(v)
        return MomentValue(float(v), None, 8 * (k + r + 2) * 2.2e-16 * abs(float(v)))
    if fam == "P_closed":
        return p_exact(params, int(point), r)
    if fam == "jain_B":
        return jain_moment_series(params, r, float(point), policy)
    if fam in ("T_closed", "T_recur"):
        return t_series(params, r, float(point), policy)
    if fam == "mu_closed":
        return central_moment_series(params, r, float(point), policy)
    raise DomainError(f"unknown family {fam!r}")


def closed_value_for(formula: ClosedFormId, params: OperatorParams, point, exact: bool = False):
    fam, r = formula.family, formula.order
    if exact and params.is_exact:
        n, b, p = params.n, params.exact, Fraction(point)
    else:
        n, b, p = float(params.n), params.beta, float(point)
    if fam == "S_closed":
        return s_closed_expr(r, b, p)
    if fam == "P_closed":
        return p_closed_expr(r, n, b, p)
    if fam == "jain_B":
        return jain_closed_expr(r, n, b, p)
    if fam == "T_closed":
        return t_closed_expr(r, n, b, p)
    if fam == "T_recur":
        return t_recurrence_expr(r, n, b, p)
    return mu_closed_expr(r, n, b, p)


def discrepancy_sweep(formula: ClosedFormId, sweep: Optional[Sweep] = None,
                      policy: TruncationPolicy = DEFAULT_POLICY) -> DiscrepancyReport:
    """Compare a closed-form family against the exact engine over a parameter grid."""
    if sweep is None:
        sweep = Sweep(points=DEFAULT_K_POINTS) if formula.indexed_by_k else Sweep()
    report = DiscrepancyReport(formula)
    for n in sweep.n_values:
        for beta in sweep.beta_values:
            params = OperatorParams(int(n), beta)
            for point in sweep.points:
                if formula.family == "S_closed" and int(point) < 1:
                    continue
                ev = exact_value_for(formula, params, point, policy)
                exact_gap = None
                if ev.exact_value is not None:
                    closed_exact = closed_value_for(formula, params, point, exact=True)
                    if isinstance(closed_exact, Fraction):
                        exact_gap = ev.exact_value - closed_exact
                closed = float(closed_value_for(formula, params, point))
                if exact_gap is not None:
                    abs_gap = abs(float(exact_gap))
                else:
                    abs_gap = abs(ev.float_value - closed)
                denom = abs(ev.float_value)
                rel_gap = abs_gap / denom if denom > 0 else (0.0 if abs_gap == 0 else math.inf)
                report.rows.append(DiscrepancyRow(
                    params.n, params.beta, params.exact, point, ev, closed, abs_gap, rel_gap,
                    exact_gap))
    return report
