"""Numerical checks of the convergence theory for the Durrmeyer operator.

Moduli of continuity are discrete: they are suprema over a uniform grid, so
they are lower bounds of the true moduli that converge as the step shrinks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .basis import DEFAULT_POLICY, OperatorParams, TruncationPolicy
from .errors import DomainError
from .functions import FunctionSpec, finite_difference_derivatives, monomial
from .moments import central_moment_series
from .operators import durrmeyer_apply
from .closed_forms import t_closed
from .quadrature import DEFAULT_QUAD, QuadratureConfig

DEFAULT_STEP = 1e-3
DEFAULT_NOISE_FACTOR = 100.0


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [a, b] with step close to ``h`` (b - a is split evenly)."""

    a: float
    b: float
    h: float = DEFAULT_STEP

    def __post_init__(self):
        if self.a < 0:
            raise DomainError(f"grid must lie in [0, inf), got a={self.a}")
        if not self.b > self.a:
            raise DomainError(f"grid needs b > a, got [{self.a}, {self.b}]")
        if not self.h > 0:
            raise DomainError(f"grid step must be positive, got {self.h}")

    @property
    def size(self) -> int:
        return int(round((self.b - self.a) / self.h)) + 1

    @property
    def step(self) -> float:
        return (self.b - self.a) / (self.size - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.size)

    def padded(self, margin: float = 1.0, h: float = DEFAULT_STEP) -> "Grid":
        """The modulus domain [a, b + margin] used for sup-norms and moduli."""
        return Grid(self.a, self.b + margin, h)


# --------------------------------------------------------------------------
# moduli of continuity
# --------------------------------------------------------------------------

def _forward_difference(values: np.ndarray, m: int, j: int) -> np.ndarray:
    size = values.size - m * j
    out = np.zeros(size)
    for i in range(m + 1):
        out += (-1) ** (m - i) * math.comb(m, i) * values[i * j: i * j + size]
    return out


@lru_cache(maxsize=128)
def _modulus_curve(f: FunctionSpec, m: int, grid: Grid, j_max: int) -> np.ndarray:
    values = np.asarray(f(grid.points), dtype=float)
    sups = np.zeros(j_max + 1)
    for j in range(1, j_max + 1):
        sups[j] = np.max(np.abs(_forward_difference(values, m, j)))
    curve = np.maximum.accumulate(sups)
    curve.setflags(write=False)
    return curve


def _difference_at(f: FunctionSpec, m: int, step: float, grid: Grid) -> float:
    x = grid.points
    x = x[x + m * step <= grid.b + 1e-12 * max(1.0, grid.b)]
    total = np.zeros(x.size)
    for i in range(m + 1):
        total += (-1) ** (m - i) * math.comb(m, i) * f(x + i * step)
    return float(np.max(np.abs(total)))


def modulus(f: FunctionSpec, m: int, delta: float, grid: Grid) -> float:
    """Discrete omega_m(f, delta) = sup_{0 < h <= delta} sup_x |Delta_h^m f(x)|.

    Steps are the grid multiples up to ``delta`` plus ``delta`` itself, and x
    runs over grid points with x + m h inside the grid.
    """
    if m < 1:
        raise DomainError(f"modulus order must be >= 1, got {m}")
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    if m * delta > grid.b - grid.a:
        raise DomainError(
            f"no admissible step: {m} * {delta} exceeds the grid length {grid.b - grid.a}")
    j_max = int(math.floor(delta / grid.step + 1e-9))
    on_grid = float(_modulus_curve(f, m, grid, j_max)[j_max]) if j_max >= 1 else 0.0
    return max(on_grid, _difference_at(f, m, delta, grid))


def modulus_curve(f: FunctionSpec, m: int, deltas: Sequence[float], grid: Grid) -> np.ndarray:
    return np.array([modulus(f, m, d, grid) for d in deltas])


def delta_n(params: OperatorParams, x: float) -> float:
    """2x/(n(1-b)) + 2/(n^2(1-b)) + 1/(n^2(1-b)^2), the second-moment bound of the auxiliary operator."""
    n, q = params.n, 1.0 - params.beta
    return 2 * x / (n * q) + 2 / (n * n * q) + 1 / (n * n * q * q)


# --------------------------------------------------------------------------
# Korovkin test
# --------------------------------------------------------------------------

def korovkin_tolerance(params: OperatorParams, r: int, xs: np.ndarray) -> float:
    """Default tolerance: 20% above the closed-form leading behaviour of T_r - x^r."""
    if r == 0:
        return 1e-10
    gap = max(abs(t_closed(params, r, float(x)) - float(x) ** r) for x in xs)
    return 1.2 * gap + 1e-10


@dataclass
class KorovkinReport:
    beta: float
    interval: tuple
    n_list: list
    points: int
    distances: dict            # r -> list of sup-norm distances, aligned with n_list
    tolerances: dict           # r -> tolerance at the largest n
    monotone: dict
    passed: bool

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "interval": list(self.interval),
            "n_list": list(self.n_list),
            "points": self.points,
            "distances": {f"e{r}": list(v) for r, v in self.distances.items()},
            "tolerances": {f"e{r}": v for r, v in self.tolerances.items()},
            "monotone": {f"e{r}": v for r, v in self.monotone.items()},
            "passed": self.passed,
        }


def korovkin_check(beta, interval: tuple = (0.0, 2.0), n_list: Sequence[int] = (10, 20, 50, 100, 200),
                   tolerance: Optional[Callable[[OperatorParams, int, np.ndarray], float]] = None,
                   points: int = 41, policy: TruncationPolicy = DEFAULT_POLICY,
                   quad: QuadratureConfig = DEFAULT_QUAD) -> KorovkinReport:
    """sup |D_n(e_r) - e_r| on a compact interval for r = 0, 1, 2 over increasing n.

    ``tolerance(params, r, xs)`` gives the bound required at the largest n.
    Distances for e_1 and e_2 must decrease strictly; e_0 only has to stay
    within its tolerance since it is preserved up to truncation.
    """
    a, b = float(interval[0]), float(interval[1])
    Grid(a, b)
    tolerance = tolerance or korovkin_tolerance
    xs = np.linspace(a, b, points)
    n_list = sorted(int(n) for n in n_list)
    distances = {0: [], 1: [], 2: []}
    for n in n_list:
        params = OperatorParams(n, beta)
        for r in range(3):
            d = durrmeyer_apply(params, monomial(r), xs, policy, quad)
            distances[r].append(float(np.max(np.abs(d - xs ** r))))
    last = OperatorParams(n_list[-1], beta)
    tols = {r: tolerance(last, r, xs) for r in range(3)}
    monotone = {0: all(d <= tols[0] for d in distances[0])}
    for r in (1, 2):
        monotone[r] = all(u > v for u, v in zip(distances[r], distances[r][1:]))
    passed = all(monotone.values()) and all(distances[r][-1] <= tols[r] for r in range(3))
    return KorovkinReport(last.beta, (a, b), n_list, points, distances, tols, monotone, passed)


# --------------------------------------------------------------------------
# Voronovskaja limit
# --------------------------------------------------------------------------

def richardson(values: Sequence[float], ratio: float = 2.0, levels: Optional[int] = None) -> list:
    """Richardson table for a sequence with error expansion in powers of 1/n.

    Row i holds the i-th eliminated order; the last entry of the last row is
    the extrapolated limit.
    """
    table = [list(values)]
    levels = len(values) - 1 if levels is None else min(levels, len(values) - 1)
    for p in range(1, levels + 1):
        prev = table[-1]
        factor = ratio ** p
        table.append([(factor * prev[i + 1] - prev[i]) / (factor - 1) for i in range(len(prev) - 1)])
    return table


@dataclass
class VoronovskajaReport:
    f: str
    x: float
    beta: float
    n_list: list
    scaled_errors: list
    extrapolated: list
    limit: float
    formula: float
    gap: float
    gaps: list
    gap_decreasing: bool

    def to_dict(self) -> dict:
        return {
            "f": self.f,
            "x": self.x,
            "beta": self.beta,
            "n_list": list(self.n_list),
            "scaled_errors": list(self.scaled_errors),
            "extrapolated": list(self.extrapolated),
            "limit": self.limit,
            "formula": self.formula,
            "gap": self.gap,
            "gaps": list(self.gaps),
            "gap_decreasing": self.gap_decreasing,
        }


def derivatives(f: FunctionSpec, x: float) -> tuple[float, float]:
    """(f'(x), f''(x)), analytic when known and finite-differenced otherwise."""
    if f.has_derivatives:
        return float(f.d1(x)), float(f.d2(x))
    return finite_difference_derivatives(f, x)


def voronovskaja(f: FunctionSpec, x: float, beta, n_list: Sequence[int] = (10, 20, 40, 80, 160, 320),
                 levels: int = 2, policy: TruncationPolicy = DEFAULT_POLICY,
                 quad: QuadratureConfig = DEFAULT_QUAD) -> VoronovskajaReport:
    """n [D_n(f, x) - f(x)] along a doubling n_list, extrapolated in 1/n.

    The limit is compared with f'(x)/(1-b) + x f''(x)/(1-b).
    """
    if not x > 0:
        raise DomainError(f"Voronovskaja check needs x > 0, got {x}")
    n_list = [int(n) for n in n_list]
    if len(n_list) < 2 or any(v != 2 * u for u, v in zip(n_list, n_list[1:])):
        raise DomainError(f"n_list must be a doubling sequence, got {n_list}")
    fx = float(f(x))
    scaled = []
    for n in n_list:
        params = OperatorParams(n, beta)
        scaled.append(n * (durrmeyer_apply(params, f, x, policy, quad) - fx))
    beta_f = OperatorParams(1, beta).beta
    d1, d2 = derivatives(f, x)
    formula = (d1 + x * d2) / (1.0 - beta_f)
    table = richardson(scaled, 2.0, levels)
    limit = table[-1][-1]
    gaps = [abs(s - formula) for s in scaled]
    decreasing = all(v < u or v <= 1e-9 * max(1.0, abs(formula)) for u, v in zip(gaps, gaps[1:]))
    return VoronovskajaReport(f.name, float(x), beta_f, n_list, scaled, list(table[-1]), limit,
                              formula, abs(limit - formula), gaps, decreasing)


# --------------------------------------------------------------------------
# direct estimate
# --------------------------------------------------------------------------

@dataclass
class BoundReport:
    f: str
    grid: Grid
    n: int
    beta: float
    points: np.ndarray
    lhs: np.ndarray
    omega2_term: np.ndarray
    omega_term: float
    minimal_c: float
    inconclusive: list = field(default_factory=list)

    def holds(self, c: float, tol: float = 1e-10) -> bool:
        return bool(np.all(self.lhs <= c * self.omega2_term + self.omega_term + tol))

    def to_dict(self) -> dict:
        return {
            "f": self.f,
            "interval": [self.grid.a, self.grid.b],
            "n": self.n,
            "beta": self.beta,
            "lhs_sup": float(np.max(self.lhs)),
            "omega_term": self.omega_term,
            "minimal_c": self.minimal_c,
            "inconclusive": list(self.inconclusive),
            "rows": [
                {"x": float(x), "lhs": float(l), "omega2_term": float(w2),
                 "bound_c10": float(10.0 * w2 + self.omega_term)}
                for x, l, w2 in zip(self.points, self.lhs, self.omega2_term)
            ],
        }


def bound_check(f: FunctionSpec, params: OperatorParams, grid: Grid = Grid(0.0, 4.0, 0.05),
                margin: float = 1.0, step: float = DEFAULT_STEP,
                policy: TruncationPolicy = DEFAULT_POLICY,
                quad: QuadratureConfig = DEFAULT_QUAD, tol: float = 1e-10) -> BoundReport:
    """Pointwise |D_n(f,x) - f(x)| against omega_2(f, sqrt(delta_n(x))) and omega(f, 1/(n(1-b))).

    The minimal C is the smallest constant for which
    lhs <= C omega_2-term + omega-term holds at every grid point. Points where
    the omega_2-term vanishes but lhs exceeds the omega-term by more than
    ``tol`` (quadrature noise) are listed as inconclusive.
    """
    xs = grid.points
    domain = grid.padded(margin, step)
    lhs = np.abs(durrmeyer_apply(params, f, xs, policy, quad) - f(xs))
    w1 = modulus(f, 1, 1.0 / (params.n * (1.0 - params.beta)), domain)
    w2 = np.array([modulus(f, 2, math.sqrt(delta_n(params, float(x))), domain) for x in xs])
    residual = lhs - w1
    minimal = 0.0
    inconclusive = []
    for x, res, w in zip(xs, residual, w2):
        if w > tol:
            minimal = max(minimal, float(res / w))
        elif res > tol:
            inconclusive.append(float(x))
    return BoundReport(f.name, grid, params.n, params.beta, xs, lhs, w2, w1, minimal, inconclusive)


# --------------------------------------------------------------------------
# decay order of central moments
# --------------------------------------------------------------------------

@dataclass
class OrderReport:
    r: int
    beta: float
    x: float
    n_list: list
    moments: list
    error_bounds: list
    slope: float
    required: float
    below_noise: list
    passed: bool

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "beta": self.beta,
            "x": self.x,
            "n_list": list(self.n_list),
            "moments": list(self.moments),
            "error_bounds": list(self.error_bounds),
            "slope": self.slope,
            "required_max_slope": self.required,
            "below_noise": list(self.below_noise),
            "passed": self.passed,
        }


def order_check(r: int, beta, x: float, n_list: Sequence[int] = (10, 20, 40, 80, 160),
                slack: float = 0.15, policy: TruncationPolicy = DEFAULT_POLICY) -> OrderReport:
    """Least-squares slope of log|mu_{n,r}(x)| against log n.

    The central moment should decay like n^{-floor((r+1)/2)}; the check passes
    when the fitted slope is at most -floor((r+1)/2) + slack and no moment is
    within DEFAULT_NOISE_FACTOR of its error bound.
    """
    if r < 1:
        raise DomainError(f"order check needs r >= 1, got {r}")
    if not x > 0:
        raise DomainError(f"order check needs x > 0, got {x}")
    n_list = [int(n) for n in n_list]
    values, bounds, noisy = [], [], []
    for n in n_list:
        mv = central_moment_series(OperatorParams(n, beta), r, x, policy)
        values.append(mv.float_value)
        bounds.append(mv.abs_error_bound)
        if abs(mv.float_value) <= DEFAULT_NOISE_FACTOR * mv.abs_error_bound:
            noisy.append(n)
    slope = float(np.polyfit(np.log(n_list), np.log(np.abs(values)), 1)[0])
    required = -((r + 1) // 2) + slack
    beta_f = OperatorParams(1, beta).beta
    return OrderReport(r, beta_f, float(x), n_list, values, bounds, slope, required, noisy,
                       slope <= required and not noisy)
