"""The Jain basis L_{n,k}^{(beta)}(x) and truncation of the sums over k.

    L_{n,k}(x) = n x (n x + k beta)^(k-1) exp(-(n x + k beta)) / k!

For fixed (n, x) the weights over k form a generalized (Consul) Poisson
distribution with mean n x / (1 - beta). All evaluation happens in log space
because (n x + k beta)^(k-1) overflows double precision long before the
weights become negligible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .errors import DomainError


@dataclass(frozen=True)
class OperatorParams:
    """Operator index ``n`` and shape parameter ``beta`` in [0, 1).

    ``beta`` may be given as a Fraction (or a 'p/q' string); the exact value is
    then kept in ``exact`` and enables rational-mode moment evaluation.
    """

    n: int
    beta: float
    exact: Optional[Fraction] = field(default=None)

    def __post_init__(self):
        beta = self.beta
        exact = self.exact
        if isinstance(beta, str):
            beta = Fraction(beta.strip()) if "/" in beta else float(beta)
        if isinstance(beta, Fraction):
            exact = beta
        elif isinstance(beta, int) and not isinstance(beta, bool):
            exact = Fraction(beta)
        if exact is not None:
            exact = Fraction(exact)
            beta = float(exact)
        beta = float(beta)
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not 0.0 <= beta < 1.0:
            raise DomainError(f"beta must lie in [0, 1), got {beta}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "exact", exact)

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def with_n(self, n: int) -> "OperatorParams":
        return OperatorParams(n, self.exact if self.is_exact else self.beta)


@dataclass(frozen=True)
class TruncationPolicy:
    mass_tol: float = 1e-12
    hard_cap: int = 1_000_000

    def __post_init__(self):
        if not 0.0 < self.mass_tol < 1.0:
            raise DomainError(f"mass_tol must lie in (0, 1), got {self.mass_tol}")
        if self.hard_cap < 1:
            raise DomainError(f"hard_cap must be >= 1, got {self.hard_cap}")


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class Truncation:
    """Result of ``truncation_index``: the cut-off and the mass it captures."""

    k_max: int
    mass: float
    saturated: bool = False


def basis_log_values(params: OperatorParams, k, x: float) -> np.ndarray:
    """Vectorised ln L_{n,k}(x) over an integer array ``k`` (-inf for zero weights)."""
    k = np.asarray(k, dtype=np.int64)
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    out = np.empty(k.shape, dtype=float)
    zero = k == 0
    nx = params.n * x
    out[zero] = -nx
    pos = ~zero
    if not np.any(pos):
        return out
    if x == 0.0:
        out[pos] = -np.inf
        return out
    kp = k[pos].astype(float)
    shifted = nx + kp * params.beta
    out[pos] = (math.log(nx) + (kp - 1.0) * np.log(shifted) - shifted
                - gammaln(kp + 1.0))
    return out


def basis_log_value(params: OperatorParams, k: int, x: float) -> float:
    """ln L_{n,k}(x); -inf when x = 0 and k >= 1, and 0 for k = 0, x = 0."""
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if k == 0:
        return -params.n * x
    if x == 0.0:
        return -math.inf
    nx = params.n * x
    shifted = nx + k * params.beta
    return math.log(nx) + (k - 1) * math.log(shifted) - shifted - math.lgamma(k + 1)


def basis_value(params: OperatorParams, k: int, x: float) -> float:
    return math.exp(basis_log_value(params, k, x))


def basis_values(params: OperatorParams, x: float, k_max: int) -> np.ndarray:
    """L_{n,k}(x) for k = 0..k_max."""
    return np.exp(basis_log_values(params, np.arange(k_max + 1), x))


def basis_mass(params: OperatorParams, x: float, k_max: int) -> float:
    """Partial mass sum_{k <= k_max} L_{n,k}(x)."""
    return math.fsum(basis_values(params, x, k_max))


def _initial_guess(params: OperatorParams, x: float) -> int:
    nx = params.n * x
    one_minus = 1.0 - params.beta
    mean = nx / one_minus
    sd = math.sqrt(nx) / one_minus ** 1.5
    return int(math.ceil(mean + 12.0 * sd + 50.0))


def truncation_index(params: OperatorParams, x: float,
                     policy: TruncationPolicy = DEFAULT_POLICY) -> Truncation:
    """Smallest k_max whose partial basis mass reaches 1 - mass_tol.

    Past the mean the weights decay at least geometrically, so once the
    remaining tail is bounded below 1e-3 * mass_tol the cut is accepted even
    if rounding keeps the computed mass a few ulps short of the target.
    """
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return Truncation(0, 1.0)
    target = 1.0 - policy.mass_tol
    mean = params.n * x / (1.0 - params.beta)
    guess = min(_initial_guess(params, x), policy.hard_cap)
    while True:
        values = basis_values(params, x, guess)
        cum = np.cumsum(values)
        hit = np.nonzero(cum >= target)[0]
        if hit.size:
            k_max = int(hit[0])
            return Truncation(k_max, math.fsum(values[: k_max + 1]))
        k_tail = _tail_cut(values, mean, policy.mass_tol)
        if k_tail is not None:
            return Truncation(k_tail, math.fsum(values[: k_tail + 1]))
        if guess >= policy.hard_cap:
            return Truncation(guess, math.fsum(values), saturated=True)
        guess = min(2 * guess, policy.hard_cap)


def _tail_cut(values: np.ndarray, mean: float, mass_tol: float) -> Optional[int]:
    start = int(math.ceil(mean)) + 1
    if start + 1 >= values.size:
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = values[start + 1:] / values[start:-1]
    for i, rho in enumerate(ratio):
        k = start + i
        if values[k] == 0.0:
            return k
        if rho < 1.0 and values[k + 1] / (1.0 - rho) <= 1e-3 * mass_tol:
            return k
    return None
