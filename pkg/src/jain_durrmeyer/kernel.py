"""Exact-arithmetic and special-function substrate.

Everything here is pure. Stirling tables are built once per size and cached;
the returned objects are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, UnsupportedParametersError

ExactRational = Fraction


@dataclass(frozen=True)
class StirlingTable:
    """Unsigned Stirling numbers of the first kind, c(m, j) for 0 <= j <= m <= max_order.

    ``rows[m][j]`` is the coefficient of y**j in the rising factorial
    y (y+1) ... (y+m-1).
    """

    max_order: int
    rows: tuple[tuple[int, ...], ...]

    @classmethod
    def build(cls, max_order: int) -> "StirlingTable":
        if max_order < 1:
            raise DomainError(f"max_order must be >= 1, got {max_order}")
        rows = [(1,)]
        for m in range(max_order):
            prev = rows[-1]
            # c(m+1, j) = c(m, j-1) + m c(m, j)
            row = [0] * (m + 2)
            for j in range(1, m + 2):
                row[j] = prev[j - 1] + (m * prev[j] if j <= m else 0)
            rows.append(tuple(row))
        return cls(max_order, tuple(rows))

    def __call__(self, m: int, j: int) -> int:
        if not 0 <= m <= self.max_order:
            raise DomainError(f"order m={m} outside table range [0, {self.max_order}]")
        if not 0 <= j <= m:
            raise DomainError(f"index j={j} outside [0, {m}]")
        return self.rows[m][j]


@lru_cache(maxsize=None)
def stirling_table(max_order: int) -> StirlingTable:
    return StirlingTable.build(max_order)


def _table_for(m: int) -> StirlingTable:
    size = 16
    while size < m:
        size *= 2
    return stirling_table(size)


def stirling1_unsigned(m: int, j: int) -> int:
    """Unsigned Stirling number of the first kind c(m, j), m >= 1."""
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    if not 0 <= j <= m:
        raise DomainError(f"j must lie in [0, {m}], got {j}")
    return _table_for(m)(m, j)


def rising_factorial(y, m: int):
    """y (y+1) ... (y+m-1); 1 when m == 0. Keeps the scalar kind of ``y``."""
    if m < 0:
        raise DomainError(f"m must be >= 0, got {m}")
    out = y * 0 + 1
    for i in range(m):
        out = out * (y + i)
    return out


def binomial(a: int, b: int) -> int:
    """Binomial coefficient with the convention C(a, b) = 0 outside 0 <= b <= a."""
    if b < 0 or b > a:
        return 0
    return math.comb(a, b)


def log_gamma(x):
    """Natural log of the Gamma function for x > 0 (scalar or array)."""
    if np.ndim(x) == 0:
        if not x > 0:
            raise DomainError(f"log_gamma requires x > 0, got {x}")
        return math.lgamma(x)
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("log_gamma requires x > 0")
    return gammaln(arr)


def _integer_gap(a: float, b: float) -> int:
    gap = b - a - 1
    if isinstance(gap, Rational):
        if gap.denominator != 1:
            raise UnsupportedParametersError(f"b - a - 1 = {gap} is not an integer")
        gap = int(gap)
    else:
        if not math.isfinite(gap) or gap != round(gap):
            raise UnsupportedParametersError(f"b - a - 1 = {gap} is not an integer")
        gap = int(round(gap))
    if gap < 0:
        raise UnsupportedParametersError(f"b - a - 1 = {gap} is negative")
    return gap


_RESCALE = 1e280


def _tricomi_sum(a: float, b: float, z: float) -> tuple[float, float]:
    """(S, log_scale) with U(a, b, z) = S * exp(log_scale) * z^(-a).

    With (1+t)^m expanded binomially, the integral representation gives
    U = sum_j C(m, j) Gamma(a+j) / (Gamma(a) z^(a+j)), a sum of positive
    terms. They are built by their ratio recursion in linear space and only
    rescaled when they approach overflow.
    """
    if not a > 0:
        raise DomainError(f"a must be > 0, got {a}")
    if not z > 0:
        raise DomainError(f"z must be > 0, got {z}")
    m = _integer_gap(a, b)
    a = float(a)
    z = float(z)
    terms = [1.0]
    log_scale = 0.0
    for j in range(m):
        nxt = terms[-1] * ((m - j) * (a + j) / ((j + 1) * z))
        if nxt > _RESCALE:
            terms = [t / _RESCALE for t in terms]
            nxt /= _RESCALE
            log_scale += math.log(_RESCALE)
        terms.append(nxt)
    return math.fsum(terms), log_scale


def log_tricomi_u_integer_gap(a: float, b: float, z: float) -> float:
    """log U(a, b, z) for integer gap m = b - a - 1 >= 0."""
    total, log_scale = _tricomi_sum(a, b, z)
    return math.log(total) + log_scale - float(a) * math.log(float(z))


def tricomi_u_integer_gap(a: float, b: float, z: float) -> float:
    """Tricomi U(a, b, z) for the integer-gap family b - a - 1 in {0, 1, 2, ...}."""
    total, log_scale = _tricomi_sum(a, b, z)
    if log_scale == 0.0:
        value = total * float(z) ** (-float(a))
        if math.isfinite(value) and value > 0.0:
            return value
    return math.exp(math.log(total) + log_scale - float(a) * math.log(float(z)))


def logsumexp(values) -> float:
    """Stable log(sum(exp(values))) with fsum accumulation."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return -math.inf
    top = float(np.max(arr))
    if top == -math.inf:
        return -math.inf
    return top + math.log(math.fsum(np.exp(arr - top)))


def as_fraction(value) -> Fraction:
    """Parse ``value`` (Fraction, int, or 'p/q' / decimal string) into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot build an exact rational from {type(value).__name__}")
