"""Moments of the Jain basis and of the Durrmeyer operator.

This is the ground-truth engine. Three independent routes compute the basis
moments <L_{n,k}, t^r>:

* ``stirling_sum``: the finite sum obtained by expanding (nt + k beta)^(k-1),
  (r+1)! e^{-k beta} / (k n^{r+1}) * sum_s C(k+r-s, r+1) (k beta)^s / s!
* ``recurrence``: the three-term recurrence in r for the ratios P_r, seeded
  with P_0 = 1 and P_1,
* ``quadrature``: adaptive integration of L_{n,k}(t) t^r over [0, inf),

plus the Tricomi-U representation as a fourth cross-check. The ratios
P_r(k) = <L_k, t^r> / <L_k, 1> are rational in beta, so when ``beta`` is an
exact Fraction they are computed exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .basis import (DEFAULT_POLICY, OperatorParams, TruncationPolicy, basis_log_values,
                    truncation_index)
from .errors import DomainError, SaturationError, UnsupportedParametersError
from .kernel import binomial, log_tricomi_u_integer_gap, logsumexp, stirling1_unsigned
from .quadrature import DEFAULT_QUAD, QuadratureConfig, integrate_semi_infinite

EPS = np.finfo(float).eps


class MomentMethod(enum.Enum):
    STIRLING_SUM = "stirling-sum"
    RECURRENCE = "recurrence"
    QUADRATURE = "quadrature"

    @classmethod
    def parse(cls, value) -> "MomentMethod":
        if isinstance(value, cls):
            return value
        return cls(str(value).replace("_", "-"))


@dataclass(frozen=True)
class MomentValue:
    float_value: float
    exact_value: Optional[Fraction] = None
    abs_error_bound: float = 0.0

    def __float__(self) -> float:
        return self.float_value

    @classmethod
    def exact(cls, value: Fraction) -> "MomentValue":
        f = float(value)
        return cls(f, value, abs(f) * EPS / 2)


# --------------------------------------------------------------------------
# theta sums and S ratios
# --------------------------------------------------------------------------

def _is_exact(x) -> bool:
    return isinstance(x, (Fraction, int)) and not isinstance(x, bool)


def theta(k: int, x, m: int):
    """theta_m(x) = sum_{s<k} (k-s)^(m+1) x^s / s!  (exact for rational x)."""
    if k < 1:
        raise DomainError(f"theta needs k >= 1, got {k}")
    if m < 0:
        raise DomainError(f"theta needs m >= 0, got {m}")
    if x < 0:
        raise DomainError(f"theta needs x >= 0, got {x}")
    if _is_exact(x):
        x = Fraction(x)
        term = Fraction(1)
        total = Fraction(0)
        for s in range(k):
            total += (k - s) ** (m + 1) * term
            term = term * x / (s + 1)
        return total
    x = float(x)
    s = np.arange(k)
    if x == 0.0:
        return float(k) ** (m + 1)
    logs = (m + 1) * np.log(k - s) + s * math.log(x) - gammaln(s + 1.0)
    return math.exp(logsumexp(logs))


def s_ratio_exact(k: int, x, r: int):
    """S_r(x) = theta_r(x) / theta_0(x); S_0 = 1."""
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    if r == 0:
        if k < 1:
            raise DomainError(f"S_r needs k >= 1, got {k}")
        return Fraction(1) if _is_exact(x) else 1.0
    if _is_exact(x):
        return theta(k, x, r) / theta(k, x, 0)
    return float(_s_ratios_float(k, float(x), r)[r])


def _s_ratios_float(k: int, x: float, r_max: int) -> np.ndarray:
    """S_0..S_{r_max} at (k, x) in floating point, via normalised positive sums.

    x^s/s! is concentrated within a few sqrt(x) of s = x; terms further out are
    below e^-45 relative to the peak even after the (k-s)^(r+1) weighting.
    """
    if x == 0.0:
        return float(k) ** np.arange(r_max + 1)
    half = math.sqrt(2.0 * x * (45.0 + (r_max + 1) * math.log(k + 1.0))) + 5.0
    lo = max(0, int(x - half))
    hi = min(k, int(x + half) + 1)
    s = np.arange(lo, hi)
    logw = s * math.log(x) - gammaln(s + 1.0)
    w = np.exp(logw - logw.max())
    d = (k - s).astype(float)
    pw = d[None, :] ** np.arange(1, r_max + 2)[:, None]
    th = pw @ w
    return th / th[0]


@lru_cache(maxsize=64)
def _s_table(beta: float, r_cap: int, k_cap: int) -> np.ndarray:
    """S_m(beta k) for m <= r_cap and 1 <= k <= k_cap; column 0 unused (nan)."""
    out = np.full((r_cap + 1, k_cap + 1), np.nan)
    if beta == 0.0:
        k = np.arange(1, k_cap + 1, dtype=float)
        out[:, 1:] = k[None, :] ** np.arange(r_cap + 1)[:, None]
        return out
    for k in range(1, k_cap + 1):
        out[:, k] = _s_ratios_float(k, beta * k, r_cap)
    return out


def s_ratio_table(beta: float, r_max: int, k_max: int) -> np.ndarray:
    """Float S_m(beta k), shape (r_max+1, k_max+1); column k = 0 is nan."""
    k_cap = 64
    while k_cap < k_max:
        k_cap *= 2
    return _s_table(float(beta), max(r_max, 6), k_cap)[: r_max + 1, : k_max + 1]


def _stirling_weights(r: int) -> list[int]:
    return [stirling1_unsigned(r + 1, j) for j in range(r + 2)]


def p_table(params: OperatorParams, r: int, k_max: int) -> np.ndarray:
    """Float P_r(k; beta) for k = 0..k_max (the exact ratio, not the closed form)."""
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    out = np.empty(k_max + 1)
    out[0] = math.factorial(r) / params.n ** r
    if k_max >= 1:
        S = s_ratio_table(params.beta, r, k_max)
        c = _stirling_weights(r)
        acc = np.zeros(k_max)
        for j in range(1, r + 2):
            acc += c[j] * S[j - 1, 1:]
        out[1:] = acc / float(params.n) ** r
    return out


# --------------------------------------------------------------------------
# ratios P_r(k; beta)
# --------------------------------------------------------------------------

def p_exact(params: OperatorParams, k: int, r: int) -> MomentValue:
    """P_r(k; beta) = <L_k, t^r> / <L_k, 1>, assembled from Stirling weights over S ratios."""
    if k < 0 or r < 0:
        raise DomainError(f"k and r must be >= 0, got k={k}, r={r}")
    n = params.n
    if k == 0:
        value = Fraction(math.factorial(r), n ** r)
        if params.is_exact:
            return MomentValue.exact(value)
        return MomentValue(float(value), None, float(value) * EPS)
    if params.is_exact:
        x = params.exact * k
        th = [theta(k, x, m) for m in range(r + 1)]
        c = _stirling_weights(r)
        total = sum(c[j] * th[j - 1] for j in range(1, r + 2)) / th[0]
        return MomentValue.exact(total / n ** r)
    S = _s_ratios_float(k, params.beta * k, r)
    c = _stirling_weights(r)
    value = math.fsum(c[j] * S[j - 1] for j in range(1, r + 2)) / float(n) ** r
    return MomentValue(value, None, 4 * (k + r + 2) * EPS * abs(value))


def p_recurrence(params: OperatorParams, k: int, r_max: int) -> list[MomentValue]:
    """P_0..P_{r_max} from n^2 P_{r+2} = n[(1-beta)k + r + 2] P_{r+1} + (r+2) beta k P_r."""
    if k < 1:
        raise DomainError("the recurrence is used for k >= 1; k = 0 has P_r = r!/n^r")
    if r_max < 0:
        raise DomainError(f"r_max must be >= 0, got {r_max}")
    n = params.n
    exact = params.is_exact
    beta = params.exact if exact else params.beta
    p1 = p_exact(params, k, 1)
    seq = [Fraction(1) if exact else 1.0, p1.exact_value if exact else p1.float_value]
    for r in range(0, r_max - 1):
        nxt = (n * ((1 - beta) * k + r + 2) * seq[r + 1] + (r + 2) * beta * k * seq[r]) / n ** 2
        seq.append(nxt)
    seq = seq[: r_max + 1]
    if exact:
        return [MomentValue.exact(v) for v in seq]
    return [MomentValue(v, None, 4 * (k + i + 2) * EPS * abs(v)) for i, v in enumerate(seq)]


# --------------------------------------------------------------------------
# basis moments <L_k, t^r>
# --------------------------------------------------------------------------

def _log_norm_stirling(params: OperatorParams, k: int, r: int) -> float:
    """log <L_k, t^r> by the finite binomial sum (k >= 1)."""
    n, beta = params.n, params.beta
    c = k * beta
    s = np.arange(k)
    logc = np.array([math.log(binomial(k + r - int(si), r + 1)) for si in s])
    if c == 0.0:
        logsum = logc[0]
    else:
        logsum = logsumexp(logc + s * math.log(c) - gammaln(s + 1.0))
    return (math.lgamma(r + 2) - math.log(k) - (r + 1) * math.log(n) - c) + logsum


def log_basis_norms(params: OperatorParams, k_max: int) -> np.ndarray:
    """log <L_k, 1> for k = 0..k_max, from the closed finite sum."""
    k_cap = 64
    while k_cap < k_max:
        k_cap *= 2
    return _log_norms(params.n, params.beta, k_cap)[: k_max + 1]


@lru_cache(maxsize=64)
def _log_norms(n: int, beta: float, k_cap: int) -> np.ndarray:
    out = np.empty(k_cap + 1)
    out[0] = -math.log(n)
    for k in range(1, k_cap + 1):
        c = k * beta
        if c == 0.0:
            logsum = math.log(k)
        else:
            # same window argument as for the S ratios
            half = math.sqrt(2.0 * c * (45.0 + math.log(k + 1.0))) + 5.0
            s = np.arange(max(0, int(c - half)), min(k, int(c + half) + 1))
            logsum = logsumexp(np.log(k - s) + s * math.log(c) - gammaln(s + 1.0))
        out[k] = -math.log(k * n) - c + logsum
    out.setflags(write=False)
    return out


def basis_raw_moment_tricomi(params: OperatorParams, k: int, r: int) -> MomentValue:
    """<L_k, t^r> = (k beta)^{k+r+1} e^{-k beta} (r+1)! U(r+2, k+r+2, k beta) / (k! n^{r+1})."""
    if k < 1:
        raise DomainError("the Tricomi representation needs k >= 1")
    if params.beta == 0.0:
        raise UnsupportedParametersError("the Tricomi representation needs beta > 0 (z = k beta)")
    z = k * params.beta
    logv = ((k + r + 1) * math.log(z) - z + math.lgamma(r + 2) - math.lgamma(k + 1)
            - (r + 1) * math.log(params.n) + log_tricomi_u_integer_gap(r + 2, k + r + 2, z))
    v = math.exp(logv)
    return MomentValue(v, None, 8 * (k + r + 2) * EPS * v)


def weight_breakpoints(n: int, beta: float, k: int, r: int = 0):
    """Seed points (in t) and map scale covering the bulk of t^r L_{n,k}(t)."""
    one_minus = 1.0 - beta
    center = ((one_minus * k) + r + 1.0 + 1.0 / one_minus) / n
    spread = math.sqrt(k + r + 2.0 + 1.0 / one_minus ** 2) / n
    offsets = np.arange(-12.0, 12.5, 1.5)
    pts = center + offsets * spread
    pts = pts[pts > 0]
    return pts, center


def raw_moments_quadrature(items: Sequence[tuple[OperatorParams, int, int]],
                           config: QuadratureConfig = DEFAULT_QUAD) -> list[MomentValue]:
    """Batch quadrature of <L_{n,k}, t^r> for many (params, k, r) triples at once."""
    ns = np.array([p.n for p, _, _ in items], dtype=float)
    bs = np.array([p.beta for p, _, _ in items], dtype=float)
    ks = np.array([k for _, k, _ in items], dtype=float)
    rs = np.array([r for _, _, r in items], dtype=float)
    lg = gammaln(ks + 1.0)
    bps, scales = [], []
    for p, k, r in items:
        pts, center = weight_breakpoints(p.n, p.beta, k, r)
        bps.append(pts)
        scales.append(center)

    def integrand(t, own):
        n, b, k, r = ns[own], bs[own], ks[own], rs[own]
        nt = n * t
        shifted = nt + k * b
        with np.errstate(divide="ignore", invalid="ignore"):
            logl = np.where(k == 0, -nt,
                            np.log(nt) + (k - 1.0) * np.log(shifted) - shifted - lg[own])
            logv = logl + np.where(r == 0, 0.0, r * np.log(t))
        return np.exp(logv)[None, :]

    res = integrate_semi_infinite(integrand, bps, np.array(scales), config)
    return [MomentValue(float(v), None, float(e)) for v, e in zip(res.values[:, 0], res.errors[:, 0])]


def basis_raw_moment(params: OperatorParams, k: int, r: int,
                     method=MomentMethod.STIRLING_SUM,
                     quad: QuadratureConfig = DEFAULT_QUAD) -> MomentValue:
    """<L_{n,k}, t^r> by the selected route."""
    if k < 0 or r < 0:
        raise DomainError(f"k and r must be >= 0, got k={k}, r={r}")
    method = MomentMethod.parse(method)
    if method is MomentMethod.QUADRATURE:
        return raw_moments_quadrature([(params, k, r)], quad)[0]
    if k == 0:
        v = math.factorial(r) / float(params.n) ** (r + 1)
        return MomentValue(v, None, v * EPS)
    if method is MomentMethod.STIRLING_SUM:
        v = math.exp(_log_norm_stirling(params, k, r))
        return MomentValue(v, None, 8 * (k + r + 2) * EPS * v)
    # recurrence route: P_r from the recurrence times <L_k, 1>
    pr = p_recurrence(params, k, r)[r]
    norm = math.exp(_log_norm_stirling(params, k, 0))
    v = pr.float_value * norm
    return MomentValue(v, None, 8 * (k + r + 2) * EPS * v + pr.abs_error_bound * norm)


# --------------------------------------------------------------------------
# operator moments T_{n,r}(x) and central moments
# --------------------------------------------------------------------------

def _log_rounding_scale(params: OperatorParams, x: float, k_max: int) -> float:
    # relative rounding of exp(log L) grows with the magnitude of the log terms
    big = params.n * x + k_max * params.beta + 1.0
    return 4 * EPS * (1.0 + k_max * (1.0 + math.log(big)) + big)


def _truncate(params, x, policy):
    trunc = truncation_index(params, x, policy)
    if trunc.saturated:
        raise SaturationError(
            f"truncation hit hard cap {policy.hard_cap} at x={x} (mass {trunc.mass:.17g})",
            k_max=trunc.k_max, mass=trunc.mass)
    return trunc


@dataclass(frozen=True)
class SeriesSupport:
    """Basis weights used for a moment series at one x.

    The mass cut only controls sum L_k; moments weight the tail by k^r, so
    series are summed to 2 k_max + 50 and the remaining mass is bounded
    geometrically from the last weight ratio.
    """

    k_sum: int
    weights: np.ndarray
    tail_mass: float
    rounding: float


def series_support(params: OperatorParams, x: float,
                   policy: TruncationPolicy = DEFAULT_POLICY) -> SeriesSupport:
    trunc = _truncate(params, x, policy)
    k_sum = 2 * trunc.k_max + 50
    weights = np.exp(basis_log_values(params, np.arange(k_sum + 1), x))
    last, prev = weights[-1], weights[-2]
    if last == 0.0:
        tail = 0.0
    elif prev > 0 and last < prev:
        rho = last / prev
        tail = last * rho / (1.0 - rho)
    else:
        tail = max(0.0, 1.0 - trunc.mass)
    return SeriesSupport(k_sum, weights, tail, _log_rounding_scale(params, x, k_sum))


def _series_value(params: OperatorParams, support: SeriesSupport, r: int) -> MomentValue:
    P = p_table(params, r, support.k_sum)
    terms = support.weights * P
    # the tail bound only needs a float, so drop any exact beta here
    far = OperatorParams(params.n, params.beta)
    p_far = p_exact(far, 2 * support.k_sum, r).float_value if r > 0 else 1.0
    tail = 2.0 * support.tail_mass * max(float(P.max()), p_far)
    rounding = support.rounding * math.fsum(np.abs(terms))
    return MomentValue(math.fsum(terms), None, tail + rounding)


def t_series(params: OperatorParams, r: int, x: float,
             policy: TruncationPolicy = DEFAULT_POLICY) -> MomentValue:
    """T_{n,r}(x) = sum_k P_r(k) L_{n,k}(x) with P_r the exact ratio."""
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return p_exact(params, 0, r)
    return _series_value(params, series_support(params, x, policy), r)


def t_series_all(params: OperatorParams, r_max: int, x: float,
                 policy: TruncationPolicy = DEFAULT_POLICY) -> list[MomentValue]:
    """T_0..T_{r_max} at x sharing one truncation and basis evaluation."""
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return [p_exact(params, 0, r) for r in range(r_max + 1)]
    support = series_support(params, x, policy)
    return [_series_value(params, support, r) for r in range(r_max + 1)]


def central_moment_series(params: OperatorParams, r: int, x: float,
                          policy: TruncationPolicy = DEFAULT_POLICY) -> MomentValue:
    """mu_{n,r}(x) = D((t - x)^r, x) by binomial expansion over T_j."""
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    if x == 0.0:
        return p_exact(params, 0, r)
    ts = t_series_all(params, r, x, policy)
    coef = [math.comb(r, j) * (-x) ** (r - j) for j in range(r + 1)]
    terms = [c * t.float_value for c, t in zip(coef, ts)]
    value = math.fsum(terms)
    err = math.fsum(abs(c) * t.abs_error_bound for c, t in zip(coef, ts))
    err += 2 * EPS * math.fsum(abs(v) for v in terms)
    return MomentValue(value, None, err)
