"""The Jain operator, its Durrmeyer variant and the auxiliary operator.

    B_n(f, x)    = sum_k L_{n,k}(x) f(k/n)
    D_n(f, x)    = sum_k <L_k, f> / <L_k, 1> * L_{n,k}(x)
    Dbar_n(f, x) = D_n(f, x) - f(x + 1/(n(1-beta))) + f(x)

The Durrmeyer weights <L_k, f>/<L_k, 1> do not depend on x, so they are
computed once per (params, f, quadrature config) and cached.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict

import numpy as np
from scipy.special import gammaln

from .basis import DEFAULT_POLICY, OperatorParams, TruncationPolicy
from .errors import AccuracyError, DomainError
from .functions import FunctionSpec
from .moments import log_basis_norms, series_support, weight_breakpoints
from .quadrature import DEFAULT_QUAD, QuadratureConfig, integrate_semi_infinite

# basis terms below this fraction of the largest weight are skipped
EARLY_EXIT = 1e-18


def jain_apply(params: OperatorParams, f: FunctionSpec, x: float,
               policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return float(f(0.0))
    support = series_support(params, x, policy)
    k = np.arange(support.k_sum + 1)
    return math.fsum(support.weights * f(k / params.n))


def jain_tail_bound(params: OperatorParams, f: FunctionSpec, x: float,
                    policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Bound on the neglected part of the Jain series from f's growth class."""
    if x == 0.0:
        return 0.0
    support = series_support(params, x, policy)
    return 2.0 * support.tail_mass * f.growth.bound(2.0 * support.k_sum / params.n)


class DurrmeyerWeights:
    """Lazily computed weights w_k = <L_k, f> / <L_k, 1> for one (params, f)."""

    def __init__(self, params: OperatorParams, f: FunctionSpec,
                 quad: QuadratureConfig = DEFAULT_QUAD):
        self.params = params
        self.f = f
        self.quad = quad
        self._values = np.full(0, np.nan)
        self._errors = np.full(0, np.nan)
        self._lock = threading.Lock()

    def _grow(self, k_max: int):
        if k_max < self._values.size:
            return
        size = max(k_max + 1, 2 * self._values.size)
        vals = np.full(size, np.nan)
        errs = np.full(size, np.nan)
        vals[: self._values.size] = self._values
        errs[: self._errors.size] = self._errors
        self._values, self._errors = vals, errs

    def get(self, ks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ks = np.asarray(ks, dtype=np.int64)
        with self._lock:
            self._grow(int(ks.max()))
            missing = ks[np.isnan(self._values[ks])]
            if missing.size:
                v, e = self._compute(np.unique(missing))
                self._values[np.unique(missing)] = v
                self._errors[np.unique(missing)] = e
            return self._values[ks].copy(), self._errors[ks].copy()

    def _compute(self, ks: np.ndarray):
        n, beta = self.params.n, self.params.beta
        log_norm = log_basis_norms(self.params, int(ks.max()))[ks]
        kf = ks.astype(float)
        lg = gammaln(kf + 1.0)
        kinks = np.asarray(self.f.breakpoints, dtype=float)
        bps, scales = [], []
        for k in ks:
            pts, center = weight_breakpoints(n, beta, int(k))
            bps.append(np.concatenate([pts, kinks]))
            scales.append(center)
        f = self.f

        def integrand(t, own):
            k = kf[own]
            nt = n * t
            shifted = nt + k * beta
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                logl = np.where(k == 0, -nt,
                                np.log(nt) + (k - 1.0) * np.log(shifted) - shifted - lg[own])
                rho = np.exp(logl - log_norm[own])
            fv = f(t)
            return np.vstack([rho * fv, rho])

        try:
            res = integrate_semi_infinite(integrand, bps, np.array(scales), self.quad, n_out=2)
        except AccuracyError as exc:
            bad = int(ks[exc.owner]) if exc.owner is not None else None
            raise AccuracyError(f"Durrmeyer weight quadrature failed for k={bad}: {exc}",
                                achieved=exc.achieved, owner=bad) from exc
        num, den = res.values[:, 0], res.values[:, 1]
        w = num / den
        err = (res.errors[:, 0] + np.abs(w) * res.errors[:, 1]) / np.abs(den)
        return w, err


_CACHE: "OrderedDict[tuple, DurrmeyerWeights]" = OrderedDict()
_CACHE_LOCK = threading.Lock()
_CACHE_SIZE = 64


def durrmeyer_weights(params: OperatorParams, f: FunctionSpec,
                      quad: QuadratureConfig = DEFAULT_QUAD) -> DurrmeyerWeights:
    key = (params, f, quad)
    with _CACHE_LOCK:
        if key in _CACHE:
            _CACHE.move_to_end(key)
            return _CACHE[key]
        weights = DurrmeyerWeights(params, f, quad)
        _CACHE[key] = weights
        if len(_CACHE) > _CACHE_SIZE:
            _CACHE.popitem(last=False)
        return weights


def _support_indices(params, x: float, policy):
    if x == 0.0:
        return np.array([0]), np.array([1.0])
    support = series_support(params, x, policy)
    basis = support.weights
    keep = np.nonzero(basis >= EARLY_EXIT * basis.max())[0]
    return keep, basis[keep]


def _durrmeyer_points(params, weights: DurrmeyerWeights, xs, policy):
    supports = [_support_indices(params, float(x), policy) for x in xs]
    needed = np.unique(np.concatenate([k for k, _ in supports]))
    weights.get(needed)
    out = []
    for keep, basis in supports:
        w, e = weights.get(keep)
        out.append((math.fsum(basis * w), math.fsum(basis * e)))
    return out


def durrmeyer_apply(params: OperatorParams, f: FunctionSpec, x,
                    policy: TruncationPolicy = DEFAULT_POLICY,
                    quad: QuadratureConfig = DEFAULT_QUAD):
    """D_n(f, x) for scalar or array ``x``."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < 0):
        raise DomainError("x must be >= 0")
    weights = durrmeyer_weights(params, f, quad)
    out = np.array([v for v, _ in _durrmeyer_points(params, weights, xs, policy)])
    return float(out[0]) if np.ndim(x) == 0 else out


def durrmeyer_apply_with_error(params: OperatorParams, f: FunctionSpec, x: float,
                               policy: TruncationPolicy = DEFAULT_POLICY,
                               quad: QuadratureConfig = DEFAULT_QUAD) -> tuple[float, float]:
    """D_n(f, x) together with the accumulated quadrature error estimate."""
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    return _durrmeyer_points(params, durrmeyer_weights(params, f, quad), [float(x)], policy)[0]


def auxiliary_apply(params: OperatorParams, f: FunctionSpec, x,
                    policy: TruncationPolicy = DEFAULT_POLICY,
                    quad: QuadratureConfig = DEFAULT_QUAD):
    """D_n(f, x) - f(x + 1/(n(1-beta))) + f(x)."""
    shift = 1.0 / (params.n * (1.0 - params.beta))
    d = durrmeyer_apply(params, f, x, policy, quad)
    xs = np.asarray(x, dtype=float)
    out = d - f(xs + shift) + f(xs)
    return float(out) if np.ndim(x) == 0 else out
