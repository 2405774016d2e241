"""Jain operators with a generalized Poisson basis, their Durrmeyer variant,
exact moment machinery, and numerical checks of the convergence theory."""

from .basis import OperatorParams, TruncationPolicy, basis_value, basis_values, truncation_index
from .errors import (AccuracyError, DomainError, ExprEvalError, ExprSyntaxError,
                     JainDurrmeyerError, SaturationError, UnsupportedOrderError,
                     UnsupportedParametersError)
from .functions import FunctionSpec, builtin, monomial, resolve_function
from .moments import (MomentMethod, MomentValue, basis_raw_moment, central_moment_series,
                      p_exact, p_recurrence, t_series)
from .operators import auxiliary_apply, durrmeyer_apply, jain_apply
from .quadrature import QuadratureConfig

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "DomainError", "ExprEvalError", "ExprSyntaxError", "FunctionSpec",
    "JainDurrmeyerError", "MomentMethod", "MomentValue", "OperatorParams", "QuadratureConfig",
    "SaturationError", "TruncationPolicy", "UnsupportedOrderError", "UnsupportedParametersError",
    "auxiliary_apply", "basis_raw_moment", "basis_value", "basis_values", "builtin",
    "central_moment_series", "durrmeyer_apply", "jain_apply", "monomial", "p_exact",
    "p_recurrence", "resolve_function", "t_series", "truncation_index", "__version__",
]
