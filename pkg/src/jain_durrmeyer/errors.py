"""Exception types shared across the package."""


class JainDurrmeyerError(Exception):
    """Base class for all package errors."""


class DomainError(JainDurrmeyerError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedParametersError(JainDurrmeyerError, ValueError):
    """Parameters are valid mathematically but outside the supported family."""


class UnsupportedOrderError(JainDurrmeyerError, ValueError):
    """A closed form was requested beyond the orders it is tabulated for."""


class AccuracyError(JainDurrmeyerError, ArithmeticError):
    """A numerical routine failed to reach its requested tolerance."""

    def __init__(self, message, achieved=None, owner=None):
        super().__init__(message)
        self.achieved = achieved
        self.owner = owner


class SaturationError(JainDurrmeyerError, ArithmeticError):
    """The truncation hard cap was hit before the residual mass was small enough."""

    def __init__(self, message, k_max=None, mass=None):
        super().__init__(message)
        self.k_max = k_max
        self.mass = mass


class ExprSyntaxError(JainDurrmeyerError, ValueError):
    """Malformed expression text."""

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = tuple(sorted(expected))
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class ExprEvalError(JainDurrmeyerError, ArithmeticError):
    """Runtime failure while evaluating an expression (e.g. division by zero)."""
