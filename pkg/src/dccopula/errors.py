"""Exception hierarchy shared across the package."""


class DccopulaError(Exception):
    """Base class for all package errors."""


class IngestError(DccopulaError):
    """Raised when rate data fails to parse or violates panel invariants."""


class ConfigError(DccopulaError):
    """Raised for invalid pipeline configuration or out-of-range options."""


class StatError(DccopulaError):
    """Raised when a statistic is undefined for the given sample."""


class ParamError(DccopulaError):
    """Raised for parameter values outside their admissible domain."""


class DomainError(DccopulaError):
    """Raised when a function is evaluated outside its mathematical domain."""


class MatrixError(DccopulaError):
    """Raised for matrices that are singular or not positive definite."""


class FitError(DccopulaError):
    """Raised when an estimation routine fails to converge."""


class EvalError(DccopulaError):
    """Raised when a likelihood evaluation produces a non-finite value."""
