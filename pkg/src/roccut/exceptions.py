"""Exception types shared across the package."""


class RoccutError(Exception):
    """Base class for all roccut errors."""


class InvalidArgumentError(RoccutError, ValueError):
    """An argument is outside its documented domain."""


class DegenerateSampleError(RoccutError, ValueError):
    """A sample has no usable variation (e.g. all values identical)."""


class UnsupportedModelError(RoccutError, ValueError):
    """The requested model cannot handle the given data (e.g. covariates)."""


class UnsupportedQueryError(RoccutError, ValueError):
    """A fitted model was asked for something it cannot provide."""


class DomainViolationError(RoccutError, ValueError):
    """Data violate a model's support requirements (e.g. nonpositive values)."""


class BracketViolationError(RoccutError, ValueError):
    """A root/quantile target lies outside the supplied bracket."""


class NumericFailureError(RoccutError, ArithmeticError):
    """A numeric routine produced non-finite values."""


class DataError(RoccutError, ValueError):
    """Malformed input data (CSV parsing, bad group codes, ...)."""
