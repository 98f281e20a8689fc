"""Exception types raised across the package."""


class QcorrError(Exception):
    """Base class for all package errors."""


class DomainError(QcorrError, ValueError):
    """A state parameter lies outside its allowed range."""


class DimensionError(QcorrError, ValueError):
    """Dimensions of the inputs are inconsistent."""


class UnsupportedDimensionError(DimensionError):
    """The operation is only defined for a particular local dimension."""


class DegeneracyError(QcorrError, ValueError):
    """The spectrum of the marginal does not have the required degeneracy pattern."""


class SpecParseError(QcorrError, ValueError):
    """A state spec string could not be parsed."""

    def __init__(self, message, token=None):
        super().__init__(message)
        self.token = token


class InvalidMeasurementError(QcorrError, ValueError):
    """Operators do not form a complete set of orthogonal rank-1 projectors."""
