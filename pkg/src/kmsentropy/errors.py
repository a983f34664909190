"""Exception hierarchy.

Every error raised on purpose by the package derives from ``KMSEntropyError``.
The CLI maps ``ValidationError`` subclasses to exit status 2 and
``ToleranceError`` to exit status 3.
"""


class KMSEntropyError(Exception):
    """Base class for package errors."""


class ValidationError(KMSEntropyError, ValueError):
    """An input violates a documented precondition."""


class DomainError(ValidationError):
    """A numeric argument lies outside the domain of the operation."""


class ConfigurationError(ValidationError):
    """Incompatible objects were combined, or a config file is malformed."""


class UnsupportedOrderError(ValidationError):
    """Requested perturbative or line order is not implemented."""


class ResolutionError(KMSEntropyError):
    """A discretization is too coarse for the requested accuracy."""


class ConvergenceError(KMSEntropyError):
    """A sequence that should converge does not."""


class ToleranceError(KMSEntropyError):
    """A computed residual exceeded its contract tolerance."""

    def __init__(self, quantity, value, tolerance):
        self.quantity = quantity
        self.value = value
        self.tolerance = tolerance
        super().__init__(f"{quantity} = {value:.3e} exceeds tolerance {tolerance:.1e}")
