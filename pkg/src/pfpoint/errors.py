"""Exception hierarchy shared by all modules."""


class PFPointError(Exception):
    """Base class for every error raised by the package."""


class DomainError(PFPointError, ValueError):
    """Argument outside the domain of the operation."""


class PoleError(PFPointError, ZeroDivisionError):
    """Evaluation at (or numerically on top of) a pole.

    ``nearest_root`` carries the singular point that was hit.
    """

    def __init__(self, message, nearest_root=None):
        super().__init__(message)
        self.nearest_root = nearest_root


class CutError(PFPointError, ValueError):
    """Evaluation on a branch cut of the photon overlap."""

    def __init__(self, message, distance=None):
        super().__init__(message)
        self.distance = distance


class SingularConfigurationError(PFPointError):
    """Regularized model at a degenerate radius (vanishing bare mass)."""


class AccuracyError(PFPointError):
    """A quadrature failed to reach its requested tolerance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class ConditioningError(PFPointError):
    """Least-squares basis is numerically rank deficient."""


class SizeError(PFPointError, ValueError):
    """Input larger than an operation supports."""


class ConstructionError(PFPointError, ValueError):
    """Invalid input to a finite-dimensional model constructor."""


class ConfigError(PFPointError, ValueError):
    """Malformed run configuration."""
