"""Exception types raised across the package."""


class LevyLpError(Exception):
    """Base class for all package errors."""


class DomainError(LevyLpError, ValueError):
    """Argument outside the domain of a function (e.g. non-positive lambda)."""


class OrderError(LevyLpError, ValueError):
    """Requested derivative order exceeds the admissible cap."""


class RangeError(LevyLpError, ValueError):
    """Value outside the range covered by a tabulated function."""


class OrderingError(LevyLpError, ValueError):
    """Time arguments given in the wrong order (s > t)."""


class PreconditionError(LevyLpError, ValueError):
    """A documented precondition of an operation does not hold."""


class ConfigurationError(LevyLpError, ValueError):
    """Inconsistent combination of specs (e.g. dimension mismatch)."""


class CoverageError(LevyLpError, ValueError):
    """A point or field lies outside the region covered by a partition."""


class ExtrapolationError(LevyLpError, ValueError):
    """Evaluation point outside the grid of a field."""


class ResolutionError(LevyLpError, RuntimeError):
    """Spectral multiplier does not decay before the Nyquist frequency."""

    def __init__(self, message, required_M=None):
        super().__init__(message)
        self.required_M = required_M


class TruncationError(LevyLpError, RuntimeError):
    """Spatial truncation too small for the requested tail tolerance."""

    def __init__(self, message, suggested_R=None):
        super().__init__(message)
        self.suggested_R = suggested_R


class AccuracyError(LevyLpError, RuntimeError):
    """Quadrature failed to converge under refinement."""


class InstabilityError(LevyLpError, ArithmeticError):
    """Symbol is not dissipative: Re Phi > 0 on some mode."""
