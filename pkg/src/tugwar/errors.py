"""Exception types raised across the package."""


class TugWarError(Exception):
    """Base class for all package errors."""


class ParameterError(TugWarError, ValueError):
    """Invalid game or grid parameters."""


class DomainError(TugWarError, ValueError):
    """A domain specification cannot be discretized as requested."""


class NonConvergence(TugWarError):
    """The fixed-point solver did not reach its tolerance."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class StepLimitExceeded(TugWarError):
    """A simulated game ran past the configured step cap."""


class GeometryError(TugWarError, ValueError):
    """A regularity probe violates its ball-containment precondition."""


class EmptyBall(TugWarError, ValueError):
    pass


class NonPositiveField(TugWarError, ValueError):
    pass


class DomainMismatch(TugWarError, ValueError):
    pass


class DegenerateGradient(TugWarError, ValueError):
    """Finite-difference gradient too small for the normalized operator."""
