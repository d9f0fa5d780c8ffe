"""Exception types shared across the package."""


class PassageKitError(Exception):
    """Base class for all library errors."""


class DomainError(PassageKitError, ValueError):
    """An argument lies outside the domain of the requested functional."""


class OutOfRegime(DomainError):
    """The target rate x/t is not strictly between the drift and the mean."""


class BranchError(DomainError):
    """A complex exponent was requested on a branch cut."""


class Unsupported(PassageKitError):
    """The operation is not available for this model kind."""


class ConvergenceFailure(PassageKitError, ArithmeticError):
    """A root finder, quadrature or inversion did not meet its tolerance."""


class HypothesisHFailed(PassageKitError):
    """Fourier inversion refused because the integrability check failed."""


class ZeroDrift(DomainError):
    """A drift-dependent quantity was requested for a driftless model."""


class StepCapExceeded(PassageKitError):
    """Too many simulated paths hit the per-path event cap."""


class ParseError(DomainError):
    """Malformed model string."""

    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} (at position {position})")
        self.position = position
