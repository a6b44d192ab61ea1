"""Exception and warning types shared across the package."""


class FvringError(Exception):
    """Base class for fvring-specific failures."""


class ResourceLimitError(FvringError):
    """Requested problem size exceeds a configured memory/dimension cap."""


class DegeneracyError(FvringError):
    """Ground space is (numerically) degenerate where a unique state is required."""


class PropagationError(FvringError):
    """Time propagation failed to converge within the configured limits."""


class PoleError(FvringError):
    """Closed-form coefficient evaluated too close to a pole of its denominator."""

    def __init__(self, message, denominator=None):
        super().__init__(message)
        self.denominator = denominator


class NotTwoLevelError(FvringError):
    """Spectrum is not dominated by two states; carries the top weights found."""

    def __init__(self, message, weights=None):
        super().__init__(message)
        self.weights = weights


class BracketingError(FvringError):
    """A 1-d maximization window does not bracket an interior peak."""


class ResolutionWarning(UserWarning):
    """Fourier peak extraction could not cleanly separate the dominant pair."""
