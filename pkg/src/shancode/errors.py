"""Exception types shared across the package."""


class ShancodeError(Exception):
    """Base class for all package errors."""


class ValidationFailure(ShancodeError):
    """Source description failed validation and was rejected."""


class ZeroProbability(ShancodeError):
    """Logarithm of a structurally zero probability was requested."""


class ZeroPathProbability(ShancodeError):
    """An enumerated or supplied path crosses a zero-probability step."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"path has zero probability at step {step}")


class ReducibleChain(ShancodeError):
    """Operation requires an irreducible transition structure."""


class PeriodicChain(ShancodeError):
    """Operation requires an aperiodic chain."""


class ResourceLimit(ShancodeError):
    """Requested computation exceeds the configured resource bounds."""


class DefectiveMatrix(ShancodeError):
    """Eigen-decomposition could not be bi-orthogonally normalized."""


class UndefinedAlpha(ShancodeError):
    """Log-ratio parameters are undefined because of zero probabilities."""

    def __init__(self, entries, message=None):
        self.entries = tuple(entries)
        super().__init__(message or f"undefined log-ratio entries: {self.entries}")


class ComplexResidual(ShancodeError):
    """A nominally real quantity retained a non-negligible imaginary part."""


class ZeroIndex(ShancodeError):
    """Fourier coefficient requested at index 0; DC terms are handled separately."""
