"""Exception hierarchy shared across the package."""


class NlfbError(Exception):
    """Base class for all package errors."""


class KernelValidationError(NlfbError):
    """Kernel rejected as a model input (sign, normalization, J(0))."""


class SolvabilityError(NlfbError):
    """A well-posedness precondition fails (e.g. infinite spreading speed)."""


class NumericalError(NlfbError):
    """A numerical procedure failed to converge or became unstable."""
