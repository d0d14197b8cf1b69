"""Exception types raised by the kernel evaluators and verification drivers."""


class RotoseenError(Exception):
    """Base class for all errors raised by this package."""


class SingularPointError(RotoseenError, ValueError):
    """Kernel requested at its singular point (usually the origin)."""


class CoincidenceError(SingularPointError):
    """Two-point kernel requested with (numerically) coinciding arguments."""


class DomainError(RotoseenError, ValueError):
    """Parameter outside the domain of the function (e.g. ``t <= 0``)."""


class NonConvergenceError(RotoseenError, RuntimeError):
    """Adaptive quadrature exhausted its budget above the requested tolerance."""

    def __init__(self, message, value=None, estimated_error=None):
        super().__init__(message)
        self.value = value
        self.estimated_error = estimated_error


class SupportError(RotoseenError, ValueError):
    """Force support or evaluation point violates the sphere geometry."""


class IncompleteSampleError(RotoseenError, ValueError):
    """A flow sample lacks data needed by a coefficient or remainder formula."""
