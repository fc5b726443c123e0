"""Exception and warning types shared across the package."""


class WirtingerError(Exception):
    """Base class for all package errors."""


class DomainError(WirtingerError, ValueError):
    """Input outside the admissible parameter or argument domain."""


class ConvergenceError(WirtingerError, RuntimeError):
    """An iterative method exhausted its budget."""


class NonFiniteError(WirtingerError, FloatingPointError):
    """An integrand returned NaN or inf at an interior node."""


class IdentityError(WirtingerError):
    """Two routes to the same quantity disagree beyond tolerance."""


class StepError(WirtingerError, RuntimeError):
    """The flow integrator could not localize a stopping event."""


class ConstraintError(WirtingerError):
    """A transported function violates the integral constraint."""


class FitError(WirtingerError):
    """A finite-difference fit shows structure it should not have."""


class DegenerateError(WirtingerError, ValueError):
    """A discrete function is constant or numerically zero."""


class BoundaryWarning(UserWarning):
    """The minimum of J sits on the edge of the scanned window."""


class ExtrapolationWarning(UserWarning):
    """Richardson levels disagree by more than the accepted fraction."""
