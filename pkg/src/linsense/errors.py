"""Exception types raised across the package.

Two families matter to callers: :class:`ValidationError` for inputs that are
malformed, and :class:`PhysicsError` for inputs that are well formed but
describe a regime where the linearized theory has no finite answer.
"""


class LinsenseError(Exception):
    """Base class for all package errors."""


class ValidationError(LinsenseError, ValueError):
    """Malformed or inconsistent input (shapes, signs, ranges)."""


class AveragingTimeError(ValidationError):
    """Measurement time too short for the white-noise variance formula."""


class PhysicsError(LinsenseError, ArithmeticError):
    """The requested evaluation is outside the stable, finite-response regime."""


class ThresholdError(PhysicsError):
    """Network is at or above threshold (some mode does not decay)."""


class SingularResponseError(PhysicsError):
    """chi(w_in) is numerically singular; the linear response diverges."""


class InsensitivePortError(PhysicsError):
    """The probed port carries no signal for the requested perturbation."""


class EigenSolverError(PhysicsError):
    """The eigenvalue decomposition failed or returned non-finite values."""
