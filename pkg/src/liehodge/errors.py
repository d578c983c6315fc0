"""Exception hierarchy shared by every module."""


class LieHodgeError(Exception):
    """Base class for all errors raised by liehodge."""


class InputError(LieHodgeError, ValueError):
    """Malformed or inconsistent input data (indices, shapes, NaNs)."""


class FrameError(LieHodgeError):
    """The involution/form pair does not give a positive definite metric."""


class FormError(LieHodgeError):
    """A bilinear form is singular where a nondegenerate one is required."""


class CapError(LieHodgeError):
    """A PBW word exceeds the configured degree cap."""


class ModelError(LieHodgeError):
    """A generator does not satisfy a structural assumption (e.g. not a root vector)."""


class ScalingError(LieHodgeError, ArithmeticError):
    """Matrix exponential overflowed or produced non-finite entries."""


class MajorantError(LieHodgeError):
    """No admissible exponential weight was found for the majorant functions."""


class ConvergenceWarning(UserWarning):
    """A truncated series or quadrature did not reach its tolerance."""


class PrecisionWarning(UserWarning):
    """A numerical estimate (rank, quadrature) sits close to its threshold."""
