"""Exception and warning types raised across the package."""


class QuditForgeError(Exception):
    pass


class DimensionMismatch(QuditForgeError, ValueError):
    pass


class NotNormalized(QuditForgeError, ValueError):
    pass


class IndexOutOfRange(QuditForgeError, IndexError):
    pass


class WrongAngleCount(QuditForgeError, ValueError):
    pass


class MissingRepresentation(QuditForgeError, ValueError):
    pass


class OutOfDomain(QuditForgeError, ValueError):
    pass


class UnderSampled(QuditForgeError, ValueError):
    pass


class DegenerateData(QuditForgeError, ValueError):
    pass


class InsufficientData(QuditForgeError, ValueError):
    pass


class NonFiniteCost(QuditForgeError, FloatingPointError):
    pass


class TruncationWarning(UserWarning):
    """Displacement large enough that the Fock cutoff may distort it."""


class SubstepCapWarning(UserWarning):
    """Automatic substep doubling stopped at max_substeps before meeting auto_tol."""
