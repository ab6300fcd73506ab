"""Exception types shared across the package."""


class ReflectInvError(Exception):
    """Base class for all errors raised by reflectinv."""


class DimensionMismatch(ReflectInvError, ValueError):
    pass


class SingularMatrix(ReflectInvError, ArithmeticError):
    pass


class SeriesDiverged(ReflectInvError, ArithmeticError):
    """Raised when a power series does not settle within the term cap."""


class NonFiniteState(ReflectInvError, ArithmeticError):
    pass


class Unsupported(ReflectInvError, ValueError):
    pass


class SingularCoefficient(SingularMatrix):
    """One of F - G or F + G is not invertible."""

    def __init__(self, which):
        super().__init__(f"coefficient combination {which} is singular")
        self.which = which


class NotInvertible(SingularMatrix):
    pass


class NotContractive(ReflectInvError, ValueError):
    pass


class ConditioningWarning(UserWarning):
    pass
