"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` for bad input
(shape, symmetry, parameter ranges) and :class:`NumericalError` for inputs
that are well-formed but numerically out of reach (near-singular matrices,
resonant times, truncation too coarse). The CLI maps them to exit codes 2
and 3.
"""


class CanonFockError(Exception):
    """Base class for all package errors."""


class ValidationError(CanonFockError, ValueError):
    pass


class NumericalError(CanonFockError, ArithmeticError):
    pass


class NotSymmetric(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class InvalidReference(ValidationError):
    pass


class InvalidParameters(ValidationError):
    pass


class DimensionTooLarge(ValidationError):
    pass


class WindowTooNarrow(ValidationError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class Singular(NumericalError):
    pass


class Overflow(NumericalError, OverflowError):
    pass


class CutoffTooSmall(NumericalError):
    pass


class NearResonance(NumericalError):
    pass


class StepTooLarge(NumericalError):
    pass
