"""Exception hierarchy shared across the package."""


class BispecError(Exception):
    """Base class for all package errors."""


class InvalidSupportError(BispecError, ValueError):
    pass


class ParseError(BispecError, ValueError):
    """An input file or config document could not be understood."""


class DegenerateSignalError(BispecError, ArithmeticError):
    """The data implies ``y[0] == 0``, which every inversion route needs nonzero."""


class IllConditionedError(BispecError, ArithmeticError):
    """A divisor in the constructive recursion vanished (non-generic instance)."""


class DivergedError(BispecError, ArithmeticError):
    """The solver produced a non-finite objective; ``trace`` holds the history."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
