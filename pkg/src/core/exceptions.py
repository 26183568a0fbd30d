"""Error hierarchy for the transposable N:M mask toolkit."""


class TnmError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(TnmError, ValueError):
    """Matrix dimensions are not divisible by the group size M."""


class ShapeError(TnmError, ValueError):
    """Two arrays that must agree in shape do not."""


class PreconditionError(TnmError, ValueError):
    """An operation was called on a state that violates its precondition."""


class NumericalError(TnmError):
    """A numerical routine produced NaN/Inf or failed to factorize."""


class InfeasibleInternalError(TnmError):
    """A solver produced a mask that fails the final feasibility check."""


class ScaleError(TnmError, ValueError):
    """Magnitudes exceed the integer-scaling range of the exact oracle."""


class SizeError(TnmError, ValueError):
    """Problem size exceeds what an oracle is willing to handle."""


class DegenerateError(TnmError):
    """A ratio metric has a zero denominator."""


class FormatError(TnmError, ValueError):
    """A matrix or mask file is malformed."""


class ParseError(TnmError, ValueError):
    """A CSV file could not be parsed.

    Attributes:
        row: 1-based line number of the offending record
        col: 1-based field number, or None when the whole row is at fault
    """

    def __init__(self, message: str, row: int, col=None):
        location = f"row {row}" if col is None else f"row {row}, col {col}"
        super().__init__(f"{message} ({location})")
        self.row = row
        self.col = col


class IoError(TnmError, OSError):
    """Reading or writing a file failed at the operating-system level."""
