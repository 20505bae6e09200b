class QRamseyError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(QRamseyError, ValueError):
    """A precondition on arguments or configuration was violated."""


class SizeConstraintError(InvalidInput):
    """No injection between two carriers can exist (pigeonhole)."""


class EnumerationError(QRamseyError):
    """An enumeration repeated a point or could not produce a position."""


class BudgetExhausted(QRamseyError):
    """A bounded search ran out of positions before finding a hit."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class ChainVerificationError(QRamseyError, AssertionError):
    """An internal re-check of a witness failed. This is always a bug."""
