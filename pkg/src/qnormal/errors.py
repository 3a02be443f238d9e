"""Exception hierarchy shared by every module."""

from __future__ import annotations


class QNormalError(ValueError):
    """Base class; everything raised deliberately by the package derives from it."""


class BadBase(QNormalError):
    pass


class BadLength(QNormalError):
    pass


class EmptyBlock(QNormalError):
    pass


class DigitOutOfRange(QNormalError):
    pass


class TooLong(QNormalError):
    pass


class OutOfRange(QNormalError):
    pass


class Unfeasible(QNormalError):
    """Raised when an exhaustive check would exceed the evaluation budget."""


class Undefined(QNormalError):
    """A basic sequence was queried past the point where it is defined."""


class DegenerateSchedule(QNormalError):
    pass


class KOutOfRange(QNormalError):
    """Block length not in the range set R(W) of the family."""


class BFFInvariantError(QNormalError):
    """A block friendly family violates one of its defining constraints.

    ``index`` names the first offending position and ``field`` the
    parameter sequence involved.
    """

    def __init__(self, message: str, index: int | None = None, field: str | None = None):
        super().__init__(message)
        self.index = index
        self.field = field


class BadScale(QNormalError):
    pass


class ConfigError(QNormalError):
    """Invalid configuration text; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
