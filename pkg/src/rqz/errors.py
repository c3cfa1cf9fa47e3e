"""Exception hierarchy for the rqz package."""


class RqzError(Exception):
    """Base class for all rqz errors."""


class SingularPencil(RqzError):
    """A pencil (or subpencil) is singular where regularity is required."""


class SingularPoleBlock(SingularPencil):
    """A subdiagonal pole block is singular as a pencil."""


class SingularLeadingBlock(SingularPencil):
    """A shifted leading window system is numerically singular.

    Signals improperness of the pencil; callers should deflate instead of
    introducing poles.
    """


class SingularInput(RqzError):
    """The input pair failed the regularity check."""


class NoConvergence(RqzError):
    """The iteration failed to deflate an eigenvalue within the sweep budget."""


class WindowTooSmall(RqzError):
    """An aggressive-deflation window cannot cover the leading block."""


class IllConditionedOracle(RqzError):
    """The brute-force reference solver could not certify its result."""


class ParseError(RqzError):
    """A file could not be parsed.

    Attributes
    ----------
    line : int or None
        1-based line number of the offending input line, when known.
    """

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class UnsupportedFormat(RqzError):
    """A Matrix Market field/symmetry combination outside the supported set."""
