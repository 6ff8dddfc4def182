"""Exception hierarchy shared across the package."""


class TsSpamError(Exception):
    """Base class for all package errors."""


class InputError(TsSpamError, ValueError):
    """Invalid user input: bad shapes, non-finite data, malformed files."""


class ParseError(InputError):
    """A CSV cell could not be parsed.

    Attributes
    ----------
    row, col : int
        1-based line number in the file and 1-based column index.
    """

    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class SolverError(TsSpamError, RuntimeError):
    """Numerical failure inside the solver (e.g. line search overflow)."""


class InstabilityError(TsSpamError, RuntimeError):
    """Synthetic generator could not produce a bounded trajectory."""
