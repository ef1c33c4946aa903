"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class MultiplexError(Exception):
    """Base class for errors raised by this package."""


class DataError(MultiplexError, ValueError):
    """Malformed or inconsistent input data."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class NumericalError(MultiplexError, ArithmeticError):
    """A numerical procedure failed or produced an unusable result."""


class ConvergenceError(NumericalError):
    """An iterative solver stopped before reaching its tolerance.

    ``residual`` holds the best residual (or error estimate) achieved.
    """

    def __init__(self, message: str, residual: float | None = None):
        self.residual = residual
        if residual is not None:
            message = f"{message} (best residual {residual:.3e})"
        super().__init__(message)
