"""
Exception hierarchy shared by every service.

The CLI maps these onto exit codes (see main.py); library callers can
catch the base class or the builtin they subclass.
"""

from typing import Optional, Tuple


class TuckerDenoiseError(Exception):
    """Base class for all library errors."""


class ParameterError(TuckerDenoiseError, ValueError):
    """Invalid argument: bad rank, mode, shape or dimension mismatch."""


class ConfigError(TuckerDenoiseError, ValueError):
    """Invalid configuration value."""


class DecompositionError(TuckerDenoiseError, RuntimeError):
    """The underlying SVD did not converge."""

    def __init__(self, message: str, dims: Tuple[int, ...]):
        super().__init__(f"{message} (matrix dims {dims[0]}x{dims[1]})")
        self.dims = tuple(dims)


class FormatError(TuckerDenoiseError, ValueError):
    """Malformed tensor file."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class ResourceGuardError(TuckerDenoiseError, RuntimeError):
    """A grid cell would allocate more dense entries than the budget allows."""

    def __init__(self, message: str, cell: Optional[str] = None):
        super().__init__(message)
        self.cell = cell


class ReplicateError(TuckerDenoiseError, RuntimeError):
    """A single Monte Carlo replicate failed; aborts its summary row."""

    def __init__(self, row: str, replicate: int, cause: BaseException):
        super().__init__(f"Replicate {replicate} of row '{row}' failed: {cause}")
        self.row = row
        self.replicate = replicate
        self.cause = cause
