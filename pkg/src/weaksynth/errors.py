"""Exception types shared across the package.

The CLI maps these onto exit codes: DataError and subclasses exit 3,
DivergenceError exits 4, usage problems exit 2.
"""


class DataError(Exception):
    """Malformed, inconsistent, or out-of-contract input data."""


class ParseError(DataError):
    """Unparseable input file; message carries the 1-based line number."""


class DomainError(DataError):
    """A value outside its allowed alphabet or range."""


class DuplicateEntryError(DataError):
    """The same (row, col) cell was given more than once."""


class DimensionError(DataError):
    """Mismatched shapes between paired inputs."""


class EmptyMatrixError(DataError):
    """An operation that needs at least one data point got none."""


class InfeasibleError(DataError):
    """A brute-force enumeration was requested beyond its size limit."""


class InsufficientDataError(DataError):
    """Too few points for the requested selection rule."""


class DivergenceError(Exception):
    """Non-finite values encountered during optimization."""
