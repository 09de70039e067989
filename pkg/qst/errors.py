"""
Exception hierarchy for the state transfer simulator.

Every error carries the process exit code the CLI reports for it:
0 success, 1 validation, 2 numeric, 3 I/O.
"""

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2
EXIT_IO = 3


class QSTError(Exception):
    """Base class for all simulator errors."""

    exit_code = EXIT_VALIDATION


class ValidationError(QSTError, ValueError):
    """Invalid input: configuration, state normalization, grids."""

    exit_code = EXIT_VALIDATION


class DomainError(ValidationError):
    """Argument outside the domain of a special function or kernel."""


class ConfigParseError(ValidationError):
    """Malformed configuration document."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class NumericError(QSTError, ArithmeticError):
    """Non-finite results and failed table verification."""

    exit_code = EXIT_NUMERIC


class OutputError(QSTError, OSError):
    """Config or result files that cannot be read or written."""

    exit_code = EXIT_IO
