"""
LabelMap - Errors
Exception hierarchy shared by the library and the command line.
Each family carries the exit code the CLI reports for it.
"""

from labelmap.config import ExitCode


class LabelMapError(Exception):
    """Base class for all LabelMap failures."""
    exit_code = ExitCode.DATA


# Usage errors: bad parameters or flags

class UsageError(LabelMapError):
    exit_code = ExitCode.USAGE


class InvalidLambda(UsageError):
    pass


class InvalidSchedule(UsageError):
    pass


class InvalidK(UsageError):
    pass


class InvalidConfig(UsageError):
    pass


# Data errors: malformed or inconsistent inputs

class DataError(LabelMapError):
    exit_code = ExitCode.DATA


class ParseError(DataError):
    pass


class AsymmetricMatrix(DataError):
    pass


class NegativeDistance(DataError):
    pass


class SizeMismatch(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class DegenerateInput(DataError):
    pass


class IndexOutOfRange(DataError):
    pass


# Numeric failures during optimization

class NumericError(LabelMapError):
    exit_code = ExitCode.NUMERIC


class NonFiniteUpdate(NumericError):
    """Raised when a coordinate becomes NaN or infinite; keeps the partial trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
