"""Exception types shared across the toolkit.

Every error raised on a contract violation derives from DiarkitError so
callers (CLI, service) can map failures to exit codes / HTTP statuses.
"""


class DiarkitError(Exception):
    """Base class for all toolkit errors."""


class NonSquareError(DiarkitError):
    pass


class NotSymmetricError(DiarkitError):
    pass


class NonFiniteError(DiarkitError):
    pass


class KTooLargeError(DiarkitError):
    pass


class ZeroVectorError(DiarkitError):
    pass


class IoError(DiarkitError):
    pass


class ParseError(DiarkitError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class DimMismatchError(DiarkitError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class LengthMismatchError(DiarkitError):
    pass


class TooFewRecordsError(DiarkitError):
    pass


class SessionMismatchError(DiarkitError):
    pass


class NegativeCollarError(DiarkitError):
    pass


class EmptyError(DiarkitError):
    pass


class InvalidConfigError(DiarkitError):
    pass
