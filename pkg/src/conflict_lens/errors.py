"""Exception types raised across the package.

Every error derives from :class:`ConflictLensError` so callers (the CLI in
particular) can catch the whole family in one place.  Errors that signal bad
user input also derive from :class:`ValueError` or :class:`KeyError`.
"""


class ConflictLensError(Exception):
    """Base class for all package errors."""


class EmptyInput(ConflictLensError, ValueError):
    pass


class NonFiniteSample(ConflictLensError, ValueError):
    pass


class ProfileFormatError(ConflictLensError, ValueError):
    """A profile or ECDF file does not follow the TSV layout."""


class UnknownVariable(ConflictLensError, KeyError):
    pass


class UnknownSlice(ConflictLensError, KeyError):
    pass


class SupportNotCovered(ConflictLensError, ValueError):
    pass


class MissingKey(ConflictLensError, KeyError):
    pass


class NonPositivePeriod(ConflictLensError, ValueError):
    pass


class InconsistentTiming(ConflictLensError, ValueError):
    pass


class HoldExceedsPeriod(ConflictLensError, ValueError):
    pass


class LengthMismatch(ConflictLensError, ValueError):
    pass


class ConfigMismatch(ConflictLensError, ValueError):
    pass


class InvalidConfig(ConflictLensError, ValueError):
    pass


class EmptyTrace(ConflictLensError, ValueError):
    pass


class NoWriters(ConflictLensError, ValueError):
    pass
