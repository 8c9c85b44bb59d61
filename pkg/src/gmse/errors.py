"""Exception hierarchy shared by every gmse module."""


class GmseError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatchError(GmseError):
    """Operands do not share the required grid shape."""


class NonFiniteValueError(GmseError):
    """A field value is NaN or infinite."""


class FieldIOError(GmseError):
    """A field file could not be read or written."""


class FormatError(FieldIOError):
    """A field file violates its declared format.

    Carries a human-readable location (line number for text formats,
    byte offset for binary ones) in the message.
    """


class InvalidSigmaError(GmseError):
    """A blur standard deviation is non-positive or mis-ordered."""


class NegativeInputError(GmseError):
    """An operation that requires non-negative values saw a negative one."""


class RangeError(GmseError):
    """A value lies outside its documented range."""


class DegenerateCurveError(GmseError):
    """A loss curve cannot be normalized because its maximum is zero."""


class CurveTooShortError(GmseError):
    """A loss curve has too few entries for the requested statistic."""


class FieldTooSmallError(GmseError):
    """A field has too few pixels for the requested statistic."""


class ConfigError(GmseError):
    """A training or schedule configuration is invalid."""
