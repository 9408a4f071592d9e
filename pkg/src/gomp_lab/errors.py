"""Exception hierarchy shared by all gomp_lab modules."""


class GompLabError(Exception):
    """Base class for every error raised by gomp_lab."""


class RankDeficient(GompLabError, ValueError):
    """A column submatrix is numerically rank deficient."""


class InsufficientCandidates(GompLabError, ValueError):
    """Fewer selectable indices remain than were requested."""


class EnumerationTooLarge(GompLabError, ValueError):
    """Exhaustive enumeration would exceed the configured support cap."""


class DomainError(GompLabError, ValueError):
    """Inputs fall outside the domain where a bound or constant is defined."""


class VacuousBound(DomainError):
    """The bound's denominator is non-positive, so it certifies nothing."""


class MissingOrder(GompLabError, LookupError):
    """No RIP estimate is available for the order a certificate needs."""


class MissingDelta(GompLabError, LookupError):
    """An audit needs an exact RIP constant that was not supplied."""


class GammaViolation(GompLabError, ValueError):
    """A signal does not satisfy the dynamic-range (gamma) assumption."""


class ZeroNoise(GompLabError, ValueError):
    """The SNR is undefined because the noise vector is zero."""


class ConfigError(GompLabError, ValueError):
    """An experiment configuration is malformed or inconsistent."""


class ParseError(GompLabError, ValueError):
    """A matrix file could not be parsed."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class DimensionMismatch(GompLabError, ValueError):
    """Array shapes disagree with each other or with a declared header."""
