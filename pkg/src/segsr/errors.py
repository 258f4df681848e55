"""Exception types raised by the segsr package."""


class SegSRError(Exception):
    """Base class for all package errors."""


class ConfigError(SegSRError, ValueError):
    pass


class NonIntegralDimensions(ConfigError):
    pass


class InvalidSegmentLength(ConfigError):
    pass


class InvalidSlide(ConfigError):
    pass


class DimensionMismatch(SegSRError, ValueError):
    pass


class IndexOutOfRange(SegSRError, IndexError):
    pass


class MissingPreviousEstimate(SegSRError, ValueError):
    pass


class RankDeficientSupport(SegSRError, ValueError):
    pass


class RankDeficient(SegSRError, ValueError):
    pass


class OrthogonalityViolated(SegSRError, ValueError):
    pass


class TooLarge(SegSRError, ValueError):
    pass


class MissingRipOrder(SegSRError, KeyError):
    pass


class ZeroReference(SegSRError, ZeroDivisionError):
    pass


class MissingSeries(SegSRError, KeyError):
    pass


class ConfigParse(SegSRError, ValueError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ConfigInvalid(ConfigParse):
    pass
