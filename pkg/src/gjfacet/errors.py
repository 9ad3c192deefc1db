"""Exception types raised by the library."""


class GJFacetError(ValueError):
    """Base class for input and construction errors."""


class RationalFormatError(GJFacetError):
    pass


class InvalidFunctionError(GJFacetError):
    pass


class ScheduleError(GJFacetError):
    pass


class StepError(GJFacetError):
    """A construction step would collapse or invert a positive segment."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class UnsupportedScheduleError(GJFacetError):
    """The operation needs a closed-form tail (geometric schedule)."""


class DepthPolicyError(GJFacetError):
    pass
