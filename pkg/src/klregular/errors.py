"""Exception hierarchy shared by every module of the package."""


class RegularityError(Exception):
    """Base class for all errors raised by klregular."""


class InvalidInput(RegularityError, ValueError):
    pass


class InvalidParameter(RegularityError, ValueError):
    pass


class DegenerateDirection(RegularityError, ValueError):
    pass


class DimensionMismatch(RegularityError, ValueError):
    pass


class EmptyConfiguration(RegularityError, ValueError):
    """Raised when k = l = 0; at least one point is required."""


class NotRational(RegularityError, TypeError):
    pass


class OutOfDomain(RegularityError, ValueError):
    pass


class DistinctnessViolation(RegularityError, ValueError):
    pass


class ZeroFunction(RegularityError, ValueError):
    pass


class NotATangency(RegularityError, ValueError):
    pass


class DegenerateCurvature(RegularityError, ValueError):
    pass


class ProjectionSingularity(RegularityError, ArithmeticError):
    pass


class StepRejected(RegularityError):
    """A projection step failed re-validation; retry with another center."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ReductionFailed(RegularityError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
