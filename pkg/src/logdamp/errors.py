"""Exception hierarchy shared by every module."""


class LogDampError(Exception):
    """Base class for all package errors."""


class InvalidParameter(LogDampError, ValueError):
    pass


class RegimeError(LogDampError, ValueError):
    """Operation is not defined for the damping regime of ``mu``."""


class DegenerateDatum(LogDampError, ValueError):
    pass


class UndefinedRatio(LogDampError, ZeroDivisionError):
    pass


class DivergentIntegral(LogDampError, ValueError):
    pass


class CannotFit(LogDampError, ValueError):
    pass


class NoConvergence(LogDampError, ArithmeticError):
    """Adaptive quadrature hit ``max_depth`` before meeting its tolerance.

    The best available estimate is attached as ``result`` (an
    :class:`~logdamp.quadrature.IntegralResult`) and, when raised from a time
    series evaluation, the offending time as ``t``.
    """

    def __init__(self, message, result=None, t=None):
        super().__init__(message)
        self.result = result
        self.t = t
