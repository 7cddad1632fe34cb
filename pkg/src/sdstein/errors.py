"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`SDSteinError`
so callers can catch the whole family at once.
"""


class SDSteinError(Exception):
    pass


class InvalidLevyMeasure(SDSteinError, ValueError):
    pass


class NonPositiveRadius(SDSteinError, ValueError):
    pass


class UnknownDirection(SDSteinError, KeyError):
    pass


class QuadratureFailure(SDSteinError, RuntimeError):
    pass


class DivergentIntegral(SDSteinError, ArithmeticError):
    pass


class DivergentJumpIntegral(DivergentIntegral):
    pass


class NonIntegrableCF(SDSteinError, ValueError):
    pass


class GridTooCoarse(SDSteinError, ValueError):
    pass


class UnsupportedLaw(SDSteinError, NotImplementedError):
    pass


class InfiniteIntensity(SDSteinError, ArithmeticError):
    pass


class TruncationBudgetExceeded(SDSteinError, RuntimeError):
    pass


class RouteUnavailable(SDSteinError, ValueError):
    pass


class BudgetExceeded(SDSteinError, RuntimeError):
    pass


class TailNotConverged(SDSteinError, RuntimeError):
    pass


class InfiniteSecondMomentNu(SDSteinError, ValueError):
    pass


class SingularSystem(SDSteinError, ArithmeticError):
    pass


class DegenerateDenominator(SDSteinError, ZeroDivisionError):
    pass


class MomentMismatch(SDSteinError, ValueError):
    pass


class SizeMismatch(SDSteinError, ValueError):
    pass


class SizeTooLarge(SDSteinError, ValueError):
    pass


class EmptyDictionary(SDSteinError, ValueError):
    pass


class UnknownExperiment(SDSteinError, KeyError):
    pass


class ConfigInvalid(SDSteinError, ValueError):
    def __init__(self, errors):
        if isinstance(errors, str):
            errors = {"<config>": errors}
        self.errors = dict(errors)
        msg = "; ".join(f"{k}: {v}" for k, v in self.errors.items())
        super().__init__(msg)
