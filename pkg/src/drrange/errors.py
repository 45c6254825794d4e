"""Exception hierarchy shared by all modules."""


class DrError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(DrError, ValueError):
    pass


class NotACone(DrError, ValueError):
    pass


class ConstructionError(DrError, ValueError):
    pass


class OperatorError(DrError, RuntimeError):
    pass


class InternalInconsistency(DrError, RuntimeError):
    pass


class DescriptorMissing(DrError, ValueError):
    pass


class InexactRangePair(DrError, ValueError):
    pass


class NotConverged(DrError, RuntimeError):
    """An iterative scheme ran out of budget.

    The last iterate and its residual are kept so callers can still inspect them.
    """

    def __init__(self, message, last_iterate=None, residual=float("nan")):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class NumericalBreakdown(DrError, ArithmeticError):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConditionNotMet(DrError, ValueError):
    """A routine's mathematical precondition does not hold for the instance."""
