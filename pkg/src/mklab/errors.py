"""Exception hierarchy shared by all mklab modules."""


class MKLabError(Exception):
    """Base class for every error raised by mklab."""


class SizeLimitError(MKLabError, ValueError):
    """A size parameter is outside the supported range."""


class PosetError(MKLabError, ValueError):
    """Two partitions are not comparable in the refinement order."""


class InsertionError(MKLabError, ValueError):
    """Insertion position is not a Kreweras point of the outer partition."""


class ConditioningError(MKLabError, ValueError):
    """The Weingarten class system is requested with N < k."""


class NumericalError(MKLabError, ArithmeticError):
    """An iterative numerical routine failed to converge."""


class InterlacingError(MKLabError, RuntimeError):
    """A sampled spectrum violated Cauchy interlacing."""
