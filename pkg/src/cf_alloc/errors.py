"""Exception hierarchy."""


class CfAllocError(Exception):
    """Base class for all library errors."""


class ConfigError(CfAllocError, ValueError):
    pass


class DimensionMismatch(CfAllocError, ValueError):
    pass


class ZeroChannel(CfAllocError):
    """The channel estimate is identically zero; the trial must be skipped."""


class ZeroPower(CfAllocError):
    pass


class NumericalFailure(CfAllocError):
    pass


class NonFiniteIterate(NumericalFailure):
    """A gradient iterate left the finite range (step size too large)."""


class EmptyCandidateSet(CfAllocError, ValueError):
    pass


class TooManySubsets(CfAllocError):
    pass


class IoFailure(CfAllocError, OSError):
    pass
