"""Exception and warning types shared across the package."""


class FockError(Exception):
    """Base class for all errors raised by fockbench."""


class ZeroState(FockError):
    """A conditioning event has (numerically) zero probability."""


class ModeCount(FockError):
    """An operand has the wrong number of modes for the operation."""


class DimensionMismatch(FockError):
    """Operator and state dimensions are incompatible."""


class DivergentSeries(FockError):
    """A quasiprobability series or characteristic function did not settle."""


class WindowTooSmall(FockError):
    """A phase-space window does not contain the state's support."""


class BothMixed(FockError):
    """Fidelity requested between two mixed states."""


class NotPure(FockError):
    """A pure-state-only measure was given a mixed state."""


class DegenerateLeading(FockError):
    """The leading coefficient of a target superposition vanishes."""


class ZeroMean(FockError):
    """Mandel Q is undefined for a state with zero mean photon number."""


class TruncationError(FockError):
    """Raised instead of TruncationWarning when strict truncation is active."""


class TruncationWarning(UserWarning):
    """Population reached the top of the truncated ladder."""
