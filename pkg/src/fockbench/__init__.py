"""Truncated Fock-space simulation of photon addition, subtraction and
conditional state engineering."""

from . import cond, config, engineer, entangle, fock, ops, phasespace, stats
from .cond import ConditionResult, DetectorModel
from .errors import (
    BothMixed,
    DegenerateLeading,
    DimensionMismatch,
    DivergentSeries,
    FockError,
    ModeCount,
    NotPure,
    TruncationError,
    TruncationWarning,
    WindowTooSmall,
    ZeroMean,
    ZeroState,
)
from .fock import DensityMatrix, FockVector, fock_state, normalize, partial_trace, partial_transpose, tensor, vacuum
from .ops import OperatorMatrix
from .phasespace import PhaseGrid, Window

__all__ = [
    "cond", "config", "engineer", "entangle", "fock", "ops", "phasespace", "stats",
    "ConditionResult", "DetectorModel", "DensityMatrix", "FockVector", "OperatorMatrix",
    "PhaseGrid", "Window", "fock_state", "normalize", "partial_trace", "partial_transpose",
    "tensor", "vacuum",
    "BothMixed", "DegenerateLeading", "DimensionMismatch", "DivergentSeries", "FockError",
    "ModeCount", "NotPure", "TruncationError", "TruncationWarning", "WindowTooSmall",
    "ZeroMean", "ZeroState",
]
