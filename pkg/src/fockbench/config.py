"""Numerical thresholds and truncation defaults.

Values are read through a context variable so a block of code can tighten
the truncation policy without touching global state::

    with strict_truncation():
        squeezed_vacuum(3.0, 32)   # raises TruncationError
"""

from __future__ import annotations

import os
import warnings
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, replace

from .errors import TruncationError, TruncationWarning

DEFAULT_DIM = 64
DEFAULT_DIM_TWO_MODE = 40
GUARD_BAND = 8


@dataclass(frozen=True)
class Settings:
    tail_tol: float = 1e-10
    zero_threshold: float = 1e-14
    strict: bool = False


_settings: ContextVar[Settings] = ContextVar("fockbench_settings", default=Settings())


def settings() -> Settings:
    return _settings.get()


@contextmanager
def override(**changes):
    token = _settings.set(replace(_settings.get(), **changes))
    try:
        yield _settings.get()
    finally:
        _settings.reset(token)


def strict_truncation():
    return override(strict=True)


def default_dim() -> int:
    """Single-mode truncation; ``FOCKBENCH_DIM`` overrides the built-in default."""
    env = os.environ.get("FOCKBENCH_DIM")
    if env:
        return int(env)
    return DEFAULT_DIM


def report_truncation(tail: float, what: str) -> None:
    s = settings()
    if tail <= s.tail_tol:
        return
    msg = f"{what}: population {tail:.3e} at the truncation edge exceeds {s.tail_tol:.1e}"
    if s.strict:
        raise TruncationError(msg)
    warnings.warn(msg, TruncationWarning, stacklevel=3)
