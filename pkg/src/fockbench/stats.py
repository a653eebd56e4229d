"""Closed-form state builders and photon-number statistics.

The builders write amplitudes directly from their Fock expansions rather
than exponentiating generators, which makes them independent checks on
the unitaries in :mod:`fockbench.ops`. They are not renormalized after
truncation; the missing weight is reported through the tail-mass check.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import config
from .errors import ModeCount, ZeroMean
from .fock import DensityMatrix, FockVector, State, check_tail, populations


def _poisson_amps(beta: complex, dim: int) -> np.ndarray:
    """e^{-|beta|^2/2} beta^n / sqrt(n!) without overflow."""
    n = np.arange(dim)
    beta = complex(beta)
    if beta == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1
        return out
    logmag = -0.5 * abs(beta) ** 2 + n * np.log(abs(beta)) - 0.5 * gammaln(n + 1)
    return np.exp(logmag) * np.exp(1j * n * np.angle(beta))


def coherent(beta: complex, dim: int | None = None) -> FockVector:
    dim = dim or config.default_dim()
    return check_tail(FockVector(_poisson_amps(beta, dim)), f"coherent({beta})")


def thermal(n_bar: float, dim: int | None = None) -> DensityMatrix:
    """Bose-Einstein populations n_bar^n / (1 + n_bar)^(n+1)."""
    dim = dim or config.default_dim()
    if n_bar < 0:
        raise ValueError("n_bar must be nonnegative")
    n = np.arange(dim)
    if n_bar == 0:
        p = (n == 0).astype(float)
    else:
        p = np.exp(n * np.log(n_bar) - (n + 1) * np.log1p(n_bar))
    return check_tail(DensityMatrix(np.diag(p)), f"thermal({n_bar})")


def squeezed_vacuum(zeta: float, dim: int | None = None) -> FockVector:
    """sqrt(sech z) sum_n sqrt((2n)!)/n! (-tanh z / 2)^n |2n>."""
    dim = dim or config.default_dim()
    zeta = float(zeta)
    amps = np.zeros(dim, dtype=complex)
    n = np.arange((dim + 1) // 2)
    base = -np.tanh(zeta) / 2
    if base == 0:
        amps[0] = 1
    else:
        logmag = (
            -0.5 * np.log(np.cosh(zeta))
            + n * np.log(abs(base))
            + 0.5 * gammaln(2 * n + 1)
            - gammaln(n + 1)
        )
        amps[2 * n] = np.sign(base) ** n * np.exp(logmag)
    return check_tail(FockVector(amps), f"squeezed_vacuum({zeta})")


def tmsv(zeta: float, dims=None) -> FockVector:
    """sech z sum_n (-tanh z)^n |n, n>."""
    if dims is None:
        dims = (config.DEFAULT_DIM_TWO_MODE,) * 2
    dims = tuple(int(d) for d in np.atleast_1d(dims))
    if len(dims) == 1:
        dims = dims * 2
    da, db = dims
    amps = np.zeros((da, db), dtype=complex)
    n = np.arange(min(da, db))
    amps[n, n] = (-np.tanh(zeta)) ** n / np.cosh(zeta)
    return check_tail(FockVector(amps.ravel(), dims), f"tmsv({zeta})")


def cat(beta: complex, phi_sch: float = 0.0, dim: int | None = None) -> FockVector:
    """N (|beta> + e^{i phi} |-beta>) with the exact overlap term in N.

    At beta -> 0 the odd cat tends to |1>; that limit is taken explicitly
    when the closed-form normalization underflows.
    """
    dim = dim or config.default_dim()
    n = np.arange(dim)
    weight = 1 + np.exp(1j * phi_sch) * (-1.0) ** n
    weight[np.abs(weight) < 1e-12] = 0
    norm2 = 2 * (1 + np.cos(phi_sch) * np.exp(-2 * abs(beta) ** 2))
    if norm2 > 1e-12:
        amps = _poisson_amps(beta, dim) * weight / np.sqrt(norm2)
    else:
        # near-cancellation: normalize beta^n / sqrt(n!) directly
        raw = np.zeros(dim, dtype=complex)
        if abs(beta) == 0:
            first = int(np.argmax(np.abs(weight) > 1e-12))
            raw[first] = 1
        else:
            raw = _poisson_amps(beta, dim) * weight
        amps = raw / np.linalg.norm(raw)
    return check_tail(FockVector(amps), f"cat({beta}, {phi_sch})")


@dataclass(frozen=True, eq=False)
class PhotonNumberDistribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def mean(self) -> float:
        return float(np.arange(self.probs.size) @ self.probs)

    @property
    def variance(self) -> float:
        n = np.arange(self.probs.size)
        return float((n - self.mean) ** 2 @ self.probs)

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    def peak(self) -> int:
        return int(np.argmax(self.probs))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,probability\n")
        for k, p in enumerate(self.probs):
            buf.write(f"{k},{p:.17g}\n")
        return buf.getvalue()


def pnd(state: State) -> PhotonNumberDistribution:
    if state.modes != 1:
        raise ModeCount("pnd needs a single-mode state; take a partial trace first")
    return PhotonNumberDistribution(populations(state))


def moments(state: State) -> dict:
    d = pnd(state)
    return {"mean": d.mean, "variance": d.variance}


def mandel_q(state: State) -> float:
    """Variance minus mean of the photon number (negative means sub-Poissonian).

    The distribution is normalized first, so conditioned states that carry
    a herald weight can be passed directly.
    """
    d = pnd(state)
    total = d.total
    if total <= 0:
        raise ZeroMean("empty distribution")
    d = PhotonNumberDistribution(d.probs / total)
    if d.mean <= config.settings().zero_threshold:
        raise ZeroMean("Mandel Q needs a nonzero mean photon number")
    return d.variance - d.mean
