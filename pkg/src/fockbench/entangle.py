"""Entanglement measures for two-mode states and photon-subtracted
two-mode squeezed vacua.

Entropies are in bits (base-2 logarithms).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import config, stats
from .errors import ModeCount, NotPure, ZeroState
from .fock import FockVector, State, check_tail, embed, partial_trace, partial_transpose
from .ops import _lower

_EIG_FLOOR = 1e-14


def _two(state: State, what: str) -> None:
    if state.modes != 2:
        raise ModeCount(f"{what} needs a two-mode state")


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > _EIG_FLOOR]
    return float(-(p * np.log2(p)).sum())


def schmidt_coefficients(psi: FockVector) -> np.ndarray:
    """Singular values of the amplitude matrix, normalized to unit sum of squares."""
    _two(psi, "schmidt_coefficients")
    s = np.linalg.svd(psi.tensor_view(), compute_uv=False)
    return s / np.linalg.norm(s)


def von_neumann(state2: State, purity_tol: float = 1e-8) -> float:
    """Entropy of the mode-a marginal of a pure two-mode state."""
    _two(state2, "von_neumann")
    if isinstance(state2, FockVector):
        return _entropy_bits(schmidt_coefficients(state2) ** 2)
    rho = state2.mat / state2.trace
    if np.real(np.vdot(rho, rho)) < 1 - purity_tol:
        raise NotPure("von Neumann entropy of the marginal measures entanglement only for pure states")
    lam = np.linalg.eigvalsh(partial_trace(state2.density(), 0).mat / state2.trace)
    return _entropy_bits(lam)


def linear_entropy_m(state2: State) -> float:
    """1 - Tr(rho_a^2)."""
    _two(state2, "linear_entropy_m")
    red = partial_trace(state2, 0).mat
    red = red / np.trace(red).real
    return float(1 - np.real(np.vdot(red, red)))


def negativity_spectrum(state2: State) -> np.ndarray:
    """Eigenvalues of the partial transpose (on mode b) of the normalized state."""
    _two(state2, "negativity_spectrum")
    rho = state2.density()
    pt = partial_transpose(rho, 1) / rho.trace
    return np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))


def log_negativity(state2: State) -> tuple[float, float]:
    """(log2 of the trace norm of the partial transpose, its minimum eigenvalue).

    Pure states use the Schmidt form: the partial transpose has eigenvalues
    s_i^2 and +-s_i s_j, so the trace norm is (sum s_i)^2 and the most
    negative eigenvalue is -s_1 s_2.
    """
    _two(state2, "log_negativity")
    if isinstance(state2, FockVector):
        s = schmidt_coefficients(state2)
        lmin = -s[0] * s[1] if s.size > 1 and s[1] > 0 else float(np.min(s**2))
        return float(max(0.0, 2 * np.log2(s.sum()))), float(lmin)
    ev = negativity_spectrum(state2)
    return float(max(0.0, np.log2(np.abs(ev).sum()))), float(ev[0])


@dataclass(frozen=True)
class EntanglementReport:
    von_neumann: float | None
    linear_entropy_m: float
    log_negativity: float
    min_pt_eigenvalue: float

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def report(state2: State) -> EntanglementReport:
    """All measures; von_neumann is None for mixed input."""
    try:
        vn = von_neumann(state2)
    except NotPure:
        vn = None
    ln, lmin = log_negativity(state2)
    return EntanglementReport(vn, linear_entropy_m(state2), ln, lmin)


SUBTRACTIONS = ("both_modes", "one_mode", "delocalized")


def _exact_norm2(zeta: float, which: str) -> float:
    """Squared norm of the subtracted vector over the untruncated space.

    For the squeezed pair <n_a> = <n_b> = sinh^2, <a^dag b> = 0 and
    <n_a n_b> = <n^2> = sinh^2 cosh(2 zeta).
    """
    sh2 = np.sinh(zeta) ** 2
    if which == "both_modes":
        return sh2 * np.cosh(2 * zeta)
    return sh2


def subtracted_states(zeta: float, which: str = "both_modes", dims=None) -> FockVector:
    """Two-mode squeezed vacuum with one photon removed.

    both_modes: a b |S2>; one_mode: a |S2>; delocalized: (a + b)/sqrt 2 |S2>,
    where the path of the removed photon is erased. Like the closed-form
    builders in :mod:`fockbench.stats`, amplitudes are divided by the exact
    norm of the untruncated state rather than renormalized after truncation;
    the weight lost to truncation is reported by the tail check.
    """
    if which not in SUBTRACTIONS:
        raise ValueError(f"which must be one of {SUBTRACTIONS}")
    if zeta == 0:
        raise ZeroState("no photons to subtract from the vacuum")
    if dims is None:
        dims = (config.DEFAULT_DIM_TWO_MODE,) * 2
    dims = tuple(int(d) for d in np.atleast_1d(dims))
    if len(dims) == 1:
        dims = dims * 2
    # one spare level per mode so the ladder operators fill the top stored level exactly
    work = (dims[0] + 1, dims[1] + 1)
    with config.override(tail_tol=np.inf):
        base = stats.tmsv(zeta, work).amps
    A = embed(_lower(work[0]), 0, work)
    B = embed(_lower(work[1]), 1, work)
    if which == "both_modes":
        vec = A @ (B @ base)
    elif which == "one_mode":
        vec = A @ base
    else:
        vec = (A @ base + B @ base) / np.sqrt(2)
    vec = vec.reshape(work)[: dims[0], : dims[1]].ravel()
    out = FockVector(vec / np.sqrt(_exact_norm2(zeta, which)), dims)
    return check_tail(out, f"subtracted_states({zeta}, {which})")


def tmsv_entropy(zeta: float) -> float:
    """cosh^2 log2 cosh^2 - sinh^2 log2 sinh^2: entropy of the squeezed pair."""
    c2, s2 = np.cosh(zeta) ** 2, np.sinh(zeta) ** 2
    return float(c2 * np.log2(c2) - (s2 * np.log2(s2) if s2 > 0 else 0.0))


def both_modes_marginal_closed_form(zeta: float, dim: int) -> np.ndarray:
    """P(n) = (n+1)^2 tanh^(2n) / (cosh^4 cosh 2zeta) for the doubly subtracted pair."""
    n = np.arange(dim)
    return (n + 1) ** 2 * np.tanh(zeta) ** (2 * n) / (np.cosh(zeta) ** 4 * np.cosh(2 * zeta))


def delocalized_marginal_closed_form(zeta: float, dim: int) -> np.ndarray:
    """Mode-a marginal of (a+b)/sqrt 2 |S2>, normalized.

    With t = -tanh(zeta) and |S2> = sech sum t^n |n,n>, the state is
    (sech / sqrt 2) sum_n sqrt(n) t^n (|n-1,n> + |n,n-1>), giving
    rho_a = (sech^2 / (2 sinh^2)) sum_n [ n t^(2n) (|n-1><n-1| + |n><n|)
            + sqrt(n(n+1)) t^(2n+1) (|n-1><n+1| + |n+1><n-1|) ].
    """
    t = -np.tanh(zeta)
    pref = 1 / (2 * np.cosh(zeta) ** 2 * np.sinh(zeta) ** 2)
    rho = np.zeros((dim, dim))
    for n in range(1, dim + 1):
        w = n * t ** (2 * n)
        if n - 1 < dim:
            rho[n - 1, n - 1] += w
        if n < dim:
            rho[n, n] += w
        if n + 1 < dim:
            c = np.sqrt(n * (n + 1)) * t ** (2 * n + 1)
            rho[n - 1, n + 1] += c
            rho[n + 1, n - 1] += c
    return pref * rho


def one_mode_linear_entropy_closed_form(zeta: float, terms: int = 2000) -> float:
    """1 - (2/sinh 2zeta)^4 sum n^2 tanh^(4n) for a |S2>, normalized."""
    n = np.arange(1, terms)
    return float(1 - (2 / np.sinh(2 * zeta)) ** 4 * np.sum(n**2 * np.tanh(zeta) ** (4 * n)))
