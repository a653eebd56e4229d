"""Conditional (heralded) maps: photon subtraction and addition, scissors,
homodyne conditioning and heralded Fock-state preparation.

Beam-splitter and down-conversion maps are evaluated exactly from the
number-conserving sectors of the two-mode unitary, never from a small-angle
expansion. Each map reduces to Kraus operators on mode a:

    rho -> sum_k K_k rho K_k^dag

and the returned probability is the trace of that unnormalized operator.
For the ideal maps ``a`` and ``a^dag`` this is a relative weight, not a
click probability; for heralded maps it is the herald probability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import config, ops
from .errors import ModeCount, ZeroState
from .fock import DensityMatrix, FockVector, State, check_tail, embed, mode_index

DETECTOR_KINDS = ("ideal-fock", "on-off", "inefficient")


@dataclass(frozen=True)
class ConditionResult:
    state: State
    probability: float

    def __iter__(self):
        # allows ``state, p = subtract_ideal(rho)``
        yield self.state
        yield self.probability


@dataclass(frozen=True)
class DetectorModel:
    kind: str = "ideal-fock"
    efficiency: float = 1.0

    def __post_init__(self):
        if self.kind not in DETECTOR_KINDS:
            raise ValueError(f"detector kind must be one of {DETECTOR_KINDS}, got {self.kind!r}")
        if not 0 < self.efficiency <= 1:
            raise ValueError(f"efficiency must lie in (0, 1], got {self.efficiency}")


def _as_detector(detector) -> DetectorModel:
    if detector is None:
        return DetectorModel()
    if isinstance(detector, DetectorModel):
        return detector
    return DetectorModel(str(detector))


def _single(state: State, what: str) -> None:
    if state.modes != 1:
        raise ModeCount(f"{what} acts on a single-mode state")


def apply_kraus(state: State, kraus, weights=None) -> State:
    """Unnormalized image of ``state`` under one or more Kraus matrices.

    A single Kraus matrix on a vector keeps the result pure.
    """
    if isinstance(kraus, np.ndarray) and kraus.ndim == 2:
        kraus = [kraus]
    if weights is None:
        weights = np.ones(len(kraus))
    if isinstance(state, FockVector) and len(kraus) == 1:
        return FockVector(np.sqrt(weights[0]) * (kraus[0] @ state.amps), state.dims)
    rho = state.density().mat
    out = np.zeros_like(rho)
    for w, K in zip(weights, kraus):
        if w:
            out += w * (K @ rho @ K.conj().T)
    return DensityMatrix(out, state.dims)


def _result(unnorm: State, what: str) -> ConditionResult:
    if isinstance(unnorm, FockVector):
        p = unnorm.norm**2
    else:
        p = float(np.trace(unnorm.mat).real)
    if p <= config.settings().zero_threshold:
        raise ZeroState(f"{what}: conditioning probability {p:.3e} is numerically zero")
    if isinstance(unnorm, FockVector):
        state = FockVector(unnorm.amps / np.sqrt(p), unnorm.dims)
    else:
        mat = unnorm.mat / p
        state = DensityMatrix(0.5 * (mat + mat.conj().T), unnorm.dims)
    return ConditionResult(state, float(p))


def _ladder(state: State, mode, dagger: bool) -> np.ndarray:
    a = ops._lower(state.dims[0] if state.modes == 1 else state.dims[mode_index(mode)])
    if dagger:
        a = a.conj().T
    if state.modes == 2:
        return embed(a, mode, state.dims)
    return a


def subtract_ideal(state: State, mode="a") -> ConditionResult:
    """a rho a^dag, normalized; the probability field is the relative weight <n>."""
    return _result(apply_kraus(state, _ladder(state, mode, False)), "subtract_ideal")


def add_ideal(state: State, mode="a") -> ConditionResult:
    """a^dag rho a, normalized; population pushed off the top level is reported."""
    res = _result(apply_kraus(state, _ladder(state, mode, True)), "add_ideal")
    check_tail(res.state, "add_ideal output")
    return res


def subtract_bs_kraus(theta: float, dim: int, k: int, phi: float = 0.0) -> np.ndarray:
    """Kraus operator for k photons reflected into a vacuum ancilla."""
    return ops.bs_kraus(theta, phi, dim, ancilla=0, outcome=k)


def inefficient_terms(state: State, theta: float, eta: float, phi: float = 0.0) -> list:
    """Per-photon-number contributions to the inefficient-detector map.

    Entry k-1 is the unnormalized state heralded when k photons were
    reflected and exactly one of them was registered. The detector is a
    beam splitter of amplitude transmittivity ``eta`` in front of an ideal
    single-photon counter, so k reflected photons give exactly one count
    with probability k eta^2 (1 - eta^2)^(k-1).
    """
    _single(state, "inefficient_terms")
    dim = state.dim
    kraus = ops.bs_kraus_all(theta, phi, dim, ancilla=0)
    terms = []
    for k in range(1, dim):
        w = k * eta**2 * (1 - eta**2) ** (k - 1)
        terms.append(apply_kraus(state, [kraus[k]], [w]))
    return terms


def subtract_bs(state: State, theta: float, detector=None, phi: float = 0.0) -> ConditionResult:
    """Tap a fraction sin^2(theta/2) onto a vacuum ancilla and herald a detection.

    ideal-fock: exactly one photon in the ancilla.
    on-off: at least one photon (sum over k >= 1 outcomes).
    inefficient: a single count behind a lossy detector (see inefficient_terms).
    """
    _single(state, "subtract_bs")
    if not 0 < theta < np.pi:
        raise ValueError("theta must lie in (0, pi)")
    det = _as_detector(detector)
    dim = state.dim
    if det.kind == "ideal-fock":
        unnorm = apply_kraus(state, subtract_bs_kraus(theta, dim, 1, phi))
    elif det.kind == "on-off":
        kraus = ops.bs_kraus_all(theta, phi, dim, ancilla=0)[1:]
        unnorm = apply_kraus(state, list(kraus))
    else:
        terms = inefficient_terms(state, theta, det.efficiency, phi)
        unnorm = DensityMatrix(sum(t.density().mat for t in terms), state.dims)
    return _result(unnorm, f"subtract_bs[{det.kind}]")


def add_bs(state: State, theta: float, phi: float = 0.0) -> ConditionResult:
    """Single photon in the ancilla, vacuum registered at the ancilla output."""
    _single(state, "add_bs")
    K = ops.bs_kraus(theta, phi, state.dim, ancilla=1, outcome=0)
    res = _result(apply_kraus(state, K), "add_bs")
    check_tail(res.state, "add_bs output")
    return res


def pdc_kraus(zeta: float, dim: int, tail: float = 1e-18) -> np.ndarray:
    """<1|_b S2(zeta) |0>_b on mode a, exact up to ``tail``.

    S2 conserves n_a - n_b, so the input |j, 0> only couples to the chain
    |j + m, m>. The chain is truncated in m where tanh(zeta)^(2m) < tail,
    independently of the signal dimension.
    """
    zeta = float(zeta)
    K = np.zeros((dim, dim), dtype=complex)
    if zeta == 0:
        return K
    tz = abs(np.tanh(zeta))
    length = int(np.ceil(np.log(tail) / (2 * np.log(tz)))) + 16 if tz < 1 else 400
    length = max(length, 24)
    m = np.arange(length - 1)
    for j in range(dim - 1):
        # generator zeta (a b - a^dag b^dag) on the chain |j+m, m>
        c = zeta * np.sqrt((j + m + 1) * (m + 1.0))
        gen = np.zeros((length, length))
        gen[m, m + 1] = c
        gen[m + 1, m] = -c
        U = ops.expm_antihermitian(gen)
        K[j + 1, j] = U[1, 0]
    return K


def add_pdc(state: State, zeta: float) -> ConditionResult:
    """Down-conversion with the idler heralded on exactly one photon."""
    _single(state, "add_pdc")
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    res = _result(apply_kraus(state, pdc_kraus(zeta, state.dim)), "add_pdc")
    check_tail(res.state, "add_pdc output")
    return res


def _sin_over_sqrt(lambda_t: float, n: np.ndarray) -> np.ndarray:
    # sin(lt sqrt n)/sqrt n with the n=0 limit lt; np.sinc(x) = sin(pi x)/(pi x)
    return lambda_t * np.sinc(lambda_t * np.sqrt(n) / np.pi)


def jc_kraus(lambda_t: float, dim: int, add: bool) -> np.ndarray:
    n = np.arange(dim, dtype=float)
    f = np.diag(_sin_over_sqrt(lambda_t, n))
    a = ops._lower(dim)
    return f @ a.conj().T if add else a @ f


def jc_add(state: State, lambda_t: float) -> ConditionResult:
    """Excited atom crosses the cavity and is found in the ground state."""
    _single(state, "jc_add")
    if lambda_t < 0:
        raise ValueError("lambda_t must be nonnegative")
    res = _result(apply_kraus(state, jc_kraus(lambda_t, state.dim, True)), "jc_add")
    check_tail(res.state, "jc_add output")
    return res


def jc_subtract(state: State, lambda_t: float) -> ConditionResult:
    """Ground-state atom crosses the cavity and is found excited."""
    _single(state, "jc_subtract")
    if lambda_t < 0:
        raise ValueError("lambda_t must be nonnegative")
    return _result(apply_kraus(state, jc_kraus(lambda_t, state.dim, False)), "jc_subtract")


def scissors(state: State) -> ConditionResult:
    """Quantum scissors with a single-photon resource and 50:50 splitters.

    The heralded output keeps the first two Fock amplitudes,
    gamma_0 |0> + gamma_1 |1>, and the herald succeeds with probability
    (|gamma_0|^2 + |gamma_1|^2) / 4. Mixed inputs keep their {|0>, |1>} block.
    """
    _single(state, "scissors")
    if state.dim < 2:
        raise ValueError("scissors needs dim >= 2")
    P = np.zeros((state.dim, state.dim))
    P[0, 0] = P[1, 1] = 0.5
    return _result(apply_kraus(state, P), "scissors")


def hermite_amplitudes(x: float, dim: int) -> np.ndarray:
    """<n|x> for the continuum eigenstate of q = a + a^dag, n < dim.

    These are Hermite functions psi_n(x / sqrt 2) / 2^(1/4), built by the
    three-term recurrence; they satisfy int |<n|x>|^2 dx = 1.
    """
    y = x / np.sqrt(2)
    psi = np.zeros(dim)
    psi[0] = np.pi**-0.25 * np.exp(-(y**2) / 2)
    if dim > 1:
        psi[1] = np.sqrt(2) * y * psi[0]
    for n in range(1, dim - 1):
        psi[n + 1] = np.sqrt(2 / (n + 1)) * y * psi[n] - np.sqrt(n / (n + 1)) * psi[n - 1]
    return psi / 2**0.25


def quadrature_vector(x: float, dim: int, phi: float = 0.0) -> np.ndarray:
    """Truncated eigenvector of q_phi = a e^{-i phi} + a^dag e^{i phi}, unit norm."""
    vec = hermite_amplitudes(x, dim) * np.exp(1j * phi * np.arange(dim))
    return vec / np.linalg.norm(vec)


def homodyne_condition(state2: State, x: float = 0.0, mode="b", phi: float = 0.0) -> ConditionResult:
    """Project one mode of a two-mode state on the quadrature value ``x``.

    The continuum eigenvector is delta-normalized; here it is renormalized
    after truncation, so the probability is relative to that convention.
    """
    if state2.modes != 2:
        raise ModeCount("homodyne_condition needs a two-mode state")
    m = mode_index(mode)
    da, db = state2.dims
    v = quadrature_vector(x, state2.dims[m], phi)
    if isinstance(state2, FockVector):
        psi = state2.tensor_view()
        out = psi @ v.conj() if m == 1 else v.conj() @ psi
        return _result(FockVector(out), "homodyne_condition")
    r = state2.mat.reshape(da, db, da, db)
    if m == 1:
        red = np.einsum("ijkl,j,l->ik", r, v.conj(), v)
    else:
        red = np.einsum("ijkl,i,k->jl", r, v.conj(), v)
    return _result(DensityMatrix(red), "homodyne_condition")


def herald_fock(zeta: float, counts=(1, 1), dim: int = 8) -> ConditionResult:
    """Fock state from a two-mode squeezed vacuum, heralded on split idler counts.

    Mode b of the squeezed pair is split on a 50:50 beam splitter with a
    vacuum port and the two outputs are projected on ``counts``. The splitter
    conserves photon number, so only the |n, n> term with n = sum(counts)
    contributes and mode a is left in |n>.
    """
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    c1, c2 = (int(c) for c in counts)
    n = c1 + c2
    if n >= dim:
        raise ValueError(f"dim {dim} cannot hold |{n}>")
    c_n = (-np.tanh(zeta)) ** n / np.cosh(zeta)
    # block basis index = photons in the second output; input |n>|0> is index 0
    block = ops.beamsplitter_block(np.pi / 2, 0.0, n)
    amps = np.zeros(dim, dtype=complex)
    amps[n] = c_n * block[c2, 0]
    return _result(FockVector(amps), "herald_fock")


def herald_fock2(zeta: float, dim: int = 8) -> ConditionResult:
    """|2> heralded by a coincidence behind a 50:50 split of the idler."""
    return herald_fock(zeta, (1, 1), dim)
