"""Truncated Fock-space state containers and the basic bookkeeping on them.

Two-mode objects use mode-a-major ordering: the joint basis index of
``|n_a, n_b>`` is ``n_a * dim_b + n_b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import config
from .errors import ModeCount, ZeroState


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


def _dims(dims, size: int, square: bool) -> tuple[int, ...]:
    if dims is None:
        return (size,)
    dims = tuple(int(d) for d in np.atleast_1d(dims))
    if len(dims) not in (1, 2) or min(dims) < 1:
        raise ValueError(f"dims must be one or two positive integers, got {dims}")
    if int(np.prod(dims)) != size:
        raise ValueError(f"dims {dims} do not match {'matrix side' if square else 'length'} {size}")
    return dims


@dataclass(frozen=True, eq=False)
class FockVector:
    """Pure state: complex amplitudes over |0>..|N> (or the joint two-mode basis)."""

    amps: np.ndarray
    dims: tuple[int, ...] = None

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amps))
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "dims", _dims(self.dims, amps.size, square=False))

    @property
    def modes(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        if self.modes != 1:
            raise ModeCount("dim is defined for single-mode states; use dims")
        return self.dims[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amps, self.amps.conj()), self.dims)

    def tensor_view(self) -> np.ndarray:
        return self.amps.reshape(self.dims)

    def __len__(self):
        return self.amps.size

    def __repr__(self):
        return f"FockVector(dims={self.dims}, norm={self.norm:.6g})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Mixed (or pure) state as a Hermitian matrix over the truncated basis."""

    mat: np.ndarray
    dims: tuple[int, ...] = None

    def __post_init__(self):
        mat = _frozen(self.mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {mat.shape}")
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "dims", _dims(self.dims, mat.shape[0], square=True))

    @property
    def modes(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        if self.modes != 1:
            raise ModeCount("dim is defined for single-mode states; use dims")
        return self.dims[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.mat, self.mat)))

    def density(self) -> "DensityMatrix":
        return self

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.mat - self.mat.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.mat + self.mat.conj().T))[0])

    def check(self, herm_tol=1e-10, trace_tol=1e-10, pos_tol=1e-9) -> None:
        """Raise ValueError if Hermiticity, unit trace or positivity fail."""
        if self.hermiticity_error() > herm_tol:
            raise ValueError(f"not Hermitian: {self.hermiticity_error():.2e}")
        if abs(self.trace - 1) > trace_tol:
            raise ValueError(f"trace {self.trace!r} differs from 1")
        if self.min_eigenvalue() < -pos_tol:
            raise ValueError(f"negative eigenvalue {self.min_eigenvalue():.2e}")

    def __repr__(self):
        return f"DensityMatrix(dims={self.dims}, trace={self.trace:.6g})"


State = Union[FockVector, DensityMatrix]


def mode_index(mode) -> int:
    if mode in (0, "a", "A"):
        return 0
    if mode in (1, "b", "B"):
        return 1
    raise ValueError(f"unknown mode {mode!r}; use 0/'a' or 1/'b'")


def as_density(state: State) -> DensityMatrix:
    return state.density()


def fock_state(n: int, dim: int) -> FockVector:
    if not 0 <= n < dim:
        raise ValueError(f"|{n}> does not fit in dimension {dim}")
    amps = np.zeros(dim, dtype=complex)
    amps[n] = 1
    return FockVector(amps)


def vacuum(dims=None) -> FockVector:
    dims = (config.default_dim(),) if dims is None else tuple(np.atleast_1d(dims))
    amps = np.zeros(int(np.prod(dims)), dtype=complex)
    amps[0] = 1
    return FockVector(amps, dims)


def normalize(state: State, threshold: float | None = None) -> State:
    """Rescale to unit norm (vectors) or unit trace (density matrices).

    Raises ZeroState when the norm or trace is below ``threshold``: the
    usual signature of conditioning on an impossible outcome.
    """
    if threshold is None:
        threshold = config.settings().zero_threshold
    if isinstance(state, FockVector):
        nrm = state.norm
        if nrm <= threshold:
            raise ZeroState(f"vector norm {nrm:.3e} below threshold")
        return FockVector(state.amps / nrm, state.dims)
    tr = np.trace(state.mat).real
    if tr <= threshold:
        raise ZeroState(f"trace {tr:.3e} below threshold")
    return DensityMatrix(state.mat / tr, state.dims)


def _require_modes(state: State, modes: int, what: str) -> None:
    if state.modes != modes:
        raise ModeCount(f"{what} needs a {modes}-mode state, got {state.modes} modes")


def tensor(a: State, b: State) -> State:
    """Joint state of two single-mode states, mode a major."""
    _require_modes(a, 1, "tensor")
    _require_modes(b, 1, "tensor")
    dims = (a.dim, b.dim)
    if isinstance(a, FockVector) and isinstance(b, FockVector):
        return FockVector(np.kron(a.amps, b.amps), dims)
    return DensityMatrix(np.kron(a.density().mat, b.density().mat), dims)


def partial_trace(rho: State, keep=0) -> DensityMatrix:
    """Reduced state of mode ``keep`` ('a'/0 or 'b'/1)."""
    _require_modes(rho, 2, "partial_trace")
    keep = mode_index(keep)
    da, db = rho.dims
    if isinstance(rho, FockVector):
        psi = rho.tensor_view()
        red = psi @ psi.conj().T if keep == 0 else psi.T @ psi.conj()
    else:
        r = rho.mat.reshape(da, db, da, db)
        red = np.einsum("ijkj->ik", r) if keep == 0 else np.einsum("ijil->jl", r)
    return DensityMatrix(red)


def partial_transpose(rho: State, mode=1) -> np.ndarray:
    """Partial transpose on ``mode``; Hermitian with unit trace, possibly indefinite."""
    _require_modes(rho, 2, "partial_transpose")
    mode = mode_index(mode)
    da, db = rho.dims
    r = rho.density().mat.reshape(da, db, da, db)
    r = r.transpose(2, 1, 0, 3) if mode == 0 else r.transpose(0, 3, 2, 1)
    return r.reshape(da * db, da * db)


def populations(state: State) -> np.ndarray:
    if isinstance(state, FockVector):
        return np.abs(state.amps) ** 2
    return np.real(np.diag(state.mat)).copy()


def tail_mass(state: State) -> float:
    """Population on the top two levels of each mode.

    Two levels rather than one so that parity-definite states (squeezed
    vacuum, cats) cannot hide their tail on the unchecked parity.
    """
    p = populations(state).reshape(state.dims)
    if state.modes == 1:
        return float(p[-2:].sum())
    return float(p.sum() - p[:-2, :-2].sum())


def check_tail(state: State, what: str = "state") -> State:
    config.report_truncation(tail_mass(state), what)
    return state


def embed(op: np.ndarray, mode, dims) -> np.ndarray:
    """Lift a single-mode matrix to the two-mode space."""
    mode = mode_index(mode)
    da, db = dims
    if mode == 0:
        return np.kron(op, np.eye(db))
    return np.kron(np.eye(da), op)


def pad(state: State, dim: int) -> State:
    """Zero-extend a single-mode state to a larger truncation (an exact embedding)."""
    _require_modes(state, 1, "pad")
    if dim < state.dim:
        raise ValueError("pad cannot shrink a state")
    if isinstance(state, FockVector):
        amps = np.zeros(dim, dtype=complex)
        amps[: state.dim] = state.amps
        return FockVector(amps)
    mat = np.zeros((dim, dim), dtype=complex)
    mat[: state.dim, : state.dim] = state.mat
    return DensityMatrix(mat)


def truncate(state: State, dim: int) -> State:
    """Keep levels below ``dim`` without renormalizing."""
    _require_modes(state, 1, "truncate")
    if isinstance(state, FockVector):
        return FockVector(state.amps[:dim])
    return DensityMatrix(state.mat[:dim, :dim])


def to_dict(state: State) -> dict:
    """Interchange form {modes, dims, re, im}; arrays are flattened row-major.

    A vector has prod(dims) entries and a density matrix prod(dims)**2.
    """
    data = state.amps if isinstance(state, FockVector) else state.mat.ravel()
    return {
        "modes": state.modes,
        "dims": list(state.dims),
        "re": [float(x) for x in data.real],
        "im": [float(x) for x in data.imag],
    }


def from_dict(obj: dict) -> State:
    unknown = set(obj) - {"modes", "dims", "re", "im"}
    if unknown:
        raise ValueError(f"unknown state keys: {sorted(unknown)}")
    dims = tuple(int(d) for d in obj["dims"])
    if len(dims) != int(obj["modes"]):
        raise ValueError("modes does not match the number of dims")
    if len(obj["re"]) != len(obj["im"]):
        raise ValueError("re and im differ in length")
    data = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    size = int(np.prod(dims))
    if data.size == size:
        return FockVector(data, dims)
    if data.size == size * size:
        return DensityMatrix(data.reshape(size, size), dims)
    raise ValueError(f"{data.size} entries fit neither a vector nor a matrix over dims {dims}")
