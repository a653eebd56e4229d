"""Operator matrices on the truncated space.

Unitaries are obtained from their generators by exponentiation: the
generator is anti-Hermitian, so ``exp(G) = V exp(-i w) V^dagger`` with
``i G = V w V^dagger``. The generators of displacement, squeezing and beam
splitting decouple into invariant sectors (photon-number parity, number
difference, total number), and each sector is diagonalized on its own.

Conventions follow the usual quantum-optics choices:

* ``D(xi) = exp(xi a^dag - xi^* a)``, so ``D^dag a D = a + xi``
* ``q = a + a^dag`` and ``p = i(a^dag - a)``, vacuum variance 1
* ``S1(zeta) = exp((zeta a^2 - zeta a^dag^2) / 2)`` for real zeta
* ``S2(zeta) = exp(zeta (a b - a^dag b^dag))`` for real zeta
* ``B(theta, phi) = exp(theta/2 (e^{i phi} a^dag b - e^{-i phi} a b^dag))``
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from . import config
from .errors import DimensionMismatch, ModeCount
from .fock import DensityMatrix, FockVector, State, embed


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    mat: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        mat = np.array(self.mat, dtype=complex)
        mat.setflags(write=False)
        dims = tuple(int(d) for d in np.atleast_1d(self.dims))
        if mat.shape != (int(np.prod(dims)),) * 2:
            raise DimensionMismatch(f"matrix shape {mat.shape} does not match dims {dims}")
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "dims", dims)

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.mat.conj().T, self.dims)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            if other.dims != self.dims:
                raise DimensionMismatch(f"{self.dims} vs {other.dims}")
            return OperatorMatrix(self.mat @ other.mat, self.dims)
        if isinstance(other, FockVector):
            return apply(self, other)
        return NotImplemented

    def __repr__(self):
        return f"OperatorMatrix(dims={self.dims})"


def expm_antihermitian(gen, keep=None) -> np.ndarray:
    """Exponential of an anti-Hermitian (dense or sparse) matrix, sector by sector.

    ``keep`` selects the basis indices to return (rows and columns), which
    lets a unitary be computed on a padded space and cropped afterwards.
    """
    gen = sparse.csr_matrix(gen, dtype=complex)
    gen.eliminate_zeros()
    n = gen.shape[0]
    keep = np.arange(n) if keep is None else np.asarray(keep)
    where = np.full(n, -1)
    where[keep] = np.arange(keep.size)
    ncomp, labels = connected_components(abs(gen), directed=False)
    out = np.zeros((keep.size, keep.size), dtype=complex)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(ncomp + 1))
    for c in range(ncomp):
        idx = order[bounds[c] : bounds[c + 1]]
        sel = where[idx] >= 0
        if not sel.any():
            continue
        block = 1j * gen[idx][:, idx].toarray()
        w, v = np.linalg.eigh(0.5 * (block + block.conj().T))
        vs = v[sel]
        pos = where[idx[sel]]
        out[np.ix_(pos, pos)] = (vs * np.exp(-1j * w)) @ vs.conj().T
    return out


def unitarity_error(U, guard: int = config.GUARD_BAND) -> float:
    """max |U^dag U - I| over the interior block (top ``guard`` levels of each mode dropped)."""
    mat = U.mat if isinstance(U, OperatorMatrix) else np.asarray(U)
    dims = U.dims if isinstance(U, OperatorMatrix) else (mat.shape[0],)
    keep = _interior(dims, guard)
    err = mat.conj().T @ mat - np.eye(mat.shape[0])
    return float(np.max(np.abs(err[np.ix_(keep, keep)])))


def _interior(dims, guard) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(d) for d in dims], indexing="ij")
    ok = np.ones(grids[0].shape, dtype=bool)
    for g, d in zip(grids, dims):
        ok &= g < d - guard
    return np.flatnonzero(ok.ravel())


def _lower(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def annihilation(dim: int) -> OperatorMatrix:
    if dim < 1:
        raise ValueError("dim must be at least 1")
    return OperatorMatrix(_lower(dim), (dim,))


def creation(dim: int) -> OperatorMatrix:
    return annihilation(dim).dag()


def number(dim: int) -> OperatorMatrix:
    return OperatorMatrix(np.diag(np.arange(dim, dtype=complex)), (dim,))


def quadratures(dim: int) -> tuple[OperatorMatrix, OperatorMatrix]:
    a = _lower(dim)
    ad = a.conj().T
    return OperatorMatrix(a + ad, (dim,)), OperatorMatrix(1j * (ad - a), (dim,))


def rotated_quadrature(phi: float, dim: int) -> OperatorMatrix:
    """q_phi = a e^{-i phi} + a^dag e^{i phi}; phi=0 gives q, phi=pi/2 gives p."""
    a = _lower(dim)
    return OperatorMatrix(a * np.exp(-1j * phi) + a.conj().T * np.exp(1j * phi), (dim,))


def mode_ops(dims, sparse_out: bool = False):
    """Annihilation matrices for modes a and b on the joint space."""
    da, db = dims
    if sparse_out:
        la = sparse.diags(np.sqrt(np.arange(1, da, dtype=float)).astype(complex), 1)
        lb = sparse.diags(np.sqrt(np.arange(1, db, dtype=float)).astype(complex), 1)
        return (sparse.kron(la, sparse.identity(db), format="csr"),
                sparse.kron(sparse.identity(da), lb, format="csr"))
    return embed(_lower(da), 0, dims), embed(_lower(db), 1, dims)


def _crop_index(dims, work) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(d) for d in dims], indexing="ij")
    flat = grids[0] * (work[1] if len(work) == 2 else 1)
    if len(dims) == 2:
        flat = flat + grids[1]
    return flat.ravel()


def _build(gen_fn, dims, pad: int, label: str) -> OperatorMatrix:
    """Exponentiate ``gen_fn(work_dims)`` and report truncation on the vacuum column.

    With ``pad == 0`` the generator is truncated at ``dims`` and the result is
    exactly unitary, but matrix elements near the top of the ladder feel the
    truncation. With ``pad > 0`` the unitary is computed on a space larger by
    ``pad`` levels per mode and cropped: matrix elements then converge to
    those of the untruncated operator, at the price of unitarity near the top.
    """
    work = tuple(d + pad for d in dims)
    keep = _crop_index(dims, work) if pad else None
    U = expm_antihermitian(gen_fn(work), keep)
    col = np.abs(U[:, 0]) ** 2
    lost = max(0.0, 1.0 - col.sum()) if pad else 0.0
    config.report_truncation(lost + _edge_population(col, dims), label)
    return OperatorMatrix(U, dims)


def _edge_population(pops: np.ndarray, dims) -> float:
    """Population on the top two levels of each mode (both parities)."""
    p = pops.reshape(dims)
    if len(dims) == 1:
        return float(p[-2:].sum())
    inner = p[:-2, :-2].sum()
    return float(p.sum() - inner)


def displacement(xi: complex, dim: int, pad: int = 0) -> OperatorMatrix:
    def gen(work):
        a = _lower(work[0])
        return xi * a.conj().T - np.conj(xi) * a

    return _build(gen, (dim,), pad, f"D({xi})|0>")


def squeeze1(zeta: float, dim: int, pad: int = 0) -> OperatorMatrix:
    zeta = _real(zeta, "zeta")

    def gen(work):
        a = _lower(work[0])
        return 0.5 * zeta * (a @ a - a.conj().T @ a.conj().T)

    return _build(gen, (dim,), pad, f"S1({zeta})|0>")


def squeeze2(zeta: float, dims=None, pad: int = 0) -> OperatorMatrix:
    zeta = _real(zeta, "zeta")

    def gen(work):
        a, b = mode_ops(work, sparse_out=True)
        return zeta * (a @ b - a.T @ b.T)

    return _build(gen, _two(dims), pad, f"S2({zeta})|0,0>")


def beamsplitter(theta: float, phi: float = 0.0, dims=None) -> OperatorMatrix:
    """Reflectivity sin(theta/2), transmittivity cos(theta/2).

    Total photon number is conserved, so sectors with fewer photons than the
    smaller dimension are exact; no padding is offered.
    """
    dims = _two(dims)
    a, b = mode_ops(dims, sparse_out=True)
    gen = 0.5 * theta * (np.exp(1j * phi) * (a.T @ b) - np.exp(-1j * phi) * (a @ b.T))
    return OperatorMatrix(expm_antihermitian(gen), dims)


def beamsplitter_block(theta: float, phi: float, total: int) -> np.ndarray:
    """Beam splitter restricted to the sector of ``total`` photons.

    Basis index k labels ``|total - k, k>`` (k photons in mode b). The block
    is exact: no truncation enters a number-conserving sector.
    """
    k = np.arange(total + 1)
    gen = np.zeros((total + 1, total + 1), dtype=complex)
    # a^dag b: |n-k, k> -> sqrt(n-k+1) sqrt(k) |n-k+1, k-1>
    up = 0.5 * theta * np.exp(1j * phi) * np.sqrt((total - k[1:] + 1) * k[1:])
    gen[k[1:] - 1, k[1:]] = up
    gen[k[1:], k[1:] - 1] = -np.conj(up)
    return expm_antihermitian(gen)


def bs_kraus_all(theta: float, phi: float, dim: int, ancilla: int) -> np.ndarray:
    """``<k|_b B(theta, phi) |ancilla>_b`` for every outcome k, shape (outcomes, dim, dim).

    Built from the exact number-conserving blocks; the column for |j>_a is
    read from the sector with ``j + ancilla`` photons. Output levels that do
    not fit below ``dim`` are dropped.
    """
    outcomes = dim + ancilla
    K = np.zeros((outcomes, dim, dim), dtype=complex)
    for j in range(dim):
        total = j + ancilla
        block = beamsplitter_block(theta, phi, total)
        k = np.arange(total + 1)
        i = total - k
        ok = i < dim
        K[k[ok], i[ok], j] = block[k[ok], ancilla]
    return K


def bs_kraus(theta: float, phi: float, dim: int, ancilla: int, outcome: int) -> np.ndarray:
    """``<outcome|_b B(theta, phi) |ancilla>_b`` as a dim x dim matrix on mode a."""
    K = np.zeros((dim, dim), dtype=complex)
    for j in range(dim):
        total = j + ancilla
        i = total - outcome
        if i < 0 or i >= dim:
            continue
        K[i, j] = beamsplitter_block(theta, phi, total)[outcome, ancilla]
    return K


def identity(dims) -> OperatorMatrix:
    dims = tuple(np.atleast_1d(dims))
    return OperatorMatrix(np.eye(int(np.prod(dims))), dims)


def apply(U, state: State) -> State:
    """U|psi> for vectors, U rho U^dag for density matrices."""
    mat = U.mat if isinstance(U, OperatorMatrix) else np.asarray(U)
    dims = U.dims if isinstance(U, OperatorMatrix) else state.dims
    if tuple(dims) != tuple(state.dims):
        raise DimensionMismatch(f"operator dims {dims} vs state dims {state.dims}")
    if isinstance(state, FockVector):
        return FockVector(mat @ state.amps, state.dims)
    return conjugate(U, state)


def conjugate(U, rho: State) -> DensityMatrix:
    mat = U.mat if isinstance(U, OperatorMatrix) else np.asarray(U)
    r = rho.density()
    if mat.shape != r.mat.shape:
        raise DimensionMismatch(f"operator shape {mat.shape} vs state shape {r.mat.shape}")
    return DensityMatrix(mat @ r.mat @ mat.conj().T, r.dims)


def _real(x, name) -> float:
    if np.iscomplexobj(x) and np.imag(x) != 0:
        raise ValueError(f"{name} must be real")
    return float(np.real(x))


def _two(dims) -> tuple[int, int]:
    if dims is None:
        return (config.DEFAULT_DIM_TWO_MODE, config.DEFAULT_DIM_TWO_MODE)
    dims = tuple(int(d) for d in np.atleast_1d(dims))
    if len(dims) == 1:
        dims = dims * 2
    if len(dims) != 2:
        raise ModeCount(f"two-mode operator needs two dims, got {dims}")
    return dims
