import numpy as np
import pytest
from scipy.linalg import expm

from fockbench import ops, stats
from fockbench.errors import DimensionMismatch
from fockbench.fock import FockVector, embed, fock_state, normalize, tensor, vacuum

GUARD = 8


def interior(M, dim, guard=GUARD):
    k = dim - guard
    return M[:k, :k]


def test_ladder_actions():
    a = ops.annihilation(6).mat
    ad = ops.creation(6).mat
    assert np.allclose(a @ fock_state(1, 6).amps, fock_state(0, 6).amps)
    assert np.allclose(ad @ fock_state(3, 6).amps, 2 * fock_state(4, 6).amps)
    assert np.allclose(ops.number(6).mat, ad @ a, rtol=0, atol=1e-14)


def test_commutator_truncation_artifact():
    dim = 10
    a, ad = ops.annihilation(dim).mat, ops.creation(dim).mat
    comm = a @ ad - ad @ a
    assert np.allclose(np.diag(comm)[:-1], 1)
    assert np.isclose(comm[-1, -1], -(dim - 1))


def test_quadratures():
    q, p = ops.quadratures(12)
    assert np.array_equal(q.mat, q.mat.conj().T) and np.array_equal(p.mat, p.mat.conj().T)
    v = vacuum(12).amps
    assert abs(v @ q.mat @ v) < 1e-15 and np.isclose(v @ q.mat @ q.mat @ v, 1)
    comm = q.mat @ p.mat - p.mat @ q.mat
    assert np.allclose(interior(comm, 12, 1), 2j * np.eye(11))
    assert np.allclose(q.mat @ fock_state(1, 12).amps, [1, 0, np.sqrt(2)] + [0] * 9)


def test_displacement_identity_and_mean():
    assert np.allclose(ops.displacement(0, 20).mat, np.eye(20))
    psi = ops.displacement(1.0, 64).mat[:, 0]
    n = np.arange(64)
    assert abs(n @ np.abs(psi) ** 2 - 1) < 1e-9


@pytest.mark.parametrize("xi", [0.5, 1 + 1j, -2.0, 2j])
def test_displacement_coherent_column(xi):
    # the plain truncated exponential is exact up to rounding on the vacuum column at dim 64
    col = ops.displacement(xi, 64).mat[:, 0]
    assert np.max(np.abs(col - stats.coherent(xi, 64).amps)) < 1e-9


def low_columns(E, ncols, guard=GUARD):
    """Action on the first ``ncols`` Fock states, rows below the guard band."""
    return np.max(np.abs(E[: E.shape[0] - guard, :ncols]))


def test_displacement_moves_annihilator():
    dim, xi = 48, 0.7 + 0.2j
    D = ops.displacement(xi, dim).mat
    a = ops.annihilation(dim).mat
    assert low_columns(D.conj().T @ a @ D - a - xi * np.eye(dim), 6) < 1e-9


def test_displacement_against_dense_expm():
    dim, xi = 30, 0.8 - 0.4j
    a = ops.annihilation(dim).mat
    ref = expm(xi * a.conj().T - np.conj(xi) * a)
    assert np.max(np.abs(ops.displacement(xi, dim).mat - ref)) < 1e-10


def test_squeeze1_examples():
    assert np.allclose(ops.squeeze1(0.0, 16).mat, np.eye(16))
    col = ops.squeeze1(1.0, 64).mat[:, 0]
    assert np.isclose(col[2] / col[0], -np.tanh(1) / np.sqrt(2))
    assert np.max(np.abs(col[1::2])) <= 1e-12


def test_squeeze1_transforms_annihilator():
    # the cut generator couples low and high levels strongly, so the identity
    # holds for low-lying inputs rather than across the whole interior block
    dim, z = 64, 0.5
    S = ops.squeeze1(z, dim).mat
    a = ops.annihilation(dim).mat
    lhs = S @ a @ S.conj().T
    rhs = a * np.cosh(z) + a.conj().T * np.sinh(z)
    assert low_columns(lhs - rhs, 2) < 1e-9


def test_squeeze1_against_dense_expm():
    dim, z = 30, 0.6
    a = ops.annihilation(dim).mat
    ref = expm(0.5 * z * (a @ a - a.conj().T @ a.conj().T))
    assert np.max(np.abs(ops.squeeze1(z, dim).mat - ref)) < 1e-10


def test_squeeze2_examples():
    dims = (12, 12)
    assert np.allclose(ops.squeeze2(0.0, dims).mat, np.eye(144))
    col = ops.squeeze2(1.0, (40, 40)).mat[:, 0].reshape(40, 40)
    assert abs(col[1, 1] + np.tanh(1) / np.cosh(1)) < 1e-12
    assert np.isclose(col[1, 1], -0.493554, atol=1e-6)
    off = col - np.diag(np.diag(col))
    assert np.max(np.abs(off)) <= 1e-12


def test_squeeze2_transforms_annihilator():
    d, z = 40, 0.5
    dims = (d, d)
    S = ops.squeeze2(z, dims).mat
    a = embed(ops.annihilation(d).mat, 0, dims)
    bd = embed(ops.creation(d).mat, 1, dims)
    err = S @ a @ S.conj().T - a * np.cosh(z) - bd * np.sinh(z)
    n = np.arange(d)
    rows = ((n[:, None] < d - GUARD) & (n[None, :] < d - GUARD)).ravel()
    cols = ((n[:, None] < 3) & (n[None, :] < 3)).ravel()
    assert np.max(np.abs(err[np.ix_(rows, cols)])) < 1e-9


def test_squeeze2_against_dense_expm():
    dims, z = (8, 8), 0.4
    a = embed(ops.annihilation(8).mat, 0, dims)
    b = embed(ops.annihilation(8).mat, 1, dims)
    ref = expm(z * (a @ b - a.conj().T @ b.conj().T))
    assert np.max(np.abs(ops.squeeze2(z, dims).mat - ref)) < 1e-10


@pytest.mark.parametrize("dim, pad", [(48, 96), (64, 128)])
@pytest.mark.parametrize("zeta", [0.5, 1.2])
def test_padded_squeeze_matches_closed_form(dim, pad, zeta):
    col = ops.squeeze1(zeta, dim, pad=pad).mat[:, 0]
    with _quiet():
        ref = stats.squeezed_vacuum(zeta, dim).amps
    assert np.max(np.abs(col - ref)) < 1e-9


@pytest.mark.parametrize("xi", [2.0, 2j, -1.4 + 1.4j])
def test_padded_displacement_matches_closed_form(xi):
    col = ops.displacement(xi, 48, pad=40).mat[:, 0]
    assert np.max(np.abs(col - stats.coherent(xi, 48).amps)) < 1e-9


def test_squeezed_pair_column_matches_closed_form():
    col = ops.squeeze2(1.0, (40, 40), pad=24).mat[:, 0]
    with _quiet():
        ref = stats.tmsv(1.0, (40, 40)).amps
    assert np.max(np.abs(col - ref)) < 1e-9


def test_unpadded_top_levels_are_corrupted():
    # documents why the pad option exists: the cut distorts the vacuum column near the top
    col = ops.squeeze1(1.0, 64).mat[:, 0]
    with _quiet():
        ref = stats.squeezed_vacuum(1.0, 64).amps
    assert np.max(np.abs(col - ref)) > 1e-6


@pytest.mark.parametrize(
    "build",
    [
        lambda: ops.displacement(1.5 - 0.5j, 48),
        lambda: ops.squeeze1(0.8, 48),
        lambda: ops.squeeze2(0.5, (20, 20)),
        lambda: ops.beamsplitter(1.1, 0.3, (12, 12)),
    ],
)
def test_unitarity_on_interior(build):
    assert ops.unitarity_error(build()) <= 1e-8


def test_beamsplitter_conserves_photon_number():
    dims = (10, 10)
    U = ops.beamsplitter(0.9, 0.4, dims).mat
    n = np.arange(10)
    total = (n[:, None] + n[None, :]).ravel()
    off = total[:, None] != total[None, :]
    assert np.max(np.abs(U[off])) <= 1e-12
    assert np.allclose(ops.beamsplitter(0.0, 0.0, dims).mat, np.eye(100))


def test_hong_ou_mandel():
    U = ops.beamsplitter(np.pi / 2, 0.0, (3, 3))
    out = ops.apply(U, tensor(fock_state(1, 3), fock_state(1, 3))).tensor_view()
    assert abs(out[1, 1]) < 1e-15
    assert np.isclose(out[2, 0], 1 / np.sqrt(2)) and np.isclose(out[0, 2], -1 / np.sqrt(2))


def test_beamsplitter_against_dense_expm():
    dims, th, ph = (7, 7), 0.8, 0.5
    a = embed(ops.annihilation(7).mat, 0, dims)
    b = embed(ops.annihilation(7).mat, 1, dims)
    gen = th / 2 * (np.exp(1j * ph) * a.conj().T @ b - np.exp(-1j * ph) * a @ b.conj().T)
    assert np.max(np.abs(ops.beamsplitter(th, ph, dims).mat - expm(gen))) < 1e-12


def test_beamsplitter_product_form():
    # B(theta, 0) = exp(-tan(theta/2) a b^dag) cos(theta/2)^(n_a - n_b) exp(tan(theta/2) a^dag b);
    # every factor conserves n_a + n_b, so sectors below the cut are complete and exact
    dims, th = (20, 20), 0.3
    a = embed(ops.annihilation(20).mat, 0, dims)
    b = embed(ops.annihilation(20).mat, 1, dims)
    n = np.arange(20)
    na = np.repeat(n, 20)
    nb = np.tile(n, 20)
    tau, c = np.tan(th / 2), np.cos(th / 2)
    prod = expm(-tau * a @ b.conj().T) @ np.diag(c ** (na - nb).astype(float)) @ expm(tau * a.conj().T @ b)
    U = ops.beamsplitter(th, 0.0, dims).mat
    keep = (na + nb) < 20
    assert np.max(np.abs((prod - U)[np.ix_(keep, keep)])) < 1e-9


def test_apply_and_conjugate():
    v = normalize(FockVector([1, 2j, 0.5, 0]))
    assert np.allclose(ops.apply(ops.identity(4), v).amps, v.amps)
    D = ops.displacement(0.6 + 0.3j, 48)
    back = ops.apply(D.dag(), ops.apply(D, vacuum(48)))
    assert np.max(np.abs(back.amps - vacuum(48).amps)) < 1e-9
    rho = ops.conjugate(ops.squeeze1(0.5, 64), vacuum(64).density())
    with _quiet():
        sv = stats.squeezed_vacuum(0.5, 64).amps
    assert np.max(np.abs(rho.mat - np.outer(sv, sv.conj()))) < 1e-9
    assert abs(rho.trace - 1) < 1e-10
    with pytest.raises(DimensionMismatch):
        ops.apply(ops.identity(3), vacuum(4))


def test_subtraction_equals_addition_on_squeezed_vacuum():
    S = ops.squeeze1(0.5, 64).mat
    v = S[:, 0]
    a = ops.annihilation(64).mat
    x = a @ v
    y = a.conj().T @ v
    x, y = x / np.linalg.norm(x), y / np.linalg.norm(y)
    assert abs(abs(np.vdot(x, y)) - 1) < 1e-9


class _quiet:
    def __enter__(self):
        import warnings

        self._cm = warnings.catch_warnings()
        self._cm.__enter__()
        warnings.simplefilter("ignore")

    def __exit__(self, *exc):
        return self._cm.__exit__(*exc)
