"""State-engineering pipelines built from additions, subtractions,
displacements and squeezing.

* Dakna synthesis: an arbitrary finite superposition sum_n c_n |n> is
  reached from the vacuum by N rounds of displace / add / undisplace,
  because D^dag(alpha) a^dag D(alpha) = a^dag + alpha^* and the target is a
  polynomial in a^dag applied to |0>.
* Subtract-and-displace: squeeze, displace, subtract, displace back and
  unsqueeze to reach qubit-like superpositions of |0> and |1>.
* Kittens: photon-subtracted squeezed vacuum compared with small odd cats.
* Squeezed cats from a Fock state split on a beam splitter and conditioned
  on a quadrature measurement.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import gammaln

from . import cond, ops, stats
from .errors import DegenerateLeading
from .fock import DensityMatrix, FockVector, State, fock_state, normalize, pad, tensor, truncate
from .phasespace import fidelity


@dataclass(frozen=True)
class DaknaPlan:
    alphas: tuple[complex, ...]
    scale: complex

    @property
    def degree(self) -> int:
        return len(self.alphas)

    def to_json(self) -> str:
        return json.dumps(
            {
                "alphas": [[a.real, a.imag] for a in self.alphas],
                "scale": [self.scale.real, self.scale.imag],
            }
        )


def dakna_plan(coeffs, threshold: float = 1e-12) -> DaknaPlan:
    """Displacements that synthesize sum_n c_n |n> from the vacuum.

    The target equals (c_N / sqrt(N!)) prod_n (a^dag - z_n) |0> where z_n are
    the roots of sum_n (c_n / sqrt(n!)) z^n, and each factor is produced by
    D^dag(alpha) a^dag D(alpha) with alpha^* = -z_n. Roots come from the
    companion-matrix eigenvalues; the plan is ordered by |z| then by arg z.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.size < 2:
        raise ValueError("target needs at least two coefficients")
    if abs(c[-1]) < threshold:
        raise DegenerateLeading(f"leading coefficient {abs(c[-1]):.2e} is below {threshold}")
    n = np.arange(c.size)
    poly = c / np.exp(0.5 * gammaln(n + 1))
    roots = P.polyroots(poly) if c.size > 2 else np.array([-poly[0] / poly[1]])
    roots = np.asarray(roots, dtype=complex)
    resid = np.abs(P.polyval(roots, poly)) / np.abs(poly).sum()
    if resid.size and resid.max() > 1e-10:
        # one Newton polish step per root when the companion eigenvalues are rough
        d = P.polyder(poly)
        roots = roots - P.polyval(roots, poly) / P.polyval(roots, d)
    order = np.lexsort((np.round(np.angle(roots), 12), np.round(np.abs(roots), 12)))
    roots = roots[order]
    alphas = tuple(complex(-np.conj(z)) + 0.0 for z in roots)  # +0.0 drops negative zeros
    return DaknaPlan(alphas, complex(poly[-1]))


def _work(dim: int, alphas) -> int:
    amax = max((abs(a) for a in alphas), default=0.0)
    return dim + len(alphas) + int(np.ceil((amax + 6) ** 2 + 8 * amax))


def loss_then_displace(state: State, t: float, shift: complex) -> DensityMatrix:
    """Mix with a coherent state on a splitter of amplitude transmittivity t.

    The transmitted mode is the input after loss (transmittivity t) followed
    by a displacement of ``shift``; the coherent amplitude needed for that
    shift is shift / sqrt(1 - t^2).
    """
    dim = state.dims[0]
    theta = 2 * np.arccos(t)
    kraus = ops.bs_kraus_all(theta, 0.0, dim, ancilla=0)
    lossy = cond.apply_kraus(state, list(kraus))
    D = ops.displacement(shift, dim)
    return ops.conjugate(D, lossy)


def dakna_run(plan: DaknaPlan, dim: int, bs_transmittivity: float | None = None) -> State:
    """Apply the displace / add / undisplace rounds to the vacuum.

    With ``bs_transmittivity`` set, every displacement is replaced by mixing
    with a coherent state on a highly transmitting beam splitter, which
    adds loss; the output is then a density matrix. The work is done at a
    padded dimension and cropped to ``dim`` at the end.
    """
    work = _work(dim, plan.alphas)
    a_dag = ops._lower(work).conj().T
    state: State = FockVector(np.eye(work, 1).ravel())
    for alpha in plan.alphas:
        if bs_transmittivity is None:
            D = ops.displacement(alpha, work).mat
            vec = D.conj().T @ (a_dag @ (D @ state.amps))
            state = FockVector(vec)
        else:
            t = bs_transmittivity
            state = loss_then_displace(state, t, alpha)
            state = cond.apply_kraus(state, a_dag)
            state = loss_then_displace(state, t, -alpha)
    out = truncate(state, dim)
    return normalize(out)


def dakna_fidelity(coeffs, dim: int | None = None, bs_transmittivity: float | None = None) -> float:
    c = np.asarray(coeffs, dtype=complex)
    dim = dim or max(c.size + 4, 16)
    target = normalize(FockVector(np.concatenate([c, np.zeros(dim - c.size)])))
    return fidelity(target, dakna_run(dakna_plan(c), dim, bs_transmittivity))


def fiurasek_step(zeta1: float, alpha1: complex, zeta2: float, alpha2: complex, dim: int = 32) -> FockVector:
    """S^dag(zeta2) D(-alpha2) a D(alpha1) S(zeta1) |0>, normalized.

    The second displacement undoes the first when alpha1 == alpha2, and
    then the output is proportional to alpha|0> - sinh(zeta)|1> for
    zeta1 == zeta2 == zeta.
    """
    work = _work(dim, [alpha1, alpha2]) + int(20 * max(abs(zeta1), abs(zeta2)))
    vac = np.eye(work, 1).ravel()
    S1 = ops.squeeze1(zeta1, work).mat
    S2 = ops.squeeze1(zeta2, work).mat
    D1 = ops.displacement(alpha1, work).mat
    D2 = ops.displacement(-alpha2, work).mat
    a = ops._lower(work)
    vec = S2.conj().T @ (D2 @ (a @ (D1 @ (S1 @ vac))))
    return normalize(truncate(FockVector(vec), dim))


def kitten_target(beta: float, dim: int, parity: str = "odd", axis: str = "imag") -> FockVector:
    """Cat along the anti-squeezed axis.

    Squeezing with zeta > 0 contracts the q quadrature, so the subtracted
    squeezed vacuum is stretched along Im(alpha) and the matching cat is
    |i beta> +- |-i beta>.
    """
    phase = {"odd": np.pi, "even": 0.0}[parity]
    amp = {"imag": 1j * beta, "real": beta}[axis]
    return stats.cat(amp, phase, dim)


def kitten_fidelity(zeta: float, beta: float, dim: int = 64, parity: str = "odd") -> float:
    subtracted = cond.subtract_ideal(stats.squeezed_vacuum(zeta, dim)).state
    return fidelity(subtracted, kitten_target(beta, dim, parity))


def kitten_fidelities(zeta: float, beta: float, dim: int = 64) -> dict:
    """Fidelity with the odd and the even cat; only the odd one can be nonzero."""
    return {p: kitten_fidelity(zeta, beta, dim, p) for p in ("odd", "even")}


def kitten_scan(zetas, betas, dim: int = 64) -> np.ndarray:
    """Fidelity surface, shape (len(zetas), len(betas))."""
    out = np.empty((len(zetas), len(betas)))
    for i, z in enumerate(zetas):
        sub = cond.subtract_ideal(stats.squeezed_vacuum(z, dim)).state
        for j, b in enumerate(betas):
            out[i, j] = fidelity(sub, kitten_target(b, dim))
    return out


def fock_through_splitter(n: int, dim: int | None = None) -> FockVector:
    """|n>|0> after a 50:50 beam splitter; photon number is conserved so n+1 levels suffice."""
    d = max(n + 1, 2) if dim is None else dim
    U = ops.beamsplitter(np.pi / 2, 0.0, (d, d))
    return ops.apply(U, tensor(fock_state(n, d), fock_state(0, d)))


def squeezed_cat_from_fock(n: int, dim: int = 32, x: float = 0.0) -> cond.ConditionResult:
    """Split |n> on a 50:50 beam splitter and condition the second port on q = x.

    For x = 0 only even Fock components of the conditioned port survive, so
    the kept mode has the parity of n.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    res = cond.homodyne_condition(fock_through_splitter(n), x, mode="b")
    return cond.ConditionResult(pad(res.state, max(dim, res.state.dim)), res.probability)


@dataclass(frozen=True)
class CatFit:
    fidelity: float
    beta: complex
    zeta: float


def squeezed_cat(beta: complex, phi_sch: float, zeta: float, dim: int, work: int | None = None) -> FockVector:
    """S(zeta) applied to a cat, computed at a padded dimension and cropped."""
    work = work or dim + 64
    S = ops.squeeze1(zeta, work).mat
    vec = S @ stats.cat(beta, phi_sch, work).amps
    return FockVector(vec[:dim])


def best_squeezed_cat(
    state: FockVector,
    betas=np.arange(0.5, 3.0 + 1e-9, 0.05),
    zetas=np.arange(-0.6, 0.6 + 1e-9, 0.02),
    work: int = 96,
) -> CatFit:
    """Grid search over S(zeta)|cat> targets of the state's parity.

    Cats along both the real and the imaginary axis are scanned.
    """
    pops = np.abs(state.amps) ** 2
    odd = pops[1::2].sum() > pops[0::2].sum()
    phi_sch = np.pi if odd else 0.0
    psi = pad(state, work).amps
    cats = [stats.cat(b * ax, phi_sch, work) for ax in (1, 1j) for b in betas]
    cat_mat = np.array([c.amps for c in cats])
    labels = [b * ax for ax in (1, 1j) for b in betas]
    best = CatFit(-1.0, 0j, 0.0)
    for z in zetas:
        S = ops.squeeze1(z, work).mat
        overlaps = np.abs(cat_mat.conj() @ (S.conj().T @ psi)) ** 2
        k = int(np.argmax(overlaps))
        if overlaps[k] > best.fidelity:
            best = CatFit(float(overlaps[k]), complex(labels[k]), float(z))
    return best
