"""Phase-space functions: characteristic functions, s-ordered quasiprobabilities,
Wigner and Q functions, marginals and fidelities.

Phase-space coordinates use alpha = alpha_r + i alpha_i with q = 2 alpha_r
under the vacuum-variance-1 convention, so the vacuum Wigner function is
(2/pi) exp(-2|alpha|^2) and every quasiprobability integrates to one over
d alpha_r d alpha_i.

Two independent routes compute P(alpha, s):

* ``quasi`` sums the displaced-number series
  2/(pi(1-s)) sum_k r^k <k|D^dag(alpha) rho D(alpha)|k>, r = (s+1)/(s-1),
  using displacement matrices from :mod:`fockbench.ops`;
* ``quasi_points`` / ``quasi_grid`` contract rho with closed-form matrix
  elements of D(alpha) r^n D^dag(alpha), which are Laguerre polynomials
  generated by their three-term recurrence.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize
from scipy.special import gammaln

from . import ops
from .cond import hermite_amplitudes
from .errors import BothMixed, DivergentSeries, ModeCount, WindowTooSmall
from .fock import FockVector, State, pad

S_MIN, S_MAX_NUMERIC = -1.0, 0.9
DEFAULT_HALF_WIDTH = 5.0
DEFAULT_POINTS = 201
# a Q zero must lie within this distance of points where Q reaches this fraction of its peak
_SUPPORT_RADIUS = 0.5
_SUPPORT_FRACTION = 1e-8
_EPS = 1e-15  # rounding level assumed for each accumulated term
_NOISE_TOL = 1e-8
_EDGE_TOL = 1e-6


def _single(rho: State, what: str) -> None:
    if rho.modes != 1:
        raise ModeCount(f"{what} needs a single-mode state; take a partial trace first")


def _check_s(s: float) -> float:
    s = float(s)
    if not S_MIN <= s <= S_MAX_NUMERIC:
        raise ValueError(f"s must lie in [{S_MIN}, {S_MAX_NUMERIC}] for numeric evaluation, got {s}")
    return s


def _work_dim(dim: int, alpha: complex) -> int:
    # room for the displaced state: mean photon number grows like |alpha|^2
    r = abs(alpha)
    return dim + int(np.ceil((r + 6) ** 2 + 8 * r))


def char_fn(rho: State, xi: complex, s: float = 0.0) -> complex:
    """Tr[rho D(xi)] exp(s |xi|^2 / 2)."""
    _single(rho, "char_fn")
    dim = rho.dim
    D = ops.displacement(xi, dim, pad=_work_dim(dim, xi) - dim).mat
    r = rho.density().mat
    val = np.sum(r * D.T) * np.exp(s * abs(xi) ** 2 / 2)
    if abs(val) > 1e12:
        raise DivergentSeries(f"characteristic function magnitude {abs(val):.3e} at s={s}")
    return complex(val)


def quasi(rho: State, alpha: complex, s: float = 0.0) -> float:
    """s-ordered quasiprobability at one point by the displaced-number series.

    The state is zero-padded to a working dimension large enough to hold
    D^dag(alpha) rho D(alpha); the series runs over that working dimension.
    """
    _single(rho, "quasi")
    s = _check_s(s)
    work = _work_dim(rho.dim, alpha)
    r = pad(rho.density(), work).mat
    D = ops.displacement(-alpha, work).mat
    pops = np.diag(D @ r @ D.conj().T)
    if np.max(np.abs(pops.imag)) > 1e-9:
        raise ValueError("density matrix is not Hermitian")
    ratio = (s + 1) / (s - 1)
    weights = ratio ** np.arange(work)
    terms = weights * pops.real
    total = terms.sum()
    tail = np.abs(terms[-10:])
    if np.all(np.diff(tail) >= 0) and tail[-1] > 1e-12 * max(1.0, abs(total)):
        raise DivergentSeries(f"series at alpha={alpha}, s={s} does not settle")
    # rounding in the displaced populations is amplified by |r|^k when s > 0
    noise = _EPS * np.abs(pops).max() * np.abs(weights).sum()
    if noise > _NOISE_TOL:
        raise DivergentSeries(f"series at alpha={alpha}, s={s} is dominated by rounding ({noise:.1e})")
    return float(2 / (np.pi * (1 - s)) * total)


def wigner(rho: State, alpha: complex) -> float:
    return quasi(rho, alpha, 0.0)


def quasi_points(rho: State, alphas, s: float = 0.0) -> np.ndarray:
    """Closed-form P(alpha, s) at an array of points.

    <n|D r^n D^dag|n+k> = e^{c|alpha|^2} sqrt(n!/(n+k)!) (-c alpha^*)^k M_n^k
    with c = r - 1 and M_n^k = r^n L_n^k(-c^2|alpha|^2 / r), computed by
    the Laguerre recurrence written in M (regular at r = 0, i.e. s = -1).
    Magnitudes are carried in log form to survive large |alpha|.
    """
    _single(rho, "quasi_points")
    s = _check_s(s)
    alphas = np.asarray(alphas, dtype=complex)
    shape = alphas.shape
    al = alphas.ravel()
    rmat = rho.density().mat
    dim = rmat.shape[0]
    r = (s + 1) / (s - 1)
    c = r - 1
    mod2 = np.abs(al) ** 2
    x = c * c * mod2
    base_log = c * mod2
    with np.errstate(divide="ignore"):
        log_ca = np.log(np.abs(c * al))
    phase_ca = np.exp(-1j * np.angle(al)) * np.sign(-c)  # phase of (-c alpha^*)
    total = np.zeros(al.size)
    absacc = np.zeros(al.size)
    edge = np.zeros(al.size)
    for k in range(dim):
        coeffs = np.diagonal(rmat, offset=-k)  # rho[n+k, n]
        nmax = dim - k
        if not np.any(np.abs(coeffs) > 0):
            continue
        if k == 0:
            pref_log = base_log.copy()
            phase = np.ones(al.size, dtype=complex)
        else:
            pref_log = base_log + k * log_ca
            phase = phase_ca**k
        m_prev = np.zeros(al.size)
        m_cur = np.ones(al.size)
        scale = np.zeros(al.size)
        acc = np.zeros(al.size, dtype=complex)
        for n in range(nmax):
            if n > 0:
                m_next = (((2 * n - 1 + k) * r + x) * m_cur - (n - 1 + k) * r * r * m_prev) / n
                m_prev, m_cur = m_cur, m_next
                big = np.abs(m_cur) > 1e100
                if big.any():
                    f = np.where(big, np.abs(m_cur), 1.0)
                    m_cur = m_cur / f
                    m_prev = m_prev / f
                    scale += np.log(f)
            rho_nk = coeffs[n]
            if rho_nk == 0:
                continue
            lf = 0.5 * (gammaln(n + 1) - gammaln(n + k + 1))
            with np.errstate(over="ignore", under="ignore", invalid="ignore"):
                mag = np.exp(pref_log + scale + lf)
                term = rho_nk * mag * m_cur * phase
            if not np.all(np.isfinite(term)):
                raise DivergentSeries(f"matrix elements overflow at s={s}")
            acc += term
            absacc += np.abs(term)
            if n + k >= dim - 2:
                edge += np.abs(term)
        total += acc.real if k == 0 else 2 * acc.real
    pref = 2 / (np.pi * (1 - s))
    noise = pref * _EPS * absacc.max(initial=0)
    if noise > _NOISE_TOL:
        raise DivergentSeries(f"s={s}: cancellation leaves rounding error {noise:.1e}")
    # for s <= 0 the kernel is bounded by 2/(pi(1-s)); growth only happens above
    if s > 0 and pref * edge.max(initial=0) > _EDGE_TOL:
        raise DivergentSeries(f"s={s}: the top Fock levels dominate; no regular function at this order")
    return (pref * total).reshape(shape)


@dataclass(frozen=True)
class Window:
    x_min: float = -DEFAULT_HALF_WIDTH
    x_max: float = DEFAULT_HALF_WIDTH
    y_min: float = -DEFAULT_HALF_WIDTH
    y_max: float = DEFAULT_HALF_WIDTH
    nx: int = DEFAULT_POINTS
    ny: int = DEFAULT_POINTS

    def __post_init__(self):
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError("window bounds must be increasing")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("window needs at least 2 points per axis")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / (self.ny - 1)

    def alphas(self) -> np.ndarray:
        """Complex mesh of shape (nx, ny): alphas[i, j] = xs[i] + i ys[j]."""
        return self.xs[:, None] + 1j * self.ys[None, :]

    @classmethod
    def parse(cls, text: str) -> "Window":
        """``xmin,xmax,ymin,ymax[,nx[,ny]]``."""
        parts = [p for p in text.split(",") if p.strip()]
        if len(parts) not in (4, 5, 6):
            raise ValueError(f"window needs 4 to 6 comma-separated values, got {text!r}")
        bounds = [float(p) for p in parts[:4]]
        nx = int(parts[4]) if len(parts) > 4 else DEFAULT_POINTS
        ny = int(parts[5]) if len(parts) > 5 else nx
        return cls(*bounds, nx, ny)


@dataclass(frozen=True, eq=False)
class PhaseGrid:
    window: Window
    values: np.ndarray
    s: float = 0.0
    label: str = field(default="")

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.window.nx, self.window.ny):
            raise ValueError(f"values shape {v.shape} does not match window")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def cell(self) -> float:
        return self.window.dx * self.window.dy

    def integral(self) -> float:
        return float(self.values.sum() * self.cell)

    def minimum(self) -> tuple[float, complex]:
        i, j = np.unravel_index(np.argmin(self.values), self.values.shape)
        return float(self.values[i, j]), complex(self.window.xs[i], self.window.ys[j])

    def border_mass(self, width: int = 1) -> float:
        v = np.abs(self.values)
        inner = v[width:-width, width:-width].sum() if min(v.shape) > 2 * width else 0.0
        return float((v.sum() - inner) * self.cell)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("alpha_re,alpha_im,value\n")
        xs, ys = self.window.xs, self.window.ys
        for i, xv in enumerate(xs):
            for j, yv in enumerate(ys):
                buf.write(f"{xv:.17g},{yv:.17g},{self.values[i, j]:.17g}\n")
        return buf.getvalue()

    def to_json(self) -> str:
        w = self.window
        payload = {
            "window": [w.x_min, w.x_max, w.y_min, w.y_max],
            "nx": w.nx,
            "ny": w.ny,
            "s": self.s,
            "values": self.values.tolist(),
        }
        return json.dumps(payload)


def auto_window(rho: State, base: Window | None = None, nsigma: float = 5.0) -> Window:
    """Default window widened to cover <alpha> +- nsigma standard deviations."""
    base = base or Window()
    r = rho.density().mat
    dim = r.shape[0]
    a = ops._lower(dim)
    mean_a = np.trace(a @ r)
    q, p = ops.quadratures(dim)
    var_q = np.trace(q.mat @ q.mat @ r).real - np.trace(q.mat @ r).real ** 2
    var_p = np.trace(p.mat @ p.mat @ r).real - np.trace(p.mat @ r).real ** 2
    sx, sy = np.sqrt(max(var_q, 0)) / 2, np.sqrt(max(var_p, 0)) / 2
    x_min = min(base.x_min, mean_a.real - nsigma * sx)
    x_max = max(base.x_max, mean_a.real + nsigma * sx)
    y_min = min(base.y_min, mean_a.imag - nsigma * sy)
    y_max = max(base.y_max, mean_a.imag + nsigma * sy)
    if (x_min, x_max, y_min, y_max) == (base.x_min, base.x_max, base.y_min, base.y_max):
        return base
    # keep the lattice spacing of the base window
    nx = int(np.ceil((x_max - x_min) / base.dx)) + 1
    ny = int(np.ceil((y_max - y_min) / base.dy)) + 1
    return Window(x_min, x_min + (nx - 1) * base.dx, y_min, y_min + (ny - 1) * base.dy, nx, ny)


def quasi_grid(rho: State, window: Window | None = None, s: float = 0.0) -> PhaseGrid:
    _single(rho, "quasi_grid")
    window = window or auto_window(rho)
    return PhaseGrid(window, quasi_points(rho, window.alphas(), s), s)


def wigner_grid(rho: State, window: Window | None = None) -> PhaseGrid:
    return quasi_grid(rho, window, 0.0)


def _coherent_rows(alphas: np.ndarray, dim: int) -> np.ndarray:
    """Rows e^{-|a|^2/2} a^n / sqrt(n!) for each point (log-safe)."""
    al = np.asarray(alphas, dtype=complex).ravel()
    n = np.arange(dim)
    with np.errstate(divide="ignore", invalid="ignore"):
        logmag = -0.5 * np.abs(al)[:, None] ** 2 + n * np.log(np.abs(al))[:, None] - 0.5 * gammaln(n + 1)
    logmag[:, 0] = -0.5 * np.abs(al) ** 2
    return np.exp(logmag) * np.exp(1j * n * np.angle(al)[:, None])


def qfunc_points(rho: State, alphas) -> np.ndarray:
    """<alpha|rho|alpha>/pi from coherent-state overlaps."""
    _single(rho, "qfunc")
    alphas = np.asarray(alphas, dtype=complex)
    rows = _coherent_rows(alphas, rho.dim)
    if isinstance(rho, FockVector):
        vals = np.abs(rows.conj() @ rho.amps) ** 2
    else:
        vals = np.einsum("gi,ij,gj->g", rows.conj(), rho.mat, rows).real
    return (vals / np.pi).reshape(alphas.shape)


def qfunc(rho: State, alpha: complex) -> float:
    return float(qfunc_points(rho, np.array([alpha]))[0])


def qfunc_grid(rho: State, window: Window | None = None) -> PhaseGrid:
    window = window or auto_window(rho)
    return PhaseGrid(window, qfunc_points(rho, window.alphas()), -1.0)


def p_analytic_thermal(sequence: str, n_bar: float, alpha) -> np.ndarray | float:
    """Normalized P functions of a thermal state after one addition and one subtraction.

    ``"sa"``: a a^dag rho a a^dag (add, then subtract)
        k|a|^2 (k|a|^2 - 1) e^{-|a|^2/n} / (pi n (n+1)(2n+1))
    ``"as"``: a^dag a rho a^dag a (subtract, then add)
        ((k|a|^2 - 1)^2 - k|a|^2) e^{-|a|^2/n} / (pi n^2 (2n+1))
    with k = (n+1)/n and n the initial mean photon number.
    """
    if n_bar <= 0:
        raise ValueError("n_bar must be positive")
    a2 = np.abs(np.asarray(alpha, dtype=complex)) ** 2
    k = (n_bar + 1) / n_bar
    u = k * a2
    gauss = np.exp(-a2 / n_bar)
    if sequence == "sa":
        out = u * (u - 1) * gauss / (np.pi * n_bar * (n_bar + 1) * (2 * n_bar + 1))
    elif sequence == "as":
        out = ((u - 1) ** 2 - u) * gauss / (np.pi * n_bar**2 * (2 * n_bar + 1))
    else:
        raise ValueError("sequence must be 'as' or 'sa'")
    return float(out) if np.ndim(out) == 0 else out


def p_thermal_grid(sequence: str, n_bar: float, window: Window | None = None) -> PhaseGrid:
    window = window or Window()
    return PhaseGrid(window, p_analytic_thermal(sequence, n_bar, window.alphas()), 1.0, sequence)


def _lattice_kernel(coords: np.ndarray, step: float, var: float) -> np.ndarray:
    diff = coords[:, None] - coords[None, :]
    if var <= 0:
        return np.eye(coords.size)
    K = np.exp(-(diff**2) / (2 * var))
    # normalize by the full infinite-lattice sum so the discrete kernel has unit mass
    reach = int(np.ceil(12 * np.sqrt(var) / step)) + 1
    j = np.arange(-reach, reach + 1)
    return K / np.exp(-((j * step) ** 2) / (2 * var)).sum()


def convolve_s(grid: PhaseGrid, s_prime: float) -> PhaseGrid:
    """Smooth a grid from order s down to s' < s with a Gaussian kernel.

    P(alpha, s') = 2/(pi (s - s')) int P(beta, s) exp(-2|alpha - beta|^2/(s - s')) d^2 beta,
    a product of two one-dimensional Gaussians of variance (s - s')/4.
    """
    ds = grid.s - s_prime
    if ds <= 0:
        raise ValueError("convolve_s only smooths towards lower s")
    var = ds / 4
    w = grid.window
    frame = max(2, int(np.ceil(4 * np.sqrt(var) / min(w.dx, w.dy))))
    if grid.border_mass(frame) > 1e-6:
        raise WindowTooSmall(f"mass {grid.border_mass(frame):.2e} within {frame} cells of the border")
    Kx = _lattice_kernel(w.xs, w.dx, var)
    Ky = _lattice_kernel(w.ys, w.dy, var)
    return PhaseGrid(w, Kx @ grid.values @ Ky.T, s_prime, grid.label)


def _is_pure(state: State, tol: float = 1e-10) -> bool:
    return isinstance(state, FockVector) or state.purity >= 1 - tol


def _match(a: State, b: State) -> tuple[State, State]:
    if a.dims == b.dims:
        return a, b
    if a.modes == 1 and b.modes == 1:
        d = max(a.dim, b.dim)
        return pad(a, d), pad(b, d)
    raise ValueError(f"cannot compare states with dims {a.dims} and {b.dims}")


def fidelity(a: State, b: State) -> float:
    """|<psi|phi>|^2, or <psi|rho|psi> when one side is mixed.

    Single-mode states of different truncation are zero-padded to match.
    """
    a, b = _match(a, b)
    if not (_is_pure(a) or _is_pure(b)):
        raise BothMixed("fidelity is defined here only when one state is pure")
    if isinstance(a, FockVector) and isinstance(b, FockVector):
        return float(abs(np.vdot(a.amps, b.amps)) ** 2)
    return float(np.real(np.vdot(a.density().mat, b.density().mat)))


def grid_fidelity(wa: PhaseGrid, wb: PhaseGrid) -> float:
    """pi * integral W_a W_b: the overlap Tr(rho_a rho_b) from Wigner grids."""
    if wa.window != wb.window:
        raise ValueError("grids must share a window")
    return float(np.pi * np.sum(wa.values * wb.values) * wa.cell)


def homodyne_marginal(rho: State, phi: float, x, half_length: float | None = None, nv: int = 801):
    """Distribution of q_phi = a e^{-i phi} + a^dag e^{i phi} from the Wigner function.

    p(x) = 1/2 int W(e^{i phi}(x/2 + i v)) dv, integrated numerically over
    v in [-half_length, half_length]. Raises WindowTooSmall if the Wigner
    function has not decayed at the ends of the integration line.
    """
    _single(rho, "homodyne_marginal")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if half_length is None:
        # 8 sigma so the Gaussian envelope is ~1e-14 of the peak at the ends
        win = auto_window(rho, nsigma=8.0)
        half_length = max(abs(win.x_min), abs(win.x_max), abs(win.y_min), abs(win.y_max))
    v = np.linspace(-half_length, half_length, nv)
    alphas = np.exp(1j * phi) * (xs[:, None] / 2 + 1j * v[None, :])
    W = quasi_points(rho, alphas, 0.0)
    edge = max(np.abs(W[:, 0]).max(), np.abs(W[:, -1]).max())
    if edge > 1e-8 * max(1e-300, np.abs(W).max()) and edge > 1e-12:
        raise WindowTooSmall(f"Wigner function is {edge:.2e} at the end of the integration line")
    out = 0.5 * integrate.trapezoid(W, v, axis=1)
    return float(out[0]) if np.ndim(x) == 0 else out


def homodyne_density(rho: State, phi: float, x) -> np.ndarray | float:
    """<x_phi|rho|x_phi> with continuum-normalized quadrature eigenfunctions.

    Operator route to the same marginal as homodyne_marginal.
    """
    _single(rho, "homodyne_density")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    dim = rho.dim
    r = rho.density().mat
    out = np.empty(xs.size)
    for i, xv in enumerate(xs):
        vec = hermite_amplitudes(xv, dim) * np.exp(1j * phi * np.arange(dim))
        out[i] = np.real(vec.conj() @ r @ vec)
    return float(out[0]) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class NonclassicalReport:
    wigner_min: float
    wigner_min_at: complex
    q_min: float
    q_zero_found: bool
    vacuum_prob_zero: bool

    def as_dict(self) -> dict:
        return {
            "wigner_min": self.wigner_min,
            "wigner_min_at": [self.wigner_min_at.real, self.wigner_min_at.imag],
            "q_min": self.q_min,
            "q_zero_found": self.q_zero_found,
            "vacuum_prob_zero": self.vacuum_prob_zero,
        }


def _interior_minima(values: np.ndarray, reach: int, floor: float) -> list[tuple[int, int]]:
    """Interior grid points no higher than their 8 neighbours that sit inside the support.

    A point counts only if Q rises above ``floor`` somewhere within ``reach``
    cells; this drops flat underflow plateaus far out in the Gaussian tails,
    where Q is below any threshold without having a zero.
    """
    v = values
    core = v[1:-1, 1:-1]
    is_min = np.ones(core.shape, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_min &= core <= v[1 + di : v.shape[0] - 1 + di, 1 + dj : v.shape[1] - 1 + dj]
    idx = np.argwhere(is_min) + 1
    out = []
    for i, j in idx:
        patch = v[max(0, i - reach) : i + reach + 1, max(0, j - reach) : j + reach + 1]
        if patch.max() >= floor:
            out.append((int(i), int(j)))
    return out


def nonclassical_indicators(rho: State, window: Window | None = None, q_tol: float = 1e-9) -> NonclassicalReport:
    """Wigner minimum, zeros of Q, and whether the vacuum population vanishes.

    Q decays to zero at infinity for every state, so only interior local
    minima of the Q grid are candidate zeros; each is polished with a local
    minimizer so zeros between lattice points are still found.
    """
    _single(rho, "nonclassical_indicators")
    window = window or auto_window(rho)
    qg = qfunc_grid(rho, window)
    if qg.integral() < 1 - 1e-3:
        raise WindowTooSmall(f"window holds only {qg.integral():.4f} of the Q function")
    wg = wigner_grid(rho, window)
    wmin, wat = wg.minimum()
    q_min = np.inf
    reach = int(np.ceil(_SUPPORT_RADIUS / min(window.dx, window.dy)))
    floor = _SUPPORT_FRACTION * qg.values.max()
    candidates = sorted(_interior_minima(qg.values, reach, floor), key=lambda ij: qg.values[ij])[:8]
    for i, j in candidates:
        x0, y0 = window.xs[i], window.ys[j]
        # polish inside the neighbouring cells only, so the search cannot slide into the tail
        res = optimize.minimize(
            lambda v: qfunc(rho, complex(v[0], v[1])),
            [x0, y0],
            method="Nelder-Mead",
            bounds=[(x0 - window.dx, x0 + window.dx), (y0 - window.dy, y0 + window.dy)],
            options={"xatol": 1e-10, "fatol": 1e-18, "maxiter": 4000},
        )
        q_min = min(q_min, float(res.fun), float(qg.values[i, j]))
    found = bool(q_min < q_tol)
    if not np.isfinite(q_min):
        q_min = qg.minimum()[0]  # no interior minimum: report the decaying edge value
    p00 = float(np.real(rho.density().mat[0, 0]))
    return NonclassicalReport(wmin, wat, float(q_min), found, p00 < 1e-12)
