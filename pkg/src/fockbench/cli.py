"""Batch command-line front end.

Every command builds (or reads) a state, optionally runs a map chain over
it, and writes CSV or JSON to standard output or ``--out``. Chains are a
comma-separated list of steps, each ``name`` or ``name:key=value:...``::

    fockbench apply --state coherent --beta 1 --chain subtract_bs:theta=0.1:detector=on-off,displace:re=-1

Exit status is 0 on success, 1 for invalid input and 2 when the numerics
fail (a conditioning event of zero probability or a divergent series).
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import cond, config, engineer, entangle, ops, phasespace, stats
from .errors import DivergentSeries, FockError, TruncationError, ZeroState
from .fock import State, embed, from_dict, fock_state, mode_index, partial_trace, to_dict, vacuum

DIM_RANGE = (2, 512)
NUMERICAL_FAILURES = (ZeroState, DivergentSeries, TruncationError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; here that code is reserved for numerical failures
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- map chains


@dataclass(frozen=True)
class Step:
    name: str
    params: dict


def _mode(v: str) -> int:
    return mode_index(v)


def _detector(v: str) -> str:
    if v not in cond.DETECTOR_KINDS:
        raise ValueError(f"detector must be one of {cond.DETECTOR_KINDS}")
    return v


# step name -> {key: (converter, default)}; a default of None marks a required key
STEPS = {
    "subtract_ideal": {"mode": (_mode, "a")},
    "add_ideal": {"mode": (_mode, "a")},
    "subtract_bs": {"theta": (float, None), "detector": (_detector, "ideal-fock"), "eta": (float, 1.0), "phi": (float, 0.0)},
    "add_bs": {"theta": (float, None), "phi": (float, 0.0)},
    "add_pdc": {"zeta": (float, None)},
    "jc_add": {"lambda_t": (float, None)},
    "jc_subtract": {"lambda_t": (float, None)},
    "scissors": {},
    "displace": {"re": (float, 0.0), "im": (float, 0.0), "mode": (_mode, "a")},
    "squeeze": {"zeta": (float, None), "mode": (_mode, "a")},
    "squeeze2": {"zeta": (float, None)},
    "beamsplit": {"theta": (float, None), "phi": (float, 0.0)},
    "homodyne": {"x": (float, 0.0), "phi": (float, 0.0), "mode": (_mode, "b")},
    "trace": {"keep": (_mode, "a")},
}


def parse_chain(text: str) -> list[Step]:
    """Strict parser: unknown steps, unknown keys, repeated keys and missing
    required keys are all rejected."""
    steps = []
    for raw in text.split(","):
        raw = raw.strip()
        if not raw:
            raise ValueError(f"empty step in chain {text!r}")
        name, *pairs = raw.split(":")
        if name not in STEPS:
            raise ValueError(f"unknown step {name!r}; known steps: {', '.join(STEPS)}")
        schema = STEPS[name]
        params = {}
        for pair in pairs:
            key, sep, value = pair.partition("=")
            if not sep or not key:
                raise ValueError(f"step {name!r}: expected key=value, got {pair!r}")
            if key not in schema:
                raise ValueError(f"step {name!r} has no parameter {key!r}")
            if key in params:
                raise ValueError(f"step {name!r}: {key!r} given twice")
            try:
                params[key] = schema[key][0](value)
            except (TypeError, ValueError) as exc:
                raise ValueError(f"step {name!r}: bad value for {key!r}: {exc}") from None
        for key, (_, default) in schema.items():
            if key not in params:
                if default is None:
                    raise ValueError(f"step {name!r} needs {key}=...")
                params[key] = default
        steps.append(Step(name, params))
    return steps


def _local(state: State, op: np.ndarray, mode: int) -> np.ndarray:
    return op if state.modes == 1 else embed(op, mode, state.dims)


def _local_dim(state: State, mode: int) -> int:
    return state.dims[0] if state.modes == 1 else state.dims[mode]


def run_step(state: State, step: Step) -> State:
    p = step.params
    name = step.name
    if name == "subtract_ideal":
        return cond.subtract_ideal(state, p["mode"]).state
    if name == "add_ideal":
        return cond.add_ideal(state, p["mode"]).state
    if name == "subtract_bs":
        det = cond.DetectorModel(p["detector"], p["eta"])
        return cond.subtract_bs(state, p["theta"], det, p["phi"]).state
    if name == "add_bs":
        return cond.add_bs(state, p["theta"], p["phi"]).state
    if name == "add_pdc":
        return cond.add_pdc(state, p["zeta"]).state
    if name == "jc_add":
        return cond.jc_add(state, p["lambda_t"]).state
    if name == "jc_subtract":
        return cond.jc_subtract(state, p["lambda_t"]).state
    if name == "scissors":
        return cond.scissors(state).state
    if name == "displace":
        D = ops.displacement(complex(p["re"], p["im"]), _local_dim(state, p["mode"])).mat
        return ops.apply(_local(state, D, p["mode"]), state)
    if name == "squeeze":
        S = ops.squeeze1(p["zeta"], _local_dim(state, p["mode"])).mat
        return ops.apply(_local(state, S, p["mode"]), state)
    if name == "squeeze2":
        return ops.apply(ops.squeeze2(p["zeta"], state.dims), state)
    if name == "beamsplit":
        return ops.apply(ops.beamsplitter(p["theta"], p["phi"], state.dims), state)
    if name == "homodyne":
        return cond.homodyne_condition(state, p["x"], p["mode"], p["phi"]).state
    if name == "trace":
        return partial_trace(state, p["keep"])
    raise ValueError(f"unknown step {name!r}")  # unreachable after parse_chain


def run_chain(state: State, text: str | None) -> State:
    if not text:
        return state
    for step in parse_chain(text):
        state = run_step(state, step)
    return state


# ---------------------------------------------------------------- state sources

# state kind -> (parameters it accepts, parameters it requires)
KINDS = {
    "vacuum": ((), ()),
    "fock": (("n",), ("n",)),
    "coherent": (("beta",), ("beta",)),
    "thermal": (("nbar",), ("nbar",)),
    "squeezed": (("zeta",), ("zeta",)),
    "cat": (("beta", "phi"), ("beta",)),
    "tmsv": (("zeta",), ("zeta",)),
    "tmsv-subtracted": (("zeta", "which"), ("zeta",)),
}
TWO_MODE_KINDS = ("tmsv", "tmsv-subtracted")
STATE_PARAMS = ("n", "beta", "phi", "zeta", "nbar", "which")


def _check_dim(dim: int) -> int:
    lo, hi = DIM_RANGE
    if not lo <= dim <= hi:
        raise ValueError(f"dim must lie in [{lo}, {hi}], got {dim}")
    return dim


def _dims(args, two_mode: bool) -> int:
    if args.dim is not None:
        return _check_dim(args.dim)
    if two_mode:
        return config.DEFAULT_DIM_TWO_MODE
    return _check_dim(config.default_dim())


def build_state(args) -> State:
    if args.input is not None:
        if args.state is not None:
            raise ValueError("give either --state or --in, not both")
        extra = [k for k in STATE_PARAMS if getattr(args, k) is not None]
        if extra:
            raise ValueError(f"--{extra[0]} has no meaning with --in")
        text = sys.stdin.read() if args.input == "-" else open(args.input, encoding="utf-8").read()
        state = from_dict(json.loads(text))
        for d in state.dims:
            _check_dim(d)
        return state
    kind = args.state or "vacuum"
    accepted, required = KINDS[kind]
    for k in STATE_PARAMS:
        if getattr(args, k) is not None and k not in accepted:
            raise ValueError(f"--{k} has no meaning for state {kind!r}")
    for k in required:
        if getattr(args, k) is None:
            raise ValueError(f"state {kind!r} needs --{k}")
    dim = _dims(args, kind in TWO_MODE_KINDS)
    if kind == "vacuum":
        return vacuum(dim)
    if kind == "fock":
        if not 0 <= args.n < dim:
            raise ValueError(f"n must lie in [0, {dim - 1}]")
        return fock_state(args.n, dim)
    if kind == "coherent":
        return stats.coherent(args.beta, dim)
    if kind == "thermal":
        return stats.thermal(args.nbar, dim)
    if kind == "squeezed":
        return stats.squeezed_vacuum(args.zeta, dim)
    if kind == "cat":
        return stats.cat(args.beta, args.phi or 0.0, dim)
    if kind == "tmsv":
        return stats.tmsv(args.zeta, (dim, dim))
    return entangle.subtracted_states(args.zeta, args.which or "both_modes", (dim, dim))


def _source(args) -> State:
    return run_chain(build_state(args), getattr(args, "chain", None))


def _single_mode(state: State, mode: str | None) -> State:
    if state.modes == 2:
        if mode is None:
            raise ValueError("two-mode state: pick a marginal with --mode a|b")
        return partial_trace(state, mode)
    if mode is not None:
        raise ValueError("--mode applies only to two-mode states")
    return state


def _window(args, state: State | None = None) -> phasespace.Window:
    if args.window:
        return phasespace.Window.parse(args.window)
    if state is None:
        return phasespace.Window()
    return phasespace.auto_window(state)


# ---------------------------------------------------------------- output


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def _csv(header: list[str], columns) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*columns):
        buf.write(",".join(v if isinstance(v, str) else f"{v:.17g}" for v in row) + "\n")
    return buf.getvalue()


def _grid_text(grid: phasespace.PhaseGrid, fmt: str) -> str:
    return grid.to_csv() if fmt == "csv" else grid.to_json() + "\n"


# ---------------------------------------------------------------- commands


def cmd_state(args) -> str:
    return _json(to_dict(_source(args)))


def cmd_apply(args) -> str:
    return _json(to_dict(_source(args)))


def cmd_wigner(args) -> str:
    state = _single_mode(_source(args), args.mode)
    return _grid_text(phasespace.wigner_grid(state, _window(args, state)), args.format)


def cmd_qfunc(args) -> str:
    state = _single_mode(_source(args), args.mode)
    return _grid_text(phasespace.qfunc_grid(state, _window(args, state)), args.format)


def cmd_pfunc(args) -> str:
    if args.sequence is not None:
        if args.nbar is None:
            raise ValueError("--sequence needs --nbar")
        extra = [k for k in STATE_PARAMS if k != "nbar" and getattr(args, k) is not None]
        if args.state is not None or args.input is not None or extra or args.chain or args.s is not None:
            raise ValueError("--sequence selects the analytic thermal P function and takes only --nbar")
        grid = phasespace.p_thermal_grid(args.sequence, args.nbar, _window(args))
        return _grid_text(grid, args.format)
    if args.s is None:
        raise ValueError("pfunc needs --sequence (analytic thermal P) or --s (numeric ordering below 1)")
    state = _single_mode(_source(args), args.mode)
    return _grid_text(phasespace.quasi_grid(state, _window(args, state), args.s), args.format)


def cmd_pnd(args) -> str:
    # rows with exactly zero probability are left out, so |1> prints a single row
    probs = stats.pnd(_single_mode(_source(args), args.mode)).probs
    keep = np.flatnonzero(probs)
    return _csv(["n", "probability"], [[str(k) for k in keep], probs[keep]])


def cmd_entangle(args) -> str:
    state = _source(args)
    return entangle.report(state).to_json() + "\n"


def _range(text: str) -> np.ndarray:
    """``start:stop:count`` (inclusive) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:count, got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError("range count must be positive")
        return np.linspace(start, stop, count)
    return np.array([float(v) for v in text.split(",")])


def cmd_kitten_scan(args) -> str:
    zetas, betas = _range(args.zetas), _range(args.betas)
    dim = _dims(args, False)
    surface = engineer.kitten_scan(zetas, betas, dim)
    zz, bb = np.meshgrid(zetas, betas, indexing="ij")
    return _csv(["zeta", "beta", "fidelity"], [zz.ravel(), bb.ravel(), surface.ravel()])


def cmd_dakna(args) -> str:
    coeffs = [complex(c) for c in args.coeffs.split(",")]
    plan = engineer.dakna_plan(coeffs)
    dim = _dims(args, False) if args.dim is not None else max(len(coeffs) + 4, 16)
    fid = engineer.dakna_fidelity(coeffs, dim, args.bs_t)
    out = json.loads(plan.to_json())
    out["fidelity"] = fid
    out["bs_transmittivity"] = args.bs_t
    return _json(out)


# ---------------------------------------------------------------- reproduce


def _pops(state: State, dim: int) -> np.ndarray:
    p = stats.pnd(state).probs
    return np.concatenate([p, np.zeros(max(0, dim - p.size))])[:dim]


def reproduce_fig3(args) -> str:
    """Photon-number distributions of even cats at beta = 2 and 3."""
    dim = _dims(args, False)
    n = np.arange(dim)
    return _csv(["n", "even_cat_beta2", "even_cat_beta3"], [n, *(_pops(stats.cat(b, 0.0, dim), dim) for b in (2, 3))])


def reproduce_fig4(args) -> str:
    """Squeezed vacuum at zeta = 1, with one photon removed at zeta = 0.5, with two removed at zeta = 1."""
    dim = _dims(args, False)
    # build with headroom so the subtracted states carry no truncation loss at the top
    work = dim + 16
    sq1 = stats.squeezed_vacuum(1.0, work)
    one = cond.subtract_ideal(stats.squeezed_vacuum(0.5, work)).state
    two = cond.subtract_ideal(cond.subtract_ideal(sq1).state).state
    cols = [_pops(s, work)[:dim] for s in (sq1, one, two)]
    return _csv(["n", "squeezed_z1", "subtract1_z0.5", "subtract2_z1"], [np.arange(dim), *cols])


def reproduce_fig8(args) -> str:
    """Mode-a photon-number distribution of the squeezed pair at zeta = 1, before and after a photon is removed from each mode."""
    dim = _dims(args, True)
    before = partial_trace(stats.tmsv(1.0, (dim, dim)), "a")
    after = partial_trace(entangle.subtracted_states(1.0, "both_modes", (dim, dim)), "a")
    return _csv(["n", "before", "after"], [np.arange(dim), _pops(before, dim), _pops(after, dim)])


def reproduce_fig9(args) -> str:
    """Analytic P functions of a thermal field (mean 0.5) after subtract-then-add and add-then-subtract."""
    window = phasespace.Window.parse(args.window) if args.window else phasespace.Window(-2, 2, -2, 2, 81, 81)
    alphas = window.alphas()
    p_as = phasespace.p_analytic_thermal("as", 0.5, alphas)
    p_sa = phasespace.p_analytic_thermal("sa", 0.5, alphas)
    return _csv(["alpha_re", "alpha_im", "p_as", "p_sa"], [alphas.real.ravel(), alphas.imag.ravel(), p_as.ravel(), p_sa.ravel()])


def reproduce_table_numbers(args) -> str:
    """Headline numbers: entanglement of the squeezed pair before and after
    subtraction and the best kitten fidelity."""
    dim2 = _dims(args, True)
    dim1 = _dims(args, False)
    tm = stats.tmsv(1.0, (dim2, dim2))
    sub = entangle.subtracted_states(1.0, "both_modes", (dim2, dim2))
    betas = np.round(np.arange(0.8, 1.6 + 1e-9, 0.01), 10)
    scan = engineer.kitten_scan([0.43], betas, dim1)[0]
    marginal = stats.pnd(partial_trace(sub, "a"))
    out = {
        "zeta": 1.0,
        "dims_two_mode": dim2,
        "von_neumann_tmsv": entangle.von_neumann(tm),
        "von_neumann_tmsv_closed_form": entangle.tmsv_entropy(1.0),
        "von_neumann_both_subtracted": entangle.von_neumann(sub),
        "subtracted_marginal_peak": marginal.peak(),
        "kitten_zeta": 0.43,
        "kitten_fidelity_beta_1.16": engineer.kitten_fidelity(0.43, 1.16, dim1),
        "kitten_best_beta": float(betas[int(np.argmax(scan))]),
        "kitten_best_fidelity": float(scan.max()),
    }
    return _json(out)


REPRODUCE = {
    "fig3": reproduce_fig3,
    "fig4": reproduce_fig4,
    "fig8": reproduce_fig8,
    "fig9": reproduce_fig9,
    "table-numbers": reproduce_table_numbers,
}


def cmd_reproduce(args) -> str:
    return REPRODUCE[args.target](args)


# ---------------------------------------------------------------- parser


def _globals(p: argparse.ArgumentParser, top: bool) -> None:
    # accepted both before and after the subcommand; SUPPRESS keeps the
    # subcommand copy from clobbering a value given up front
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    p.add_argument("--dim", type=int, default=d(None), help="truncation dimension per mode, in [2, 512]")
    p.add_argument("--window", default=d(None), help="phase-space window xmin,xmax,ymin,ymax[,nx[,ny]]")
    p.add_argument("--out", default=d(None), help="output file (default: standard output)")


def _state_opts(p: argparse.ArgumentParser, chain: bool = True, chain_required: bool = False) -> None:
    p.add_argument("--state", choices=list(KINDS), help="state to build (default vacuum)")
    p.add_argument("--in", dest="input", help="read a state JSON file ('-' for standard input)")
    p.add_argument("--n", type=int)
    p.add_argument("--beta", type=complex)
    p.add_argument("--phi", type=float, help="cat relative phase")
    p.add_argument("--zeta", type=float)
    p.add_argument("--nbar", type=float)
    p.add_argument("--which", choices=entangle.SUBTRACTIONS)
    if chain:
        p.add_argument("--chain", required=chain_required, help="map chain, e.g. subtract_bs:theta=0.1:detector=on-off,displace:re=1")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fockbench", description="Truncated Fock-space simulation of conditional state engineering.")
    _globals(parser, top=True)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        _globals(p, top=False)
        p.set_defaults(func=func)
        return p

    p = add("state", cmd_state, "build a state and print its JSON")
    _state_opts(p)
    p = add("apply", cmd_apply, "run a map chain over a state")
    _state_opts(p, chain_required=True)
    for name, func in (("wigner", cmd_wigner), ("qfunc", cmd_qfunc)):
        p = add(name, func, f"{name} grid")
        _state_opts(p)
        p.add_argument("--mode", choices=["a", "b"], help="marginal to use for a two-mode state")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
    p = add("pfunc", cmd_pfunc, "P function of a processed thermal field, or an s-ordered function with s < 1")
    _state_opts(p)
    p.add_argument("--sequence", choices=["as", "sa"], help="analytic thermal P: 'as' subtract then add, 'sa' add then subtract")
    p.add_argument("--s", type=float, help="ordering parameter for the numeric route")
    p.add_argument("--mode", choices=["a", "b"])
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p = add("pnd", cmd_pnd, "photon-number distribution CSV")
    _state_opts(p)
    p.add_argument("--mode", choices=["a", "b"], help="marginal to use for a two-mode state")
    p = add("entangle", cmd_entangle, "entanglement report of a two-mode state")
    _state_opts(p)
    p = add("kitten-scan", cmd_kitten_scan, "fidelity of subtracted squeezed vacuum with odd cats")
    p.add_argument("--zetas", default="0.2:0.8:13", help="start:stop:count or comma list")
    p.add_argument("--betas", default="0.6:1.8:25", help="start:stop:count or comma list")
    p = add("dakna", cmd_dakna, "plan and simulate displace/add synthesis of a finite superposition")
    p.add_argument("--coeffs", required=True, help="comma-separated complex coefficients c0,c1,...")
    p.add_argument("--bs-t", type=float, help="realize displacements on a beam splitter of this amplitude transmittivity")
    p = add("reproduce", cmd_reproduce, "regenerate reference data sets")
    p.add_argument("target", choices=list(REPRODUCE))
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        text = args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except NUMERICAL_FAILURES as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (FockError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())
