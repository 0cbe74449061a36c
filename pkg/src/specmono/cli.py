"""Command-line front end: ``specmono <command> PROBLEM.json [options]``.

Every command reads one problem file (``selftest`` reads none), prints a
two-column table or CSV, and exits with

    0  success
    2  usage, validation or domain error
    3  numeric failure, I/O failure, failed selftest
    4  enumeration capacity exceeded

Flag values win over the file's ``analysis`` block, which wins over library
defaults. Environment variables are never read here.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Callable, Sequence

import numpy as np

from . import models, netmat, spectral, sweeps, treecycle
from .errors import CapacityError, NoThresholdError, NumericError, SpecmonoError, ValidationError
from .io import ProblemFile, csv_text, format_float, load_problem
from .odeint import IntegratorConfig, integrate, integrate_to_equilibrium

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_CAPACITY = 4

# library operation -> the one subcommand that exposes it
OPERATION_COMMANDS = {
    "build_network": "classify",
    "classify_matrix": "classify",
    "strongly_connected": "classify",
    "scc_blocks": "classify",
    "principal_eigen": "bound",
    "spectral_bound": "bound",
    "collatz_wielandt": "bound",
    "bound_derivative": "curve",
    "bound_curve": "curve",
    "asymptotic_limits": "limits",
    "threshold_mu": "threshold",
    "karlin_map": "karlin",
    "enumerate_in_trees": "tree-verify",
    "principal_cofactors": "tree-verify",
    "enumerate_unicyclic": "tree-verify",
    "tree_cycle_residual": "tree-verify",
    "construct_k_vector": "kvector",
    "verify_k_vector": "kvector",
    "model_rhs": "simulate",
    "integrate": "simulate",
    "model_jacobian": "regime",
    "single_equilibrium": "regime",
    "integrate_to_equilibrium": "regime",
    "classify_regime": "regime",
    "predprey_threshold": "regime",
    "disease_free_equilibrium": "r0",
    "sis_r0": "r0",
    "r0_sweep": "r0",
    "competition_outcome": "compete",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage().strip()}")


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    if isinstance(v, np.ndarray):
        return "[" + ", ".join(fmt(x) for x in v.tolist()) + "]"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(fmt(x) for x in v) + "]"
    return str(v)


def table(rows: Sequence[tuple[str, object]]) -> str:
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k.ljust(width)}  {fmt(v)}\n" for k, v in rows)


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


# ---------------------------------------------------------------------------
# option resolution
# ---------------------------------------------------------------------------


class Context:
    """Parsed flags plus the problem file, with flag > file > default lookup."""

    def __init__(self, args: argparse.Namespace, prob: ProblemFile | None):
        self.args = args
        self.prob = prob
        self.failed = False

    def opt(self, name: str, default=None, required: bool = False):
        val = getattr(self.args, name, None)
        if val is None and self.prob is not None:
            val = self.prob.analysis.get(name)
        if val is None:
            if required:
                raise ValidationError(f"missing: pass --{name.replace('_', '-')} or set "
                                      f"analysis.{name}", name)
            return default
        return val

    @property
    def tol(self) -> float:
        return float(self.opt("tol", spectral.DEFAULT_TOL))

    def network(self) -> netmat.DispersalNetwork:
        if self.prob is None or self.prob.network is None:
            raise ValidationError("this command needs a network block", "network")
        return self.prob.network

    def base(self) -> np.ndarray:
        """Network matrix with the leak subtracted from its diagonal."""
        A = np.array(self.network().a)
        if self.prob.leak is not None:
            A[np.diag_indices_from(A)] -= self.prob.leak
        return A

    def q(self) -> np.ndarray:
        if self.prob.q is None:
            raise ValidationError("this command needs a q block", "q")
        return self.prob.q

    def model(self, *kinds):
        m = self.prob.model if self.prob is not None else None
        if m is None or (kinds and not isinstance(m, kinds)):
            names = ", ".join(k.__name__ for k in kinds) or "any"
            raise ValidationError(f"this command needs a model block ({names})", "model")
        return m

    def integrator(self, **over) -> IntegratorConfig:
        kw = {}
        for key in ("rel_tol", "abs_tol"):
            val = self.opt(key)
            if val is not None:
                kw[key] = float(val)
        kw.update(over)
        return IntegratorConfig(**kw)

    def emit_csv(self, header, rows) -> str:
        text = csv_text(header, rows)
        if self.args.out:
            with open(self.args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            return ""
        return text


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_classify(ctx: Context) -> str:
    G = ctx.network()
    A = G.a
    cls = netmat.classify_matrix(A)
    blocks = netmat.scc_blocks(A)
    rows = [("n", G.n), ("diag_rule", G.diag_rule)]
    rows += [(name, getattr(cls, name)) for name in
             ("quasi_positive", "laplacian", "sub_laplacian", "strictly_sub", "strongly_sub",
              "irreducible")]
    rows.append(("strongly_connected", netmat.strongly_connected(A)))
    rows.append(("column_sums", G.column_sums()))
    rows.append(("blocks", " ".join("{" + ",".join(str(v + 1) for v in b) + "}"
                                    for b in blocks.blocks)))
    return table(rows)


def cmd_bound(ctx: Context) -> str:
    mu = float(ctx.opt("mu", required=True))
    M = spectral.pencil(ctx.base(), ctx.q(), mu)
    tol = ctx.tol
    if not (netmat.is_quasi_positive(M) and (M.shape[0] == 1 or netmat.strongly_connected(M))):
        return table([("mu", mu), ("s", spectral.spectral_bound(M, tol)), ("irreducible", False)])
    e = spectral.principal_eigen(M, tol)
    return table([
        ("mu", mu), ("s", e.value), ("irreducible", True), ("residual", e.residual),
        ("iterations", e.iterations), ("polished", e.polished), ("right", e.right),
        ("left", e.left), ("collatz_wielandt", spectral.collatz_wielandt(M, e.right)),
    ])


def cmd_curve(ctx: Context) -> str:
    grid = (float(ctx.opt("mu_min", required=True)), float(ctx.opt("mu_max", required=True)),
            int(ctx.opt("steps", required=True)))
    curve = spectral.bound_curve(ctx.base(), ctx.q(), grid, ctx.tol)
    return ctx.emit_csv(("mu", "s", "ds", "d2s"), curve.rows)


def cmd_limits(ctx: Context) -> str:
    lim = spectral.asymptotic_limits(ctx.base(), ctx.q(), ctx.tol)
    rows = [("at_zero", lim.at_zero), ("at_infinity", lim.at_infinity)]
    if lim.weight_vector is not None:
        rows.append(("weights", lim.weight_vector))
    return table(rows)


def cmd_threshold(ctx: Context) -> str:
    hint = ctx.opt("bracket", [1e-6, 1.0])
    if len(hint) != 2:
        raise ValidationError("expected two numbers", "bracket")
    try:
        mu = spectral.threshold_mu(ctx.base(), ctx.q(), tuple(hint), ctx.tol)
    except NoThresholdError as exc:
        return table([("verdict", "no_threshold"), ("case", exc.case)])
    return table([("verdict", "threshold"), ("mu_star", mu)])


def cmd_karlin(ctx: Context) -> str:
    if ctx.prob.karlin is None:
        raise ValidationError("this command needs a karlin block", "karlin")
    P, R = ctx.prob.karlin
    grid = ctx.opt("mu_grid", [k / 10 for k in range(1, 10)])
    rows = [(mu, spectral.karlin_map(P, R, mu, ctx.tol)) for mu in grid]
    return ctx.emit_csv(("mu", "r"), rows)


def _default_arc_value(j: int, i: int, xj: float, xi: float) -> float:
    return 1.0 - xj / xi


def cmd_tree_verify(ctx: Context) -> str:
    G = ctx.network()
    W = netmat.weights_of(G)
    guard = ctx.opt("guard_n")
    tg = treecycle.TREE_GUARD if guard is None else int(guard)
    ug = treecycle.UNICYCLIC_GUARD if guard is None else int(guard)
    cof = treecycle.principal_cofactors(netmat.laplacian_of(W), guard=tg)
    counts = [len(treecycle.enumerate_in_trees(W, r, tg)) for r in range(G.n)]
    mt_gap = float(np.max(np.abs(cof.C - cof.tree_sums) / np.abs(cof.tree_sums)))
    F, x = ctx.prob.tree_cycle if ctx.prob.tree_cycle is not None else (None, None)
    x = cof.alpha if x is None else x
    chk = treecycle.tree_cycle_residual(W, _default_arc_value if F is None else F, x, ug)
    return table([
        ("n", G.n), ("in_trees", counts), ("cofactors", cof.C), ("tree_sums", cof.tree_sums),
        ("matrix_tree_rel_gap", mt_gap), ("alpha", cof.alpha),
        ("unicyclic", len(treecycle.enumerate_unicyclic(W, ug))),
        ("tree_cycle_lhs", chk.lhs), ("tree_cycle_rhs", chk.rhs),
        ("tree_cycle_residual", chk.residual), ("normalized_lhs", chk.normalized_lhs),
        ("cofactor_total", chk.cofactor_total),
        ("bijection", treecycle.bijection_holds(W, ug)),
    ])


def cmd_kvector(ctx: Context) -> str:
    if ctx.prob.kvector is None:
        raise ValidationError("this command needs a kvector block", "kvector")
    mu = float(ctx.opt("mu", required=True))
    mu_prime = float(ctx.opt("mu_prime", required=True))
    kv = treecycle.construct_k_vector(ctx.prob.kvector, mu, mu_prime)
    return table([("u", kv.u), ("k", kv.k), ("verified", treecycle.verify_k_vector(kv))])


def state_labels(spec) -> list[str]:
    n = spec.n
    if isinstance(spec, models.SingleSpecies):
        return [f"u{i}" for i in range(1, n + 1)]
    first, second = ("S", "I") if isinstance(spec, models.SIS) else ("u", "v")
    return [f"{first}{i}" for i in range(1, n + 1)] + [f"{second}{i}" for i in range(1, n + 1)]


def default_state(spec) -> np.ndarray:
    if isinstance(spec, models.SingleSpecies):
        return models.default_interior(spec)
    if isinstance(spec, models.Competition):
        return models.default_competition_start(spec)
    if isinstance(spec, models.PredatorPrey):
        return np.concatenate([spec.K / 2, np.full(spec.n, 0.1)])
    share = spec.N / spec.n
    return np.concatenate([np.full(spec.n, 0.99 * share), np.full(spec.n, 0.01 * share)])


def cmd_simulate(ctx: Context) -> str:
    spec = ctx.model()
    t_end = float(ctx.opt("t_end", required=True))
    y0 = ctx.opt("y0")
    y0 = default_state(spec) if y0 is None else np.asarray(y0, dtype=float)
    if y0.size != models.state_size(spec):
        raise ValidationError(f"expected {models.state_size(spec)} entries", "y0")
    models.model_rhs(spec, y0)  # validates the state before integrating
    traj = integrate(models.system(spec), y0, (0.0, t_end), ctx.integrator())
    if not traj.ok:
        raise NumericError("integration failed before t_end", last_iterate=traj.final)
    rows = (np.concatenate([[t], y]) for t, y in zip(traj.times, traj.states))
    return ctx.emit_csv(["t", *state_labels(spec)], rows)


def _stability(J: np.ndarray) -> float:
    return float(np.max(np.linalg.eigvals(J).real))


def cmd_regime(ctx: Context) -> str:
    spec = ctx.model(models.SingleSpecies, models.PredatorPrey)
    tol = ctx.tol
    if isinstance(spec, models.PredatorPrey):
        rep = models.predprey_threshold(spec, tol)
        E1 = np.concatenate([rep.u_star, np.zeros(spec.n)])
        return table([
            ("model", "predprey"), ("verdict", rep.describe()), ("M", rep.M), ("m", rep.m),
            ("u_star", rep.u_star), ("predator_rates", rep.q),
            ("s_jacobian_E1", _stability(models.model_jacobian(spec, E1))),
        ])
    rep = models.classify_regime(spec, tol)
    rows = [("model", "single"), ("verdict", rep.describe()), ("case", rep.case),
            ("M", rep.M), ("m", rep.m), ("lossy", rep.lossy), ("alpha", rep.alpha)]
    s0 = models.extinction_bound(spec, tol)
    rows.append(("s_jacobian_zero", s0))
    if s0 > 0:
        u = models.single_equilibrium(spec, tol)
        rows += [("u_star", u), ("s_jacobian_u_star", _stability(models.model_jacobian(spec, u)))]
    else:
        eq = integrate_to_equilibrium(models.system(spec), models.default_interior(spec),
                                      ctx.integrator())
        rows += [("long_run_state", eq.state), ("converged", eq.converged)]
    return table(rows)


def cmd_r0(ctx: Context) -> str:
    spec = ctx.model(models.SIS)
    grid = ctx.opt("mu_grid", [spec.mu_I])
    tol = ctx.tol
    S, _ = models.disease_free_equilibrium(spec, tol)
    text = ctx.emit_csv(("mu_I", "r0"), ((r.mu_I, r.r0) for r in models.r0_sweep(spec, grid, tol)))
    if ctx.args.verbose:
        rep = models.sis_r0(spec, grid[0], tol)
        text += table([("dfe_S", S), ("limit_zero", rep.limit_zero),
                       ("limit_infinity", rep.limit_infinity)])
    return text


def cmd_compete(ctx: Context) -> str:
    spec = ctx.model(models.Competition)
    t_end = float(ctx.opt("t_end", required=True))
    rep = models.competition_outcome(spec, t_end, y0=ctx.opt("y0"))
    n = spec.n
    return table([
        ("outcome", rep.outcome.value), ("t", rep.t), ("u", rep.state[:n]),
        ("v", rep.state[n:]), ("u_star", rep.u_star), ("v_norm", rep.v_norm),
        ("u_distance", rep.u_distance),
    ])


def cmd_selftest(ctx: Context) -> str:
    if ctx.args.seed is None:
        raise ValidationError("selftest needs --seed", "seed")
    results = sweeps.run_all(int(ctx.args.seed))
    lines = [f"{'PASS' if r.passed else 'FAIL'} {r.name} {r.failures}/{r.trials}\n"
             for r in results]
    ctx.failed = not all(r.passed for r in results)
    return "".join(lines)


COMMANDS: dict[str, tuple[Callable[[Context], str], str]] = {
    "classify": (cmd_classify, "structural flags and strongly connected blocks"),
    "bound": (cmd_bound, "spectral bound of mu*A + Q with eigenvectors"),
    "curve": (cmd_curve, "CSV of mu, s, ds, d2s over an equally spaced grid"),
    "limits": (cmd_limits, "limits of s(mu*A + Q) at mu -> 0 and mu -> infinity"),
    "threshold": (cmd_threshold, "the mu at which s(mu*A + Q) crosses zero"),
    "karlin": (cmd_karlin, "CSV of the discrete mixing map's spectral radius"),
    "tree-verify": (cmd_tree_verify, "Matrix-Tree and Tree-Cycle checks by enumeration"),
    "kvector": (cmd_kvector, "construct and verify the k-vector"),
    "simulate": (cmd_simulate, "CSV trajectory of the model"),
    "regime": (cmd_regime, "extinction/persistence or predator threshold verdict"),
    "r0": (cmd_r0, "CSV of the basic reproduction number over mu_I"),
    "compete": (cmd_compete, "competition exclusion outcome"),
    "selftest": (cmd_selftest, "seeded randomized property sweeps"),
}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--tol", type=float, default=d, help="eigen/threshold tolerance")
    p.add_argument("--seed", type=int, default=d, help="seed for selftest")
    p.add_argument("--guard-n", dest="guard_n", type=int, default=d,
                   help="largest n enumerated exhaustively")
    p.add_argument("--json-errors", dest="json_errors", action="store_true",
                   default=argparse.SUPPRESS if suppress else False,
                   help="errors as one JSON line on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="specmono", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        _global_flags(p, suppress=True)
        if name != "selftest":
            p.add_argument("problem", help="problem file (JSON)")
        if name in ("bound", "kvector"):
            p.add_argument("--mu", type=float)
        if name == "kvector":
            p.add_argument("--mu-prime", dest="mu_prime", type=float)
        if name == "curve":
            p.add_argument("--mu-min", dest="mu_min", type=float)
            p.add_argument("--mu-max", dest="mu_max", type=float)
            p.add_argument("--steps", type=int)
        if name in ("karlin", "r0"):
            p.add_argument("--mu-grid", dest="mu_grid", type=_float_list)
        if name in ("simulate", "compete"):
            p.add_argument("--t-end", dest="t_end", type=float)
        if name in ("curve", "karlin", "simulate", "r0"):
            p.add_argument("--out", help="write the CSV here instead of stdout")
        if name == "r0":
            p.add_argument("--verbose", action="store_true",
                           help="also print the disease-free state and limits")
    return parser


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (UsageError, ValidationError)):
        return EXIT_USAGE
    if isinstance(exc, CapacityError):
        return EXIT_CAPACITY
    return EXIT_NUMERIC


def _report(exc: BaseException, code: int, as_json: bool) -> None:
    if as_json:
        rec = {"error": type(exc).__name__, "exit_code": code, "message": str(exc)}
        if isinstance(exc, ValidationError) and exc.field:
            rec["field"] = exc.field
        sys.stderr.write(json.dumps(rec, sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"specmono: {type(exc).__name__}: {exc}\n")


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    as_json = "--json-errors" in argv
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        _report(exc, EXIT_USAGE, as_json)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    for name in ("tol", "seed", "guard_n"):
        if not hasattr(args, name):
            setattr(args, name, None)
    args.out = getattr(args, "out", None)
    args.verbose = getattr(args, "verbose", False)
    handler, _ = COMMANDS[args.command]
    try:
        prob = load_problem(args.problem) if args.command != "selftest" else None
        ctx = Context(args, prob)
        text = handler(ctx)
    except (SpecmonoError, OSError, np.linalg.LinAlgError) as exc:
        code = _exit_code(exc)
        _report(exc, code, as_json)
        return code
    sys.stdout.write(text)
    return EXIT_NUMERIC if ctx.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
