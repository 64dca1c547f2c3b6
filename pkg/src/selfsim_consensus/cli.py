"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 usage error.  Any flag may
also come from a ``--config`` file of ``key = value`` lines (``#`` starts a
comment); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .dynamics import (
    SimConfig,
    SimKind,
    analytic_coherence,
    run_delayed,
    run_first_order_noisy,
    run_noiseless,
    run_second_order_noisy,
)
from .errors import BudgetExceededError, RouteDisagreementError
from .graphs import (
    DEFAULT_DENSE_BUDGET,
    DEFAULT_VERTEX_BUDGET,
    Family,
    GraphSpec,
    build_graph,
    write_edgelist,
    write_json,
)
from .metrics import epsilon_recursive, zeta
from .spectrum import spectrum
from .sweep import METRIC_NAMES, SweepSpec, cmd_sweep, format_table, parse_int_list, parse_range
from .validation import NoChecksRan, check_spec, format_results, validate_all

__all__ = ["build_parser", "cmd_validate_all", "main"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
TRACE_SCHEMA = "selfsim-consensus/trace v1"
SPECTRUM_SCHEMA = "selfsim-consensus/spectrum v1"
SUMMARY_SCHEMA = "selfsim-consensus/simulation-summary v1"
# default Euler-Maruyama step; small enough that the O(dt * zeta) bias stays near 1%
NOISY_DT = 0.005
DETERMINISTIC_DT_FACTOR = 0.05  # dt = factor / zeta


class UsageError(ValueError):
    pass


# --- helpers -----------------------------------------------------------------


def _out_path(args, name: str | None) -> Path | None:
    if name is None or name == "-":
        return None
    p = Path(name)
    if args.out_dir and not p.is_absolute():
        p = Path(args.out_dir) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _emit(args, text: str, name: str | None) -> None:
    path = _out_path(args, name)
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)
        _say(args, f"wrote {path}")


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg, file=sys.stderr)


def _graph_spec(args) -> GraphSpec:
    flags = {"family": "--family", "n": "-n", "k": "-k"}
    missing = [flag for dest, flag in flags.items() if getattr(args, dest, None) is None]
    if missing:
        raise UsageError(f"missing required option(s): {', '.join(missing)}")
    return GraphSpec(Family.parse(args.family), int(args.n), int(args.k))


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def read_config(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; keys use flag spelling with or without dashes."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value.strip("\"'")
    return out


def _apply_config(parser: argparse.ArgumentParser, sub: argparse.ArgumentParser | None, cfg: dict) -> None:
    targets = [parser] + ([sub] if sub is not None else [])
    for key, value in cfg.items():
        for p in targets:
            action = next((a for a in p._actions if a.dest == key), None)
            if action is None:
                continue
            if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                p.set_defaults(**{key: _parse_bool(value)})
            else:
                # argparse runs string defaults through the action's type
                p.set_defaults(**{key: value})
            break
        else:
            raise UsageError(f"unknown config key {key!r}")


# --- subcommands ---------------------------------------------------------------


def cmd_generate(args) -> int:
    spec = _graph_spec(args)
    g = build_graph(spec, args.budget_vertices)
    path = _out_path(args, args.out)
    if path is None:
        raise UsageError("generate needs --out FILE")
    (write_json if args.format == "json" else write_edgelist)(g, path)
    _say(args, f"wrote {spec} ({g.num_vertices} vertices, {g.num_edges} edges) to {path}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    spec = _graph_spec(args)
    s = spectrum(spec.family, spec.n, spec.k)
    lines = [f"# schema: {SPECTRUM_SCHEMA}", f"# {spec}"]
    if args.expand:
        lines.append("value")
        lines.extend(repr(v) for v in s.expand(args.budget_vertices).tolist())
    else:
        lines.append("value,multiplicity")
        lines.extend(f"{v!r},{m}" for v, m in s.rows())
    _emit(args, "\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_metrics(args) -> int:
    spec = _graph_spec(args)
    lo, hi = parse_range(args.sweep) if args.sweep else (spec.n, spec.n)
    sweep = SweepSpec([spec.family], [spec.k], (lo, hi), list(METRIC_NAMES), args.format)
    rows = cmd_sweep(sweep)
    _emit(args, format_table(rows, args.format), args.out)
    return EXIT_OK


def cmd_sweep_cli(args) -> int:
    families = [f for f in args.families.split(",") if f]
    outputs = [o for o in args.outputs.split(",") if o] if args.outputs else list(METRIC_NAMES)
    sweep = SweepSpec(families, parse_int_list(args.k), parse_range(args.n), outputs, args.format)
    rows = cmd_sweep(sweep, workers=args.workers)
    _emit(args, format_table(rows, args.format), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    spec = _graph_spec(args)
    spec.check_budget(args.budget_dense)
    results = check_spec(spec, args.budget_dense)
    print(format_results(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_validate_all(
    max_n_per_k: int | None = None,
    *,
    k_values: Sequence[int] = (3, 4, 5),
    dense_budget: int = DEFAULT_DENSE_BUDGET,
    simulate: bool = True,
    quiet: bool = False,
) -> int:
    """Run the full cross-check matrix and print a pass/fail table; 0 iff all pass."""
    try:
        results = validate_all(
            max_n_per_k,
            k_values,
            dense_budget,
            simulate,
            progress=None if quiet else (lambda r: print(r.line(), flush=True)),
        )
    except NoChecksRan as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    failed = [r for r in results if not r.passed]
    if quiet:
        for r in failed:
            print(r.line())
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_FAIL


def _validate_all_cli(args) -> int:
    return cmd_validate_all(
        args.max_n,
        k_values=parse_int_list(args.k),
        dense_budget=args.budget_dense,
        simulate=not args.no_simulate,
        quiet=args.quiet,
    )


def _sim_config(args, spec: GraphSpec) -> SimConfig:
    kind = SimKind(args.kind)
    z = zeta(spec.family, spec.n, spec.k)
    noisy = kind in (SimKind.FIRST_ORDER_NOISY, SimKind.SECOND_ORDER_NOISY)
    tau = float(args.tau or 0.0)
    if kind is not SimKind.DELAYED and tau:
        raise UsageError("--tau only applies to --kind delayed")
    if args.dt is not None:
        dt = float(args.dt)
    else:
        dt = min(NOISY_DT, DETERMINISTIC_DT_FACTOR / z) if noisy else DETERMINISTIC_DT_FACTOR / z
        if tau > 0:
            dt = tau / math.ceil(tau / dt)
    if args.t_end is not None:
        t_end = float(args.t_end)
    elif kind is SimKind.NOISELESS:
        t_end = 20.0 / epsilon_recursive(spec.family, spec.n, spec.k)
    else:
        t_end = 200.0
    g = build_graph(spec, args.budget_vertices)
    cfg = SimConfig(
        g, kind, dt=dt, t_end=t_end, tau=tau, noise_intensity=float(args.noise),
        seed=int(args.seed), stride=int(args.stride),
    )
    cfg.validate()
    return cfg


def write_trace_csv(path: Path, trace) -> None:
    N = trace.states.shape[1]
    header = ",".join(["time"] + [f"x_{i}" for i in range(N)])
    data = np.column_stack([trace.times, trace.states])
    with open(path, "w") as fh:
        fh.write(f"# schema: {TRACE_SCHEMA}\n")
        np.savetxt(fh, data, delimiter=",", fmt="%.17g", header=header, comments="")


def cmd_simulate(args) -> int:
    spec = _graph_spec(args)
    cfg = _sim_config(args, spec)
    trials = int(args.trials)
    emp = err = None
    if cfg.kind is SimKind.NOISELESS:
        trace = run_noiseless(cfg)
    elif cfg.kind is SimKind.DELAYED:
        trace = run_delayed(cfg)
    elif cfg.kind is SimKind.FIRST_ORDER_NOISY:
        trace, emp, err = run_first_order_noisy(cfg, trials)
    else:
        trace, emp, err = run_second_order_noisy(cfg, trials)
    if err is not None and not math.isfinite(err):
        err = None  # one trial has no spread to estimate
    path = _out_path(args, args.out)
    if path is None:
        raise UsageError("simulate needs --out FILE")
    write_trace_csv(path, trace)
    summary = {
        "schema": SUMMARY_SCHEMA,
        "empirical_coherence": emp,
        "stderr": err,
        "analytic": analytic_coherence(cfg),
        "diverged": bool(trace.diverged),
        "divergence_time": trace.divergence_time,
        "trials": trials if emp is not None else None,
        "config": cfg.meta(),
    }
    summary_path = _out_path(args, args.summary) if args.summary else path.with_name(path.stem + ".summary.json")
    summary_path.write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    _say(args, f"wrote {path} and {summary_path}")
    if not args.quiet:
        print(json.dumps({k: summary[k] for k in ("empirical_coherence", "stderr", "analytic", "diverged")}))
    return EXIT_OK


# --- parser --------------------------------------------------------------------


def _add_graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", help="hier or sier")
    p.add_argument("-n", type=int, help="generation")
    p.add_argument("-k", type=int, help="clique size / alphabet size (>= 3)")


def _add_global(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--budget-vertices", type=int, default=d(DEFAULT_VERTEX_BUDGET),
                   help="largest graph (or expanded spectrum) to materialise")
    p.add_argument("--budget-dense", type=int, default=d(DEFAULT_DENSE_BUDGET),
                   help="largest graph for dense eigensolver checks")
    p.add_argument("--quiet", action="store_true", default=d(False))
    p.add_argument("--out-dir", default=d(None), help="directory for relative output paths")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selfsim-consensus",
        description="Spectra and consensus metrics of hierarchical and Sierpinski graphs.",
    )
    parser.add_argument("--config", help="key = value file supplying default flags")
    _add_global(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_global(common, suppress=True)
    subs = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = subs.add_parser("generate", parents=[common], help="build a graph and write it out")
    _add_graph_args(p)
    p.add_argument("--out")
    p.add_argument("--format", choices=["edgelist", "json"], default="edgelist")
    p.set_defaults(func=cmd_generate)

    p = subs.add_parser("spectrum", parents=[common], help="recursive Laplacian spectrum")
    _add_graph_args(p)
    p.add_argument("--expand", action="store_true", help="one eigenvalue per line")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_spectrum)

    p = subs.add_parser("metrics", parents=[common], help="consensus metrics for one graph or an n range")
    _add_graph_args(p)
    p.add_argument("--sweep", metavar="N1..N2", help="sweep n over an inclusive range")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_metrics)

    p = subs.add_parser("validate", parents=[common], help="oracle cross-checks for one graph")
    _add_graph_args(p)
    p.set_defaults(func=cmd_validate)

    p = subs.add_parser("validate-all", parents=[common], help="full oracle cross-check matrix")
    p.add_argument("--max-n", type=int, default=None, help="largest n per k (default: dense budget)")
    p.add_argument("-k", default="3,4,5", help="comma-separated k values")
    p.add_argument("--no-simulate", action="store_true", help="skip simulation smoke tests")
    p.set_defaults(func=_validate_all_cli)

    p = subs.add_parser("simulate", parents=[common], help="simulate a consensus system")
    _add_graph_args(p)
    p.add_argument("--kind", choices=[k.value for k in SimKind], default="noiseless")
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--noise", type=float, default=1.0, help="noise intensity")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stride", type=int, default=1, help="keep every stride-th step in the trace")
    p.add_argument("--out")
    p.add_argument("--summary", help="summary JSON path (default: next to --out)")
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("sweep", parents=[common], help="metrics table over families, k and n")
    p.add_argument("--families", default="hier,sier")
    p.add_argument("-k", default="3,4,5")
    p.add_argument("-n", default="1..12", metavar="N1..N2")
    p.add_argument("--outputs", default=None, help=f"comma-separated subset of {','.join(METRIC_NAMES)}")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_sweep_cli)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        pre, _ = parser.parse_known_args(argv)
        if pre.config:
            subs = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
            _apply_config(parser, subs.choices.get(pre.command), read_config(pre.config))
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    except (UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except RouteDisagreementError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, BudgetExceededError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
