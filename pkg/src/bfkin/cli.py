"""Command-line entry point.

Subcommands:

* ``run``       - one simulation (bi-fidelity by default), CSV outputs.
* ``reference`` - single-fidelity baseline on the full velocity grid.
* ``sweep``     - repeat the bi-fidelity run over a list of gamma_max caps and
                  report the relative l1 error against a shared reference.

Exit codes: 0 success, 1 usage/config error, 2 numeric abort, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import config_from_mapping, parse_config
from .driver import build_problem, run_simulation
from .errors import BfkinError, ConfigError, NumericsError
from .error_metrics import relative_l1_error
from .outputs import emit_outputs, write_sweep


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; usage errors are 1
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--preset", help="experiment preset name")
    p.add_argument("--epsilon", type=float, help="scaling parameter")
    p.add_argument("--gamma-max", type=int, dest="gamma_max",
                   help="cap on the number of selected velocity points")
    p.add_argument("--delta", type=float, help="selection stopping threshold")
    p.add_argument("--diagnostics", choices=("off", "light", "full"))
    p.add_argument("--t-final", type=float, dest="t_final")
    p.add_argument("--out", default="out", help="output directory")


def build_parser() -> _Parser:
    parser = _Parser(prog="bfkin", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="bi-fidelity simulation")
    _add_common(run_p)
    run_p.add_argument("--with-reference", action="store_true",
                       help="also run the full high-fidelity baseline for comparison")

    ref_p = sub.add_parser("reference", help="single-fidelity baseline")
    _add_common(ref_p)
    ref_p.add_argument("--fidelity", choices=("hf", "lf"), default="hf")

    sweep_p = sub.add_parser("sweep", help="error vs. selection cap")
    _add_common(sweep_p)
    sweep_p.add_argument("--gamma-max-values", dest="gamma_max_values",
                         help="comma-separated caps, e.g. 5,10,20,50")
    return parser


def _resolve_config(args) -> tuple:
    overrides = {}
    for key in ("preset", "epsilon", "gamma_max", "delta", "diagnostics", "t_final"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if args.config:
        cfg, extras = parse_config(args.config, overrides)
    else:
        cfg, extras = config_from_mapping(overrides)
    if getattr(args, "gamma_max_values", None):
        extras["gamma_max_values"] = tuple(
            int(v) for v in str(args.gamma_max_values).split(",") if v.strip()
        )
    return cfg, extras


def _cmd_run(args) -> int:
    cfg, _ = _resolve_config(args)
    result = run_simulation(cfg)
    reference = None
    if args.with_reference:
        ref_cfg = replace(cfg, mode="hf_reference")
        reference = run_simulation(ref_cfg, build_problem(ref_cfg)).final
    paths = emit_outputs(result, args.out, reference)
    print(f"completed {len(result.history)} steps; wrote {len(paths)} files to {args.out}")
    return 0


def _cmd_reference(args) -> int:
    cfg, _ = _resolve_config(args)
    cfg = replace(cfg, mode="hf_reference" if args.fidelity == "hf" else "lf_reference")
    result = run_simulation(cfg)
    paths = emit_outputs(result, args.out)
    print(f"completed {len(result.history)} steps; wrote {len(paths)} files to {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg, extras = _resolve_config(args)
    caps = extras.get("gamma_max_values")
    if not caps:
        raise ConfigError("sweep mode needs gamma_max_values (flag or config key)")
    times = list(cfg.snapshot_times) if cfg.snapshot_times else [cfg.t_final]

    ref_cfg = replace(cfg, mode="hf_reference")
    ref_snapshots = _run_with_snapshots(ref_cfg, times)
    rows = []
    for cap in caps:
        bf_cfg = replace(cfg, mode="bifidelity", gamma_max=cap)
        bf_snapshots = _run_with_snapshots(bf_cfg, times)
        for t in times:
            err = relative_l1_error(ref_snapshots[t].values, bf_snapshots[t].values)
            rows.append([cfg.epsilon, cap, t, err])
    import os

    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "sweep.csv")
    write_sweep(path, rows)
    print(f"wrote {len(rows)} sweep rows to {path}")
    return 0


def _run_with_snapshots(cfg, times):
    """Run to max(times), capturing the state at each requested instant."""
    snapshots = {}
    remaining = sorted(times)
    current = replace(cfg, t_final=remaining[-1])
    problem = build_problem(current)
    start = 0.0
    state = problem.initial
    for t in remaining:
        seg_cfg = replace(current, t_final=t - start)
        seg_problem = _problem_with_initial(problem, state, seg_cfg)
        result = run_simulation(seg_cfg, seg_problem)
        state = result.final
        snapshots[t] = state
        start = t
    return snapshots


def _problem_with_initial(problem, initial, cfg):
    from .driver import Problem

    return Problem(cfg, problem.mesh_x, problem.mesh_v, initial,
                   problem.ws_semi, problem.ws_boltz)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "reference":
            return _cmd_reference(args)
        return _cmd_sweep(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericsError as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except BfkinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
