"""``simulate`` command-line entry point."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import SolverOptions
from .config_io import load_spec
from .harness import (ALGORITHMS, ExperimentSpec, apply_sweep, build_instance, convergence_trace, mean_sum_se,
                      run_experiment, write_csv)

SWEEP_COMMANDS = {
    "sweep-power": "power_dBW",
    "sweep-antennas": "antennas_per_sat",
    "sweep-users": "user_count",
    "sweep-kappa": "kappa_dB",
    "sweep-phase": "phase_var",
}


def _global_args(parser: argparse.ArgumentParser, suppress: bool):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", type=Path, default=default(None), help="TOML experiment file")
    parser.add_argument("--out", type=Path, default=default(Path("results")), help="output directory")
    parser.add_argument("--trials", type=int, default=default(None), help="override trial count")
    parser.add_argument("--seed", type=int, default=default(None), help="override base seed")
    parser.add_argument("--threads", type=int, default=default(None), help="worker threads")
    parser.add_argument("--timing", action="store_true", default=default(False),
                        help="record wall-clock times (makes CSVs run-dependent)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simulate", description="Multi-satellite precoding Monte-Carlo simulator")
    _global_args(parser, suppress=False)
    sub = parser.add_subparsers(dest="command")
    for name, sweep in SWEEP_COMMANDS.items():
        p = sub.add_parser(name, help=f"sweep {sweep}")
        _global_args(p, suppress=True)
        p.add_argument("--values", type=float, nargs="+", help="sweep values (default: from config)")
        p.add_argument("--algorithms", nargs="+", choices=ALGORITHMS)
    p = sub.add_parser("cdf", help="per-user SE distribution and 5%% values")
    _global_args(p, suppress=True)
    p.add_argument("--algorithms", nargs="+", choices=ALGORITHMS)
    p = sub.add_parser("convergence", help="WMMSE objective per iteration")
    _global_args(p, suppress=True)
    p.add_argument("--iters", type=int, default=60)
    p.add_argument("--algorithms", nargs="+", choices=[a for a in ALGORITHMS if a.startswith("wmmse")],
                   default=["wmmse_icsi_tpc", "wmmse_scsi_tpc", "wmmse_icsi_papc", "wmmse_scsi_papc"])
    p = sub.add_parser("verify", help="run randomized property checks")
    _global_args(p, suppress=True)
    return parser


def _spec_from_args(args) -> ExperimentSpec:
    spec = load_spec(args.config)
    changes = {}
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.threads is not None:
        changes["threads"] = args.threads
    if args.timing and "runtime" not in spec.outputs:
        changes["outputs"] = spec.outputs + ("runtime",)
    if args.command in SWEEP_COMMANDS:
        name = SWEEP_COMMANDS[args.command]
        if args.values is not None:
            changes["sweep_values"] = tuple(args.values)
        elif name != spec.sweep_name:
            raise SystemExit(f"{args.command}: pass --values or a config whose sweep is {name}")
        changes["sweep_name"] = name
    if getattr(args, "algorithms", None):
        changes["algorithms"] = tuple(args.algorithms)
    if args.command == "cdf" and "per_user_cdf" not in spec.outputs:
        changes["outputs"] = changes.get("outputs", spec.outputs) + ("per_user_cdf",)
    return dataclasses.replace(spec, **changes)


def _print_summary(spec: ExperimentSpec, result):
    means = mean_sum_se(result.rows)
    width = max(len(a) for a in spec.algorithms)
    print(f"{spec.sweep_name:>16}  " + "  ".join(f"{a:>{width}}" for a in spec.algorithms))
    for v in spec.sweep_values:
        cells = [means.get((float(v), a)) for a in spec.algorithms]
        print(f"{v:>16g}  " + "  ".join(f"{c:>{width}.3f}" if c is not None else f"{'-':>{width}}" for c in cells))
    for e in result.errors:
        print(f"skipped {e.sweep_name}={e.sweep_value:g} trial {e.trial}: {e.message}", file=sys.stderr)


def _run_convergence(args, spec: ExperimentSpec) -> int:
    solver = SolverOptions(max_iters=args.iters, eps_obj=0.0)
    recs = []
    for v in spec.sweep_values[:1]:
        cfg = apply_sweep(spec.base, spec.sweep_name, v)
        for t in range(spec.trials):
            inst = build_instance(cfg, spec.seed, t, 1)
            for alg in spec.algorithms:
                for it, obj in enumerate(convergence_trace(alg, inst, solver), start=1):
                    recs.append((alg, t, it, obj))
    path = write_csv(args.out / "convergence.csv", ("algorithm", "trial", "iteration", "objective_bpshz"), recs)
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        from .verify import run_all

        results = run_all(0 if args.seed is None else args.seed)
        for r in results:
            print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
        return 0 if all(r.passed for r in results) else 1
    spec = _spec_from_args(args)
    if args.command == "convergence":
        return _run_convergence(args, spec)
    result = run_experiment(spec, args.out)
    _print_summary(spec, result)
    for path in result.files.values():
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
