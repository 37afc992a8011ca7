"""Command-line entry point.

Exit codes: 0 on success, 1 for configuration errors, 2 for runtime failures.
"""

import argparse
import csv
import dataclasses
import json
import os
import sys

from .exceptions import ConfigurationError, EstimationFailedError, MobeaError
from .experiment import (
    SWEEP_PARAMS,
    ablation_modes,
    apply_sweep,
    build_snapshots,
    load_config,
    report_json,
    run_monte_carlo,
    sweep_csv,
    trial_seeds,
)
from .solver import run

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _seed(text):
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _sweep(text):
    param, sep, values = text.partition("=")
    param = param.strip()
    if not sep or param not in SWEEP_PARAMS:
        raise argparse.ArgumentTypeError(
            f"expected <param>=<v1,v2,...> with param in {', '.join(SWEEP_PARAMS)}"
        )
    try:
        vals = [float(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric sweep value in {values!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("sweep needs at least one value")
    return param, vals


def build_parser():
    parser = _Parser(prog="mobea", description="Off-grid DOA estimation with a bilevel MOEA.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    est = sub.add_parser("estimate", help="run one estimation and print the directions")
    est.add_argument("--config", required=True)
    est.add_argument("--seed", type=_seed, required=True)
    est.add_argument("--out", help="write the result as JSON")
    est.add_argument("--emit-trace", metavar="DIR",
                     help="write trace.csv (per-generation knee) and front.csv (final front)")

    for name, helptext in (("montecarlo", "Monte Carlo sweep of one parameter"),
                           ("ablate", "the same sweep for several refinement modes")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True)
        p.add_argument("--trials", type=_positive_int, required=True)
        p.add_argument("--seed", type=_seed, required=True)
        p.add_argument("--sweep", type=_sweep, required=True, metavar="PARAM=V1,V2,...")
        p.add_argument("--workers", type=_positive_int, default=1)
        p.add_argument("--out", required=True, help="CSV output path")
        p.add_argument("--json", metavar="PATH", help="also dump every trial record as JSON")
        p.add_argument("--timing", action="store_true",
                       help="fill the mean_runtime_s column (output is then not reproducible)")
        if name == "ablate":
            p.add_argument("--modes", default="forward,on-grid,taylor",
                           help="comma-separated subset of forward, on-grid, taylor")
    return parser


def _write(path, text):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _emit_trace(directory, result):
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "trace.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("generation", "knee_f1", "knee_f2", "sigma", "elapsed_s"))
        for rec in result.trace:
            w.writerow((rec.generation, rec.knee_f1, repr(rec.knee_f2), repr(rec.sigma),
                        repr(rec.elapsed)))
    with open(os.path.join(directory, "front.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("f1", "f2"))
        for f1, f2 in result.front:
            w.writerow((int(f1), repr(float(f2))))


def _cmd_estimate(args):
    config = load_config(args.config)
    signal_seed, noise_seed, solver_seed = trial_seeds(args.seed, 0)
    Y = build_snapshots(config, signal_seed, noise_seed)
    result = run(Y, config.grid(), config.array(), config.solver, solver_seed)
    doas = [float(d) for d in result.doas]
    print(f"K_hat = {result.n_sources}")
    print("doas  = " + ", ".join(f"{d:.4f}" for d in doas))
    if args.out:
        payload = {
            "estimated_doas": doas,
            "n_sources": result.n_sources,
            "converged": result.converged,
            "generations": result.generations,
            "zeta": [float(z) for z in result.zeta],
            "scenario": config.describe(),
            "seed": args.seed,
        }
        _write(args.out, json.dumps(payload, indent=2, sort_keys=True))
    if args.emit_trace:
        _emit_trace(args.emit_trace, result)
    return EXIT_OK


def _cmd_sweep(args, modes=None):
    config = load_config(args.config)
    param, values = args.sweep
    rows = []
    for mode in modes or [None]:
        base = config
        if mode is not None:
            base = dataclasses.replace(config, solver=dataclasses.replace(config.solver, refinement=mode))
        for v in values:
            report = run_monte_carlo(apply_sweep(base, param, v), args.trials, args.seed, args.workers)
            rows.append((mode, param, v, report) if modes else (param, v, report))
            print(f"{(mode + ' ') if mode else ''}{param}={v:g}: rmse={report.rmse:.4f} "
                  f"admitted={report.rmse_trial_count} avg_k={report.avg_source_number:.3f}",
                  flush=True)
    _write(args.out, sweep_csv(rows, timing=args.timing, mode=bool(modes)))
    if args.json:
        _write(args.json, report_json(rows, mode=bool(modes)))
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "estimate":
            return _cmd_estimate(args)
        if args.command == "montecarlo":
            return _cmd_sweep(args)
        return _cmd_sweep(args, ablation_modes(args.modes.split(",")))
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EstimationFailedError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (MobeaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
