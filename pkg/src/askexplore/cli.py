"""Command-line entry points: run, suite, aggregate, plot."""

from __future__ import annotations

import argparse
import glob
import os
import sys

from . import harness
from .plotting import emit_plot


def _add_override_flags(p: argparse.ArgumentParser):
    p.add_argument("--task", choices=harness.TASKS)
    p.add_argument("--method", choices=harness.METHODS)
    p.add_argument("--hop", type=int, choices=(1, 2, 3))
    p.add_argument("--n", dest="n_questions", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--seeds", type=lambda s: tuple(int(x) for x in s.split(",")))
    p.add_argument("--no-extrinsic", dest="extrinsic_enabled",
                   action="store_const", const=False, default=None)
    p.add_argument("--rollouts", type=int)
    p.add_argument("--rollout-length", dest="rollout_length", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--intrinsic-scale", dest="intrinsic_scale", type=float)
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--question-file", help="custom question pool (one per line)")
    p.add_argument("--outdir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="askexplore",
        description="Question-driven curiosity lab: push world, PPO, AnE/ICM/RND.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a single experiment config")
    run_p.add_argument("--config", help="INI config file")
    _add_override_flags(run_p)

    suite_p = sub.add_parser("suite", help="run a preset experiment suite")
    suite_p.add_argument("preset", choices=("sparsity", "complexity", "density", "pure"))
    suite_p.add_argument("--outdir", default="runs")
    suite_p.add_argument("--seeds", type=lambda s: tuple(int(x) for x in s.split(",")),
                         default=(0, 1, 2))
    suite_p.add_argument("--rollouts", type=int, default=2000)

    agg_p = sub.add_parser("aggregate", help="aggregate seed CSVs in a run directory")
    agg_p.add_argument("rundir")

    plot_p = sub.add_parser("plot", help="plot aggregated curves from run directories")
    plot_p.add_argument("rundirs", nargs="+")
    plot_p.add_argument("--metric", default="success_rate",
                        choices=harness.METRIC_COLUMNS[2:])
    plot_p.add_argument("-o", "--output", default="plot.svg")
    plot_p.add_argument("--title", default="")
    return parser


def _collect_flags(args) -> dict:
    keys = (
        "task", "method", "hop", "n_questions", "alpha", "seeds",
        "extrinsic_enabled", "rollouts", "rollout_length", "epochs",
        "learning_rate", "intrinsic_scale", "max_steps", "outdir", "question_file",
    )
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _seed_csvs(rundir: str):
    paths = sorted(glob.glob(os.path.join(rundir, "seed*_metrics.csv")))
    if not paths:
        raise SystemExit(f"no seed metrics CSVs found in {rundir}")
    return paths


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "run":
        try:
            config = harness.parse_config(args.config, _collect_flags(args))
        except ValueError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        paths, failures = harness.run_experiment(config)
        for p in paths:
            print(p)
        for seed, msg in failures.items():
            print(f"seed {seed} failed: {msg}", file=sys.stderr)
        return 1 if failures else 0

    if args.command == "suite":
        configs = harness.preset_suite(
            args.preset, outdir=args.outdir, seeds=args.seeds, rollouts=args.rollouts
        )
        status = 0
        for config in configs:
            print(f"running {config.outdir} ...")
            _, failures = harness.run_experiment(config)
            if failures:
                status = 1
                for seed, msg in failures.items():
                    print(f"  seed {seed} failed: {msg}", file=sys.stderr)
        return status

    if args.command == "aggregate":
        agg = harness.aggregate(_seed_csvs(args.rundir))
        header = ["rollout_index", "env_steps"]
        for name in harness.METRIC_COLUMNS[2:]:
            header += [f"{name}_mean", f"{name}_std"]
        print(",".join(header))
        n = len(agg["rollout_index"])
        for i in range(n):
            row = [f"{agg['rollout_index'][i]:.0f}", f"{agg['env_steps'][i]:.0f}"]
            for name in harness.METRIC_COLUMNS[2:]:
                mean, std = agg[name]
                row += [format(mean[i], ".10g"), format(std[i], ".10g")]
            print(",".join(row))
        return 0

    if args.command == "plot":
        aggregates = {}
        for rundir in args.rundirs:
            label = os.path.basename(os.path.normpath(rundir))
            aggregates[label] = harness.aggregate(_seed_csvs(rundir))
        emit_plot(aggregates, args.output, metric=args.metric, title=args.title)
        print(args.output)
        return 0

    return 2


if __name__ == "__main__":
    raise SystemExit(main())
