"""Command-line entry points.

Subcommands::

    lbsgd run <config.yaml>           full experiment from a config file
    lbsgd bench <family> --d <d>      preset reproduction of one benchmark
    lbsgd check-grad <family>         finite-difference gradient verification
    lbsgd report <dir>                re-aggregate existing trajectory CSVs
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from ..problem import central_difference, validate_problem
from .config import BENCHMARKS, DEFAULT_SEEDS, load_config, preset_config
from .io import read_csv
from .plots import render_traces
from .run import run_experiment, summary_from_csv_rows, write_summary


def _print_summary(summary):
    print(f"violations_total: {summary.violations_total}")
    print(f"mean wall time:   {summary.mean_wall_time:.3f} s")
    if len(summary.queries):
        print(f"final accuracy (median):   {summary.accuracy_median[-1]:.6g}")
        print(f"final constraint (median): {summary.constraint_median[-1]:.6g}")


def cmd_run(args) -> int:
    config = load_config(args.config)
    summary = run_experiment(config)
    _print_summary(summary)
    print(f"artifacts in {config.output_dir}")
    return 0


def cmd_bench(args) -> int:
    params = {}
    if args.d is not None:
        params["d"] = args.d
    seeds = tuple(range(args.seeds))
    config = preset_config(
        args.family,
        seeds=seeds,
        output_dir=args.out,
        noise_sigma=args.noise,
        **params,
    )
    summary = run_experiment(config)
    _print_summary(summary)
    print(f"artifacts in {config.output_dir}")
    return 0


def cmd_check_grad(args) -> int:
    params = {"d": args.d} if args.d is not None else {}
    builder, _ = BENCHMARKS[args.family]
    problem, _ = builder(**params)
    spec = problem if hasattr(problem, "funcs") else problem.spec
    diags = validate_problem(spec)
    for i, (func, grad) in enumerate(zip(spec.funcs, spec.grads)):
        g = np.asarray(grad(spec.x0), dtype=float)
        g_fd = central_difference(func, spec.x0)
        rel = np.linalg.norm(g - g_fd) / max(1.0, np.linalg.norm(g_fd))
        print(f"f^{i}: |grad - fd| / max(1, |fd|) = {rel:.3e}")
    if diags:
        for d in diags:
            print(f"FAIL: {d}")
        return 1
    print("all gradient checks passed")
    return 0


def cmd_report(args) -> int:
    out_dir = Path(args.dir)
    meta_path = out_dir / "run_meta.json"
    f_star = None
    if meta_path.exists():
        with open(meta_path) as fh:
            f_star = json.load(fh).get("f_star")
    rows_per_seed = {}
    for path in sorted(out_dir.glob("*_seed*.csv")):
        match = re.search(r"_seed(\d+)\.csv$", path.name)
        if match:
            rows_per_seed[int(match.group(1))] = read_csv(path)
    if not rows_per_seed:
        print(f"no trajectory CSVs found in {out_dir}", file=sys.stderr)
        return 1
    summary = summary_from_csv_rows(rows_per_seed, f_star)
    write_summary(summary, out_dir / "summary.json")
    render_traces(summary, out_dir, accuracy_is_gap=f_star is not None)
    _print_summary(summary)
    print(f"re-aggregated {len(rows_per_seed)} runs into {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lbsgd",
        description="Safe constrained optimization experiments with log-barrier SGD.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a YAML config")
    p_run.add_argument("config", help="path to the experiment YAML")
    p_run.set_defaults(func=cmd_run)

    p_bench = sub.add_parser("bench", help="run a preset benchmark reproduction")
    p_bench.add_argument("family", choices=sorted(BENCHMARKS))
    p_bench.add_argument("--d", type=int, default=None, help="problem dimension")
    p_bench.add_argument("--noise", type=float, default=0.001, help="value-noise std")
    p_bench.add_argument("--seeds", type=int, default=len(DEFAULT_SEEDS),
                         help="number of seeds (0..n-1)")
    p_bench.add_argument("--out", type=Path, default=None, help="output directory")
    p_bench.set_defaults(func=cmd_bench)

    p_check = sub.add_parser("check-grad", help="verify gradients by finite differences")
    p_check.add_argument("family", choices=sorted(BENCHMARKS))
    p_check.add_argument("--d", type=int, default=None)
    p_check.set_defaults(func=cmd_check_grad)

    p_report = sub.add_parser("report", help="re-aggregate existing CSV trajectories")
    p_report.add_argument("dir", help="directory holding *_seed*.csv files")
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
