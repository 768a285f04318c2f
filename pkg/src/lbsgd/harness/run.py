"""Multi-seed experiment execution, safety auditing, and aggregation."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..problem import ProblemSpec
from ..solver import RunReport, lbsgd_run, restart_run
from .config import ExperimentConfig
from .io import emit_csv
from .plots import render_traces

PERCENTILES = (5.0, 95.0)


@dataclass
class AggregateSummary:
    """Cross-seed traces (median with 5%/95% bands) and run totals."""

    queries: np.ndarray
    accuracy_median: np.ndarray
    accuracy_lo: np.ndarray
    accuracy_hi: np.ndarray
    constraint_median: np.ndarray
    constraint_lo: np.ndarray
    constraint_hi: np.ndarray
    violations_total: int
    mean_wall_time: float
    per_seed: list

    def check(self):
        assert np.all(self.accuracy_lo <= self.accuracy_median + 1e-15)
        assert np.all(self.accuracy_median <= self.accuracy_hi + 1e-15)


def audit_safety(report: RunReport, spec: ProblemSpec) -> int:
    """Recount constraint violations from scratch.

    Re-evaluates the true constraints at every recorded query point
    (iterates and any zeroth-order sphere samples) and returns the number
    of points with any positive constraint, independently of the solver's
    own flags.
    """
    if spec.m == 0:
        return 0
    count = 0
    for rec in report.trajectory:
        for p in rec.sample_points:
            if spec.max_constraint(p) > 0:
                count += 1
    return count


def step_interp(queries: np.ndarray, values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Piecewise-constant (last seen value) interpolation onto a query grid."""
    idx = np.searchsorted(queries, grid, side="right") - 1
    idx = np.clip(idx, 0, len(values) - 1)
    return values[idx]


def aggregate_traces(runs: list, f_star: Optional[float]) -> dict:
    """Align per-seed traces on cumulative query count and take percentiles.

    ``runs`` is a list of (queries, f0, max_constraint) triples. Accuracy is
    ``f0 - f_star`` when the optimum is known, raw ``f0`` otherwise.
    """
    grid = np.unique(np.concatenate([q for q, _, _ in runs]))
    acc = np.vstack([
        step_interp(q, f0 - (f_star or 0.0), grid) for q, f0, _ in runs
    ])
    con = np.vstack([step_interp(q, mc, grid) for q, _, mc in runs])
    lo, hi = PERCENTILES
    return {
        "queries": grid,
        "accuracy_median": np.median(acc, axis=0),
        "accuracy_lo": np.percentile(acc, lo, axis=0),
        "accuracy_hi": np.percentile(acc, hi, axis=0),
        "constraint_median": np.median(con, axis=0),
        "constraint_lo": np.percentile(con, lo, axis=0),
        "constraint_hi": np.percentile(con, hi, axis=0),
    }


def run_experiment(config: ExperimentConfig, write_outputs: bool = True) -> AggregateSummary:
    """Execute one run per seed, write artifacts, and aggregate.

    Per-seed trajectory CSVs, a JSON summary, and SVG trace plots land in
    ``config.output_dir``. Runs use independent generators seeded from the
    config, so a rerun with the same config is byte-identical.
    """
    spec, oracle, f_star = config.build()
    use_restarts = config.solver.eta_final < config.solver.eta0
    out_dir = Path(config.output_dir)

    reports = {}
    for seed in config.seeds:
        rng = np.random.default_rng(seed)
        if use_restarts:
            report = restart_run(spec, config.solver, oracle, rng)
        else:
            report = lbsgd_run(spec, config.solver, oracle, rng)
        audited = audit_safety(report, spec)
        if audited != report.violations_total:
            raise RuntimeError(
                f"seed {seed}: audit recount {audited} != solver count {report.violations_total}"
            )
        reports[seed] = report

    runs = []
    per_seed = []
    for seed, report in reports.items():
        q = np.array([r.queries_cum for r in report.trajectory], dtype=float)
        f0 = np.array([r.f0_true for r in report.trajectory])
        mc = np.array([r.max_constraint_true for r in report.trajectory])
        runs.append((q, f0, mc))
        per_seed.append(
            {
                "seed": seed,
                "final_f0": float(spec.funcs[0](report.output_x)),
                "final_max_constraint": spec.max_constraint(report.output_x),
                "violations": report.violations_total,
                "queries": report.queries_total,
                "iterations": report.iterations_total,
                "wall_time_seconds": report.wall_time_seconds,
                "budget_exhausted": report.budget_exhausted,
                "stalled": report.stalled,
            }
        )

    traces = aggregate_traces(runs, f_star)
    summary = AggregateSummary(
        violations_total=sum(r.violations_total for r in reports.values()),
        mean_wall_time=float(np.mean([r.wall_time_seconds for r in reports.values()])),
        per_seed=per_seed,
        **traces,
    )
    summary.check()

    if write_outputs:
        out_dir.mkdir(parents=True, exist_ok=True)
        for seed, report in reports.items():
            emit_csv(report, out_dir / f"{config.benchmark}_seed{seed}.csv")
        meta = {
            "benchmark": config.benchmark,
            "params": config.benchmark_params,
            "f_star": f_star,
            "noise_sigma": config.noise_sigma,
            "seeds": list(config.seeds),
        }
        with open(out_dir / "run_meta.json", "w") as fh:
            json.dump(meta, fh, indent=2)
        write_summary(summary, out_dir / "summary.json")
        render_traces(summary, out_dir, accuracy_is_gap=f_star is not None)
    return summary


def write_summary(summary: AggregateSummary, path) -> None:
    payload = {
        "violations_total": summary.violations_total,
        "mean_wall_time_seconds": summary.mean_wall_time,
        "final_accuracy_median": float(summary.accuracy_median[-1]) if len(summary.queries) else None,
        "final_constraint_median": float(summary.constraint_median[-1]) if len(summary.queries) else None,
        "per_seed": summary.per_seed,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)


def summary_from_csv_rows(rows_per_seed: dict, f_star: Optional[float]) -> AggregateSummary:
    """Re-aggregate previously written trajectory CSVs."""
    runs = []
    per_seed = []
    violations = 0
    for seed, rows in sorted(rows_per_seed.items()):
        q = np.array([r["queries_cum"] for r in rows], dtype=float)
        f0 = np.array([r["f0_true"] for r in rows])
        mc = np.array([r["max_constraint_true"] for r in rows])
        runs.append((q, f0, mc))
        seed_viol = sum(r["violated"] for r in rows)
        violations += seed_viol
        per_seed.append(
            {
                "seed": seed,
                "final_f0": float(f0[-1]) if len(f0) else None,
                "final_max_constraint": float(mc[-1]) if len(mc) else None,
                "violations": int(seed_viol),
                "queries": int(q[-1]) if len(q) else 0,
                "iterations": len(rows),
            }
        )
    traces = aggregate_traces(runs, f_star)
    summary = AggregateSummary(
        violations_total=violations,
        mean_wall_time=float("nan"),
        per_seed=per_seed,
        **traces,
    )
    summary.check()
    return summary
