import json
import os
from pathlib import Path

import numpy as np
import pytest
import yaml

from lbsgd.harness import (
    ExperimentConfig,
    audit_safety,
    emit_csv,
    load_config,
    preset_config,
    read_csv,
    run_experiment,
)
from lbsgd.harness.cli import main as cli_main
from lbsgd.harness.config import OUTPUT_DIR_ENV
from lbsgd.oracles import FirstOrderOracle, NoiseModel
from lbsgd.problem import SolverConfig
from lbsgd.solver import IterateRecord, RunReport, restart_run


def _small_config(tmp_path, seeds=(0, 1, 2), **solver_overrides):
    solver = dict(
        eta0=0.5, eta_final=0.05, omega=0.7, steps_per_round=7,
        batch_size=1, mode="convex", oracle_kind="first_order",
        max_total_queries=2000,
    )
    solver.update(solver_overrides)
    return ExperimentConfig(
        benchmark="quadratic_linear",
        benchmark_params={"d": 2},
        solver=SolverConfig(**solver),
        noise_sigma=0.001,
        seeds=seeds,
        output_dir=tmp_path / "out",
    )


def _dummy_report(trajectory):
    return RunReport(
        trajectory=trajectory,
        output_x=np.zeros(2),
        output_rule="weighted_average",
        violations_total=0,
        queries_total=0,
        iterations_total=len(trajectory),
        wall_time_seconds=0.0,
        kkt=None,
        eta_schedule=[],
        delta_step=1e-3,
    )


def _record(t, x, violated=False, points=None):
    x = np.asarray(x, dtype=float)
    return IterateRecord(
        t=t, queries_cum=t * 5, x=x, f0_true=1.0, max_constraint_true=-0.5,
        barrier_est=1.0, g_norm=0.1, gamma=0.01, eta=0.1, violated=violated,
        sample_points=x[None, :] if points is None else np.asarray(points, dtype=float),
    )


# ----------------------------------------------------------------------- CSV

def test_empty_trajectory_gives_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    emit_csv(_dummy_report([]), path)
    assert path.read_text().strip() == (
        "t,queries_cum,eta,f0_true,max_constraint_true,barrier_est,g_norm,gamma,violated"
    )


def test_three_records_give_four_lines(tmp_path):
    path = tmp_path / "three.csv"
    emit_csv(_dummy_report([_record(i, [0.1 * i, 0.0]) for i in (1, 2, 3)]), path)
    assert len(path.read_text().strip().splitlines()) == 4


def test_csv_roundtrip_is_exact(quad2, tmp_path):
    cfg = SolverConfig(eta0=0.5, eta_final=0.05, omega=0.7, steps_per_round=7, mode="convex")
    noise = NoiseModel.isotropic(quad2.m, sigma=0.001)
    rep = restart_run(quad2, cfg, FirstOrderOracle(quad2, noise), np.random.default_rng(0))
    path = tmp_path / "run.csv"
    emit_csv(rep, path)
    rows = read_csv(path)
    assert len(rows) == len(rep.trajectory)
    for row, rec in zip(rows, rep.trajectory):
        assert row["t"] == rec.t
        assert row["queries_cum"] == rec.queries_cum
        for key in ("eta", "f0_true", "max_constraint_true", "barrier_est", "g_norm", "gamma"):
            assert row[key] == getattr(rec, key)
        assert row["violated"] == rec.violated


# ---------------------------------------------------------------------- audit

def test_audit_clean_run_counts_zero(quad2):
    cfg = SolverConfig(eta0=0.5, eta_final=0.05, omega=0.7, steps_per_round=7, mode="convex")
    rep = restart_run(quad2, cfg, FirstOrderOracle(quad2, NoiseModel.noiseless(quad2.m)),
                      np.random.default_rng(0))
    assert audit_safety(rep, quad2) == 0
    assert audit_safety(rep, quad2) == sum(r.violated for r in rep.trajectory)


def test_audit_counts_injected_infeasible_point(quad2):
    bad_x = np.array([2.0, 0.0])  # outside the box
    rep = _dummy_report([_record(1, [0.0, 0.0]), _record(2, bad_x)])
    assert audit_safety(rep, quad2) == 1


def test_audit_covers_sphere_samples_not_just_iterates(quad2):
    # center feasible, one of three logged sphere samples infeasible
    points = np.array([[0.0, 0.0], [0.1, 0.1], [3.0, 0.0], [0.2, -0.1]])
    rep = _dummy_report([_record(1, [0.0, 0.0], points=points)])
    brute = sum(1 for p in points if quad2.max_constraint(p) > 0)
    assert audit_safety(rep, quad2) == brute == 1


# ----------------------------------------------------------------- experiment

def test_single_seed_bands_collapse(tmp_path):
    cfg = _small_config(tmp_path, seeds=(0,))
    summary = run_experiment(cfg, write_outputs=False)
    assert np.array_equal(summary.accuracy_lo, summary.accuracy_median)
    assert np.array_equal(summary.accuracy_hi, summary.accuracy_median)


def test_experiment_writes_artifacts_and_is_deterministic(tmp_path):
    cfg = _small_config(tmp_path)
    run_experiment(cfg)
    out = Path(cfg.output_dir)
    first = {p.name: p.read_bytes() for p in out.glob("*.csv")}
    assert len(first) == 3
    assert (out / "summary.json").exists()
    assert (out / "accuracy_vs_queries.svg").exists()
    assert (out / "constraint_vs_queries.svg").exists()

    run_experiment(cfg)
    second = {p.name: p.read_bytes() for p in out.glob("*.csv")}
    assert first == second


def test_aggregate_bands_are_ordered(tmp_path):
    cfg = _small_config(tmp_path, seeds=tuple(range(5)))
    summary = run_experiment(cfg, write_outputs=False)
    assert np.all(summary.accuracy_lo <= summary.accuracy_median + 1e-15)
    assert np.all(summary.accuracy_median <= summary.accuracy_hi + 1e-15)
    assert np.all(summary.constraint_lo <= summary.constraint_hi + 1e-15)
    assert summary.violations_total == 0


def test_median_accuracy_trace_decreases(tmp_path):
    cfg = _small_config(tmp_path, seeds=tuple(range(10)),
                        eta_final=0.002, max_total_queries=2000)
    summary = run_experiment(cfg, write_outputs=False)
    med = summary.accuracy_median
    third = len(med) // 3
    assert med[third] < med[0]
    assert med[2 * third] < med[third]
    assert med[-1] < med[2 * third]


def test_config_requires_distinct_seeds(tmp_path):
    with pytest.raises(ValueError):
        _small_config(tmp_path, seeds=(1, 1))


def test_yaml_config_loading(tmp_path):
    payload = {
        "benchmark": {"family": "quadratic_linear", "params": {"d": 3}},
        "solver": {"eta0": 0.4, "eta_final": 0.04, "mode": "convex",
                   "max_total_queries": 500},
        "noise": {"sigma": 0.002},
        "seeds": [3, 4],
        "output_dir": str(tmp_path / "yaml_out"),
    }
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump(payload))
    cfg = load_config(path)
    assert cfg.benchmark == "quadratic_linear"
    assert cfg.benchmark_params == {"d": 3}
    assert cfg.solver.eta0 == 0.4
    assert cfg.noise_sigma == 0.002
    assert cfg.seeds == (3, 4)
    assert cfg.output_dir == tmp_path / "yaml_out"


def test_output_dir_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "forced"))
    cfg = _small_config(tmp_path)
    assert cfg.output_dir == tmp_path / "forced"


# ---------------------------------------------------------------------- CLI

def test_cli_bench_and_report_cycle(tmp_path, capsys):
    out = tmp_path / "bench"
    rc = cli_main(["bench", "quadratic_linear", "--d", "2", "--seeds", "2",
                   "--out", str(out)])
    assert rc == 0
    assert (out / "quadratic_linear_seed0.csv").exists()
    rc = cli_main(["report", str(out)])
    assert rc == 0
    captured = capsys.readouterr().out
    assert "violations_total: 0" in captured


def test_cli_check_grad(capsys):
    assert cli_main(["check-grad", "rosenbrock", "--d", "2"]) == 0
    assert "all gradient checks passed" in capsys.readouterr().out


def test_cli_run_from_yaml(tmp_path, capsys):
    payload = {
        "benchmark": {"family": "quadratic_linear", "params": {"d": 2}},
        "solver": {"eta0": 0.5, "eta_final": 0.1, "mode": "convex",
                   "max_total_queries": 400},
        "noise": {"sigma": 0.001},
        "seeds": [0, 1],
        "output_dir": str(tmp_path / "run_out"),
    }
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump(payload))
    assert cli_main(["run", str(path)]) == 0
    assert (tmp_path / "run_out" / "summary.json").exists()
