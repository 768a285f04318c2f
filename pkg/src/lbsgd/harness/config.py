"""Experiment configuration: benchmark registry, presets, and YAML loading.

The config file is a YAML mapping with four sections::

    benchmark:
      family: quadratic_linear        # registry name
      params: {d: 4}                  # keyword args of the family builder
    solver:                           # SolverConfig fields
      eta0: 0.5
      eta_final: 0.002
      omega: 0.7
      steps_per_round: 7
      batch_size: 2
      delta_hat: 0.05
      mode: convex
      oracle_kind: first_order
      max_total_queries: 2000
    noise:                            # isotropic Gaussian scales
      sigma: 0.001
      sigma_hat: 0.0
    seeds: [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]
    output_dir: results/quad4

``LBSGD_OUTPUT_DIR`` in the environment overrides ``output_dir``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from ..benchmarks import (
    CmdpOracle,
    make_chain_cmdp,
    make_gaussian_ellipsoid,
    make_quadratic_linear,
    make_rosenbrock,
    quadratic_linear_optimum,
)
from ..oracles import FirstOrderOracle, NoiseModel, ZeroOrderOracle
from ..problem import OracleKind, ProblemSpec, SolverConfig, validate_problem

OUTPUT_DIR_ENV = "LBSGD_OUTPUT_DIR"

DEFAULT_SEEDS = tuple(range(10))


def _build_quadratic(d: int = 4):
    spec = make_quadratic_linear(d)
    return spec, quadratic_linear_optimum(d)[1]


def _build_rosenbrock(d: int = 2):
    return make_rosenbrock(d), None


def _build_gaussian(d: int = 2, r: float = 0.5):
    return make_gaussian_ellipsoid(d, r=r), None


def _build_chain(**kwargs):
    problem = make_chain_cmdp(**kwargs)
    return problem, None


# family -> (builder returning (problem, f_star or None), preset solver kwargs)
BENCHMARKS = {
    "quadratic_linear": (
        _build_quadratic,
        dict(
            eta0=0.5,
            eta_final=0.002,
            omega=0.7,
            steps_per_round=7,
            mode="convex",
            oracle_kind="first_order",
            max_total_queries=2000,
        ),
    ),
    "rosenbrock": (
        _build_rosenbrock,
        dict(
            eta0=0.1,
            eta_final=0.002,
            omega=0.7,
            steps_per_round=5,
            mode="nonconvex",
            oracle_kind="first_order",
            max_total_queries=4000,
        ),
    ),
    "gaussian_ellipsoid": (
        _build_gaussian,
        dict(
            eta0=0.3,
            eta_final=0.005,
            omega=0.85,
            steps_per_round=3,
            mode="nonconvex",
            oracle_kind="first_order",
            max_total_queries=20000,
        ),
    ),
    "chain_cmdp": (
        _build_chain,
        dict(
            eta0=0.05,
            eta_final=0.01,
            omega=0.8,
            steps_per_round=8,
            batch_size=2000,
            mode="nonconvex",
            oracle_kind="first_order",
            max_total_queries=300_000,
        ),
    ),
}


def preset_batch_size(family: str, d: int) -> int:
    """Per-iteration measurement counts used in the reference experiments."""
    if family == "quadratic_linear":
        return max(d // 2, 1)
    if family == "rosenbrock":
        return max(d - 1, 1)
    if family == "gaussian_ellipsoid":
        return max((d + 1) // 2, 1)
    if family == "chain_cmdp":
        return 2000
    raise KeyError(family)


@dataclass
class ExperimentConfig:
    """One experiment: a benchmark, a solver setup, noise, and seeds."""

    benchmark: str
    benchmark_params: dict
    solver: SolverConfig
    noise_sigma: float = 0.0
    noise_sigma_hat: float = 0.0
    seeds: tuple = DEFAULT_SEEDS
    output_dir: Path = Path("results")

    def __post_init__(self):
        if self.benchmark not in BENCHMARKS:
            raise ValueError(f"unknown benchmark family {self.benchmark!r}; "
                             f"known: {sorted(BENCHMARKS)}")
        self.seeds = tuple(int(s) for s in self.seeds)
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        override = os.environ.get(OUTPUT_DIR_ENV)
        self.output_dir = Path(override) if override else Path(self.output_dir)

    def build(self):
        """Instantiate (spec, oracle, f_star) for this experiment."""
        builder, _ = BENCHMARKS[self.benchmark]
        problem, f_star = builder(**self.benchmark_params)
        if isinstance(problem, ProblemSpec):
            spec = problem
            diags = validate_problem(spec)
            if diags:
                raise ValueError(f"{self.benchmark}: " + "; ".join(diags))
            noise = NoiseModel.isotropic(spec.m, self.noise_sigma, self.noise_sigma_hat)
            if self.solver.oracle_kind is OracleKind.ZEROTH_ORDER:
                oracle = ZeroOrderOracle(spec, noise)
            else:
                oracle = FirstOrderOracle(spec, noise)
        else:
            spec = problem.spec
            oracle = CmdpOracle(problem)
        return spec, oracle, f_star


def preset_config(
    family: str,
    seeds=DEFAULT_SEEDS,
    output_dir: Optional[Path] = None,
    noise_sigma: float = 0.001,
    **params,
) -> ExperimentConfig:
    """Experiment config using the family's reference schedule."""
    builder, solver_kwargs = BENCHMARKS[family]
    if family != "chain_cmdp":
        params.setdefault("d", 2)
    kwargs = dict(solver_kwargs)
    if "batch_size" not in kwargs:
        kwargs["batch_size"] = preset_batch_size(family, params.get("d", 2))
    solver = SolverConfig(**kwargs)
    if output_dir is None:
        output_dir = Path("results") / family
    return ExperimentConfig(
        benchmark=family,
        benchmark_params=params,
        solver=solver,
        noise_sigma=noise_sigma if family != "chain_cmdp" else 0.0,
        seeds=seeds,
        output_dir=output_dir,
    )


def load_config(path) -> ExperimentConfig:
    """Parse a YAML experiment file into a validated config."""
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: expected a mapping at top level")
    try:
        bench = raw["benchmark"]
        family = bench["family"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: missing benchmark.family") from exc
    params = bench.get("params") or {}
    solver = SolverConfig(**(raw.get("solver") or {}))
    noise = raw.get("noise") or {}
    return ExperimentConfig(
        benchmark=family,
        benchmark_params=params,
        solver=solver,
        noise_sigma=float(noise.get("sigma", 0.0)),
        noise_sigma_hat=float(noise.get("sigma_hat", 0.0)),
        seeds=tuple(raw.get("seeds", DEFAULT_SEEDS)),
        output_dir=Path(raw.get("output_dir", "results")),
    )
