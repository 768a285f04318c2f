"""Experiment harness: configuration, execution, artifacts."""

from .config import BENCHMARKS, ExperimentConfig, load_config, preset_config
from .io import emit_csv, read_csv
from .run import AggregateSummary, audit_safety, run_experiment

__all__ = [
    "AggregateSummary",
    "BENCHMARKS",
    "ExperimentConfig",
    "audit_safety",
    "emit_csv",
    "load_config",
    "preset_config",
    "read_csv",
    "run_experiment",
]
