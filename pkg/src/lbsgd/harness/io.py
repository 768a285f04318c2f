"""Trajectory CSV emission and parsing.

Floats are written with ``repr`` (shortest round-trip form, locale
independent) so a parsed file reproduces the original values exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path

from ..solver import IterateRecord, RunReport

CSV_COLUMNS = (
    "t",
    "queries_cum",
    "eta",
    "f0_true",
    "max_constraint_true",
    "barrier_est",
    "g_norm",
    "gamma",
    "violated",
)


def emit_csv(report: RunReport, path) -> None:
    """Write one row per iterate record, header included."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in report.trajectory:
            writer.writerow(
                [
                    rec.t,
                    rec.queries_cum,
                    repr(rec.eta),
                    repr(rec.f0_true),
                    repr(rec.max_constraint_true),
                    repr(rec.barrier_est),
                    repr(rec.g_norm),
                    repr(rec.gamma),
                    rec.violated,
                ]
            )


def read_csv(path) -> list[dict]:
    """Parse a trajectory CSV back into typed row dicts."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
        for raw in reader:
            rows.append(
                {
                    "t": int(raw["t"]),
                    "queries_cum": int(raw["queries_cum"]),
                    "eta": float(raw["eta"]),
                    "f0_true": float(raw["f0_true"]),
                    "max_constraint_true": float(raw["max_constraint_true"]),
                    "barrier_est": float(raw["barrier_est"]),
                    "g_norm": float(raw["g_norm"]),
                    "gamma": float(raw["gamma"]),
                    "violated": raw["violated"] == "True",
                }
            )
    return rows
