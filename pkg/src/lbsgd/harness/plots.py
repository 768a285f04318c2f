"""Static SVG trace figures for experiment outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

BAND_ALPHA = 0.25


def _trace_figure(queries, median, lo, hi, ylabel, title):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(queries, median, color="tab:blue", lw=1.5, label="median")
    ax.fill_between(queries, lo, hi, color="tab:blue", alpha=BAND_ALPHA,
                    label="5%-95% over seeds")
    ax.set_xlabel("cumulative oracle queries")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def render_traces(summary, out_dir, accuracy_is_gap: bool = True) -> list:
    """Write accuracy-vs-queries and constraint-vs-queries SVG files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    label = "objective gap f0 - f*" if accuracy_is_gap else "objective f0"
    fig = _trace_figure(
        summary.queries,
        summary.accuracy_median,
        summary.accuracy_lo,
        summary.accuracy_hi,
        label,
        "accuracy vs queries",
    )
    path = out_dir / "accuracy_vs_queries.svg"
    fig.savefig(path)
    plt.close(fig)
    written.append(path)

    fig = _trace_figure(
        summary.queries,
        summary.constraint_median,
        summary.constraint_lo,
        summary.constraint_hi,
        "max constraint value",
        "constraint vs queries",
    )
    ax = fig.axes[0]
    ax.axhline(0.0, color="tab:red", lw=1.0, ls="--")
    path = out_dir / "constraint_vs_queries.svg"
    fig.savefig(path)
    plt.close(fig)
    written.append(path)
    return written
