"""Figure rendering for study and sweep outputs.

Uses the non-interactive backend so rendering works headless; figures are
written next to the delimited outputs by the command-line entry points.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiments import MetricsReport, SweepResult

MODEL_STYLE = {
    "dm": {"color": "#1f77b4", "marker": "o", "label": "deterministic"},
    "rm1": {"color": "#d62728", "marker": "s", "label": "robust (aggregate)"},
    "rm2": {"color": "#2ca02c", "marker": "^", "label": "robust (counting)"},
}


def _style(model: str) -> dict:
    return MODEL_STYLE.get(model, {"color": "#7f7f7f", "marker": "x", "label": model})


def plot_sweep(sweep: SweepResult, path: str | Path) -> Path:
    """Average surviving jobs per model along the budget grid."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    series = sweep.series()
    for model in sweep.models:
        style = _style(model)
        ax.plot(
            sweep.grid,
            series[model],
            color=style["color"],
            marker=style["marker"],
            label=style["label"],
        )
    xlabel = (
        "deviated cells per job"
        if sweep.kind == "rm1"
        else "adversary spending budget"
    )
    ax.set_xlabel(xlabel)
    ax.set_ylabel("avg. surviving jobs")
    ax.set_title(f"Plan survival under {sweep.kind}-style scenarios")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_study(report: MetricsReport, path: str | Path) -> Path:
    """Survival ratios per model, one panel per scenario family."""
    summary = report.simulation_summary()
    kinds = sorted(summary) or ["rm1", "rm2"]
    fig, axes = plt.subplots(1, len(kinds), figsize=(5.5 * len(kinds), 4.2), squeeze=False)
    for ax, kind in zip(axes[0], kinds):
        block = summary.get(kind, {})
        models = sorted(block)
        ratios = [block[m].get("R") or 0.0 for m in models]
        colors = [_style(m)["color"] for m in models]
        bars = ax.bar(models, ratios, color=colors)
        for bar, value in zip(bars, ratios):
            ax.annotate(
                f"{value:.1f}",
                (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                ha="center",
                va="bottom",
                fontsize=9,
            )
        ax.set_ylim(0, 105)
        ax.set_ylabel("avg. surviving share of plan (%)")
        ax.set_title(f"{kind}-style scenarios")
        ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
