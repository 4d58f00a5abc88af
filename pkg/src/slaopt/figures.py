"""Static matplotlib figures rendered next to the delimited outputs."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from .domain import ExecutionRecord


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def save_allocation_figure(records: Sequence[ExecutionRecord], path: str | Path) -> Path:
    """Allocation trajectory and reward over the whole trace."""
    plt = _plt()
    steps = [r.step_index for r in records]
    fig, (ax_res, ax_rew) = plt.subplots(2, 1, sharex=True, figsize=(8, 5.5), constrained_layout=True)
    ax_res.step(steps, [r.gpus for r in records], where="post", label="GPUs")
    ax_res.step(steps, [r.cpus for r in records], where="post", label="CPUs")
    ax_res.set_ylabel("allocated units")
    ax_res.legend(loc="best")
    ax_res.grid(alpha=0.3)
    ax_rew.plot(steps, [r.reward for r in records], color="tab:green", lw=1.0)
    ax_rew.set_xlabel("epoch step")
    ax_rew.set_ylabel("reward")
    ax_rew.grid(alpha=0.3)
    fig.suptitle("Resource allocation and reward")
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_pareto_figure(points, front, selected, path: str | Path) -> Path:
    """Episode outcomes in objective space with the front and selected point."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4.5), constrained_layout=True)
    ax.scatter([p.total_time_s / 60 for p in points], [p.total_cost_usd for p in points],
               s=28, color="tab:gray", alpha=0.6, label="episodes")
    fr = sorted(front, key=lambda p: p.total_time_s)
    ax.plot([p.total_time_s / 60 for p in fr], [p.total_cost_usd for p in fr],
            "o-", color="tab:blue", label="Pareto front")
    ax.scatter([selected.total_time_s / 60], [selected.total_cost_usd],
               marker="*", s=220, color="tab:red", zorder=5, label="selected")
    ax.set_xlabel("total time (min)")
    ax.set_ylabel("total cost (USD)")
    ax.grid(alpha=0.3)
    ax.legend(loc="best")
    fig.suptitle("Time/cost trade-off")
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_bench_figure(rows: Sequence[dict], path: str | Path) -> Path:
    """Grouped bars of priority-metric improvement per method and preference."""
    plt = _plt()
    methods = sorted({row["method"] for row in rows})
    prefs = sorted({row["preference"] for row in rows})
    fig, ax = plt.subplots(figsize=(8, 4.5), constrained_layout=True)
    width = 0.8 / max(1, len(prefs))
    for k, pref in enumerate(prefs):
        values = []
        for method in methods:
            match = [row for row in rows if row["method"] == method and row["preference"] == pref]
            values.append(match[0]["priority_improvement_pct"] if match else 0.0)
        offsets = [i + k * width for i in range(len(methods))]
        ax.bar(offsets, values, width=width, label=pref)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(methods))])
    ax.set_xticklabels(methods, rotation=20, ha="right")
    ax.set_ylabel("improvement over basic (%)")
    ax.grid(axis="y", alpha=0.3)
    ax.legend(title="preference")
    fig.suptitle("Improvement by method and priority")
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
