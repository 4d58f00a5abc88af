"""Run summaries, allocation recommendations, and the compliance report.

The report is plain UTF-8 text with a fixed layout so downstream diffing
and golden-file checks are byte-stable: baseline and optimized compliance
per dimension, the optimized run's headline numbers, improvement
percentages recomputed from the raw summaries, resource changes, and three
recommended allocations.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

from .cluster_sim import CostRates, DEFAULT_RATES, WorkloadSpec, allocated_memory, epoch_time, hourly_cost
from .domain import DEFAULT_BOUNDS, ResourceBounds, ResourceConfig, SLA_DIMENSIONS
from .errors import ConfigError

MET_MARK = "✓"       # check mark
VIOLATED_MARK = "✗"  # cross mark
ARROW = "→"

DIMENSION_LABELS = {
    "time": "Time",
    "cost": "Cost",
    "throughput": "Throughput",
    "memory": "Memory",
    "gpu_util": "GPU Util",
    "cpu_util": "CPU Util",
}

# Cost-focused recommendations may be at most this much slower than the
# fastest possible allocation.
COST_OPTION_TIME_FACTOR = 1.5


@dataclass(frozen=True)
class RunSummary:
    """Machine-readable outcome of one run; serializes to key = value text."""

    workload_name: str
    t_base_s: float
    total_epochs: int
    dataset_size: int
    mode: str
    method: str
    seed: int
    initial_gpus: int
    initial_cpus: int
    gpus: int
    cpus: int
    total_time_s: float
    total_cost_usd: float
    throughput_sps: float
    gpu_util: float
    cpu_util: float
    memory_used_gb: float
    memory_alloc_gb: float
    met: tuple[bool, ...]
    severities: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.met) != 6 or len(self.severities) != 6:
            raise ValueError("summary must carry six met flags and six severities")

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "met":
                value = ",".join(str(int(v)) for v in value)
            elif f.name == "severities":
                value = ",".join(repr(float(v)) for v in value)
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunSummary":
        raw: dict[str, str] = {}
        for line_no, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"summary line {line_no} is not 'key = value': {line!r}")
            key, _, value = stripped.partition("=")
            raw[key.strip()] = value.strip()
        try:
            return cls(
                workload_name=raw["workload_name"],
                t_base_s=float(raw["t_base_s"]),
                total_epochs=int(raw["total_epochs"]),
                dataset_size=int(raw["dataset_size"]),
                mode=raw["mode"],
                method=raw["method"],
                seed=int(raw["seed"]),
                initial_gpus=int(raw["initial_gpus"]),
                initial_cpus=int(raw["initial_cpus"]),
                gpus=int(raw["gpus"]),
                cpus=int(raw["cpus"]),
                total_time_s=float(raw["total_time_s"]),
                total_cost_usd=float(raw["total_cost_usd"]),
                throughput_sps=float(raw["throughput_sps"]),
                gpu_util=float(raw["gpu_util"]),
                cpu_util=float(raw["cpu_util"]),
                memory_used_gb=float(raw["memory_used_gb"]),
                memory_alloc_gb=float(raw["memory_alloc_gb"]),
                met=tuple(bool(int(v)) for v in raw["met"].split(",")),
                severities=tuple(float(v) for v in raw["severities"].split(",")),
            )
        except KeyError as exc:
            raise ConfigError(f"summary is missing key {exc.args[0]!r}") from None
        except ValueError as exc:
            raise ConfigError(f"summary value invalid: {exc}") from None

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "RunSummary":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    def workload(self) -> WorkloadSpec:
        """Reconstruct the planning-relevant part of the workload."""
        return WorkloadSpec(
            name=self.workload_name,
            t_base_s=self.t_base_s,
            total_epochs=self.total_epochs,
            dataset_size=self.dataset_size,
            noise_sigma=0.0,
        )


@dataclass(frozen=True)
class Recommendation:
    """One suggested allocation with its projected full-run figures."""

    label: str
    config: ResourceConfig
    memory_gb: float
    est_time_min: float
    change_pct: float  # positive means faster than the current allocation
    est_cost_usd: float
    description: str


def recommend(workload: WorkloadSpec, current: ResourceConfig,
              bounds: ResourceBounds = DEFAULT_BOUNDS,
              rates: CostRates = DEFAULT_RATES) -> list[Recommendation]:
    """Three allocation options: time-critical, cost-critical, balanced.

    Projections use the noiseless models. The time-critical option is the
    fastest allocation in the grid; the cost-critical option is the
    cheapest among allocations within 1.5x of that best time; the balanced
    option echoes the current allocation.
    """
    def totals(config: ResourceConfig) -> tuple[float, float]:
        t = epoch_time(config, workload) * workload.total_epochs
        return t, hourly_cost(config, rates) * t / 3600.0

    grid = [ResourceConfig(g, c)
            for g in range(1, bounds.g_max + 1)
            for c in range(1, bounds.c_max + 1)]
    by_config = {config: totals(config) for config in grid}

    fastest = min(grid, key=lambda cfg: (by_config[cfg][0], by_config[cfg][1]))
    best_time = by_config[fastest][0]
    affordable = [cfg for cfg in grid if by_config[cfg][0] <= COST_OPTION_TIME_FACTOR * best_time]
    cheapest = min(affordable, key=lambda cfg: (by_config[cfg][1], by_config[cfg][0]))

    current_time, _ = totals(current)

    def build(label: str, config: ResourceConfig, description: str) -> Recommendation:
        t, cost = by_config.get(config) or totals(config)
        return Recommendation(
            label=label,
            config=config,
            memory_gb=allocated_memory(config),
            est_time_min=t / 60.0,
            change_pct=(current_time - t) / current_time * 100.0,
            est_cost_usd=cost,
            description=description,
        )

    return [
        build("Time-Critical", fastest, "Maximize training speed at higher cost"),
        build("Cost-Critical", cheapest, "Minimize cost while maintaining acceptable performance"),
        build("Balanced", current, "Current allocation (balanced between cost and performance)"),
    ]


@dataclass(frozen=True)
class Report:
    """Structured content of the compliance report."""

    baseline: RunSummary
    optimized: RunSummary
    time_improvement_pct: float
    cost_change_pct: float
    throughput_change_pct: float
    recommendations: tuple[Recommendation, ...]


def build_report(baseline: RunSummary, optimized: RunSummary,
                 recommendations: Sequence[Recommendation]) -> Report:
    """Compute the derived comparison figures from two run summaries."""
    if len(recommendations) != 3:
        raise ValueError("a report carries exactly three recommendations")
    if baseline.total_time_s <= 0 or baseline.total_cost_usd <= 0 or baseline.throughput_sps <= 0:
        raise ConfigError("baseline summary must have positive time, cost, and throughput")
    return Report(
        baseline=baseline,
        optimized=optimized,
        time_improvement_pct=(baseline.total_time_s - optimized.total_time_s)
        / baseline.total_time_s * 100.0,
        cost_change_pct=(optimized.total_cost_usd - baseline.total_cost_usd)
        / baseline.total_cost_usd * 100.0,
        throughput_change_pct=(optimized.throughput_sps - baseline.throughput_sps)
        / baseline.throughput_sps * 100.0,
        recommendations=tuple(recommendations),
    )


def _compliance_lines(summary: RunSummary) -> list[str]:
    lines = []
    for name, ok, severity in zip(SLA_DIMENSIONS, summary.met, summary.severities):
        label = DIMENSION_LABELS[name]
        if ok:
            lines.append(f"- {label}: {MET_MARK} Met")
        else:
            lines.append(f"- {label}: {VIOLATED_MARK} Violated (severity: {severity:.2f})")
    return lines


def _signed(value_pct: float, positive: str, negative: str) -> str:
    if round(value_pct, 10) == 0.0:
        return "0.0% (no change)"
    label = positive if value_pct > 0 else negative
    return f"{abs(value_pct):.1f}% ({label})"


def _signed_cost(value_pct: float) -> str:
    if round(value_pct, 10) == 0.0:
        return "0.00% (no change)"
    label = "increase" if value_pct > 0 else "decrease"
    return f"{abs(value_pct):.2f}% ({label})"


def _resource_change(label: str, before: int, after: int) -> str:
    if after == before:
        suffix = "(no changes)"
    elif after > before:
        suffix = f"(increased by {after - before})"
    else:
        suffix = f"(decreased by {before - after})"
    return f"- {label}: {before} {ARROW} {after} {suffix}"


def _plural(count: int, unit: str) -> str:
    return f"{count} {unit}" if count == 1 else f"{count} {unit}s"


def render_report(baseline: RunSummary, optimized: RunSummary,
                  recommendations: Sequence[Recommendation]) -> str:
    """Render the full report text; see the module docstring for layout."""
    report = build_report(baseline, optimized, recommendations)
    out: list[str] = []
    out.append("Baseline SLA Compliance:")
    out.extend(_compliance_lines(report.baseline))
    out.append("")
    out.append("Optimized SLA Compliance:")
    out.extend(_compliance_lines(report.optimized))
    out.append("")
    out.append("Optimized Training Run:")
    out.append(f"- Optimization strategy: {report.optimized.mode}")
    out.append(
        f"- Resources: {_plural(report.optimized.gpus, 'GPU')}, "
        f"{_plural(report.optimized.cpus, 'CPU')}, "
        f"{report.optimized.memory_alloc_gb:.1f} GB memory"
    )
    out.append(f"- Training time: {report.optimized.total_time_s / 60.0:.2f} minutes")
    out.append(f"- Cost: ${report.optimized.total_cost_usd:.2f}")
    out.append(f"- Throughput: {report.optimized.throughput_sps:.2f} samples/sec")
    out.append("")
    out.append("Improvements from Baseline:")
    out.append(f"- Time: {_signed(report.time_improvement_pct, 'faster', 'slower')}")
    out.append(f"- Cost: {_signed_cost(report.cost_change_pct)}")
    out.append(f"- Throughput: {_signed(report.throughput_change_pct, 'increase', 'decrease')}")
    out.append("")
    out.append("Resource Changes:")
    out.append(_resource_change("GPUs", report.baseline.gpus, report.optimized.gpus))
    out.append(_resource_change("CPUs", report.baseline.cpus, report.optimized.cpus))
    out.append("")
    out.append("Optimization Recommendations:")
    for rec in report.recommendations:
        out.append("")
        out.append(f"{rec.label} Option:")
        out.append(f"GPUs: {rec.config.gpus}, CPUs: {rec.config.cpus}, Memory: {rec.memory_gb:.1f} GB")
        out.append(
            f"Estimated time: {rec.est_time_min:.2f} min ({rec.change_pct:.1f}% change), "
            f"Cost: ${rec.est_cost_usd:.2f} (for complete training)"
        )
        out.append(f"Description: {rec.description}")
    out.append("")
    return "\n".join(out)
