"""SLA compliance evaluation, violation severities, and change detection.

Six dimensions are always tracked (time, cost, throughput, memory, GPU
utilization, CPU utilization). Time and cost are judged on projected run
totals so a deadline breach is visible long before the job finishes.
"""

from __future__ import annotations

import numpy as np

from .cluster_sim import CostRates, DEFAULT_RATES, EpochMetrics, SimState, WorkloadSpec, epoch_time, hourly_cost
from .domain import ComplianceVector, ResourceConfig, SLASpec, StateVector, clamp, flatten_state

# Defaults applied when the user leaves a target unset. Unset time and cost
# targets are unbounded: the dimension is tracked but can never be violated.
DEFAULT_GPU_UTIL_TARGET = 0.6
DEFAULT_CPU_UTIL_TARGET = 0.5
DEFAULT_THROUGHPUT_FRACTION = 0.8


def _severity_over(value: float, target: float) -> float:
    """Severity for a <=-type target (value should stay at or below it)."""
    return clamp((value - target) / target, 0.0, 1.0)


def _severity_under(value: float, target: float) -> float:
    """Severity for a >=-type target (value should stay at or above it)."""
    return clamp((target - value) / target, 0.0, 1.0)


def evaluate_compliance(
    metrics: EpochMetrics,
    progress: float,
    spec: SLASpec,
    elapsed_s: float,
    spent_usd: float,
    projected_total_time_s: float,
    projected_total_cost_usd: float,
    baseline_throughput_sps: float | None = None,
) -> ComplianceVector:
    """Judge all six SLA dimensions after an epoch.

    Time and cost compare the projected totals (falling back to the raw
    elapsed/spent figures if a projection is not finite). Throughput,
    memory, and the utilizations are measured quantities, so before any
    epoch has completed (progress == 0) they are treated as met. Unset
    targets default to: 80% of the baseline throughput when one is known,
    memory within the allocation, and 0.6 / 0.5 GPU / CPU utilization.
    """
    time_value = projected_total_time_s if np.isfinite(projected_total_time_s) else elapsed_s
    cost_value = projected_total_cost_usd if np.isfinite(projected_total_cost_usd) else spent_usd

    throughput_target = spec.throughput_target_sps
    if throughput_target is None and baseline_throughput_sps is not None:
        throughput_target = DEFAULT_THROUGHPUT_FRACTION * baseline_throughput_sps
    memory_target = spec.memory_target_gb if spec.memory_target_gb is not None else metrics.memory_alloc_gb
    gpu_util_target = spec.gpu_util_target if spec.gpu_util_target is not None else DEFAULT_GPU_UTIL_TARGET
    cpu_util_target = spec.cpu_util_target if spec.cpu_util_target is not None else DEFAULT_CPU_UTIL_TARGET

    severities = [0.0] * 6
    if spec.time_target_min is not None:
        severities[0] = _severity_over(time_value, spec.time_target_min * 60.0)
    if spec.cost_target_usd is not None:
        severities[1] = _severity_over(cost_value, spec.cost_target_usd)
    if progress > 0.0:
        if throughput_target is not None:
            severities[2] = _severity_under(metrics.throughput_sps, throughput_target)
        severities[3] = _severity_over(metrics.memory_used_gb, memory_target)
        severities[4] = _severity_under(metrics.gpu_util, gpu_util_target)
        severities[5] = _severity_under(metrics.cpu_util, cpu_util_target)

    return ComplianceVector(
        met=tuple(s == 0.0 for s in severities),  # type: ignore[arg-type]
        severity=tuple(severities),  # type: ignore[arg-type]
    )


def change_detected(previous: StateVector, current: StateVector, tau: float,
                    compliance: ComplianceVector) -> bool:
    """Gate for taking an action: big state shift or any active violation."""
    delta = float(np.linalg.norm(flatten_state(current) - flatten_state(previous)))
    return delta > tau or not compliance.all_met


def project_totals(state: SimState, config: ResourceConfig, workload: WorkloadSpec,
                   rates: CostRates = DEFAULT_RATES) -> tuple[float, float]:
    """Projected total run time and cost if ``config`` is held from here on.

    The remaining epochs are priced with the noiseless model; before the
    first epoch this is the plain full-run estimate for the allocation.
    """
    remaining = workload.total_epochs - state.epoch_completed
    remaining_s = remaining * epoch_time(config, workload)
    total_time_s = state.elapsed_s + remaining_s
    total_cost_usd = state.spent_usd + hourly_cost(config, rates) * remaining_s / 3600.0
    return total_time_s, total_cost_usd
