"""Preference weights, violation-driven weight adaptation, and the scalar reward.

The three objectives (time, cost, utilization) are combined with weights
that start at a preference-dependent base and shift toward whichever
objective is currently violating its SLA, then renormalize to sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass

from .domain import ComplianceVector, PreferenceMode, clamp
from .cluster_sim import EpochMetrics
from .errors import ConfigError

# Base weights per preference, in (time, cost, utilization) order.
BASE_WEIGHTS = {
    PreferenceMode.TIME: (0.6, 0.1, 0.3),
    PreferenceMode.COST: (0.1, 0.6, 0.3),
    PreferenceMode.BALANCED: (0.3, 0.3, 0.4),
}

# How the six SLA dimensions collapse onto the three objectives: time pressure
# comes from the deadline and throughput, cost from budget, utilization from
# memory and both device utilizations. Each group aggregates by max.
SEVERITY_GROUPS = ((0, 2), (1,), (3, 4, 5))

DEFAULT_ADAPTATION_RATE = 0.5   # alpha: severity-to-weight gain
DEFAULT_VIOLATION_PENALTY = 0.5  # beta: scale of the compliance penalty
GPU_UTIL_SWEET_SPOT = 0.8
CPU_UTIL_SWEET_SPOT = 0.7


@dataclass(frozen=True)
class WeightVector:
    """Objective weights in (time, cost, utilization) order."""

    w_time: float
    w_cost: float
    w_util: float

    def __post_init__(self) -> None:
        if min(self.w_time, self.w_cost, self.w_util) < 0:
            raise ValueError(f"weights must be non-negative, got {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.w_time, self.w_cost, self.w_util)

    def normalized(self) -> "WeightVector":
        total = self.w_time + self.w_cost + self.w_util
        if total <= 0:
            raise ValueError("cannot normalize all-zero weights")
        return WeightVector(self.w_time / total, self.w_cost / total, self.w_util / total)


def base_weights(mode: PreferenceMode) -> WeightVector:
    """Starting weights for a preference mode; already sum to one."""
    return WeightVector(*BASE_WEIGHTS[mode])


def aggregate_severities(compliance: ComplianceVector,
                         groups: tuple[tuple[int, ...], ...] = SEVERITY_GROUPS) -> tuple[float, float, float]:
    """Collapse six per-dimension severities onto the three objectives."""
    if len(groups) != 3:
        raise ValueError("severity aggregation needs exactly three groups")
    return tuple(max(compliance.severity[i] for i in group) for group in groups)  # type: ignore[return-value]


def adapt_weights(base: WeightVector, compliance: ComplianceVector,
                  alpha: float = DEFAULT_ADAPTATION_RATE,
                  groups: tuple[tuple[int, ...], ...] = SEVERITY_GROUPS) -> WeightVector:
    """Shift weight toward violated objectives, then renormalize to sum 1.

    Each objective gains alpha times its aggregated severity; a fully
    compliant state returns the base weights unchanged.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    v_time, v_cost, v_util = aggregate_severities(compliance, groups)
    raised = WeightVector(
        base.w_time + alpha * v_time,
        base.w_cost + alpha * v_cost,
        base.w_util + alpha * v_util,
    )
    return raised.normalized()


@dataclass(frozen=True)
class RewardRefs:
    """Reference metrics that improvements are measured against."""

    throughput_sps: float
    hourly_cost_usd: float


def reward(
    prev: EpochMetrics | None,
    cur: EpochMetrics,
    weights: WeightVector,
    compliance: ComplianceVector,
    refs: RewardRefs | None = None,
    *,
    gpu_util_target: float = GPU_UTIL_SWEET_SPOT,
    cpu_util_target: float = CPU_UTIL_SWEET_SPOT,
    beta: float = DEFAULT_VIOLATION_PENALTY,
    clip: float = 1.0,
) -> float:
    """Scalar reward for the epoch that just ran.

    Time reward is relative throughput improvement over the reference and
    cost reward is relative hourly-cost reduction, both clamped to
    [-clip, clip]. Utilization rewards proximity to the device sweet spots.
    A violation penalty of beta times the summed aggregated severities is
    subtracted. When ``refs`` is None the previous epoch serves as the
    reference.
    """
    if refs is None:
        if prev is None:
            raise ConfigError("reward needs reference metrics or a previous epoch")
        refs = RewardRefs(throughput_sps=prev.throughput_sps, hourly_cost_usd=prev.hourly_cost_usd)
    if refs.throughput_sps <= 0:
        raise ConfigError(f"reference throughput must be positive, got {refs.throughput_sps}")
    if refs.hourly_cost_usd <= 0:
        raise ConfigError(f"reference hourly cost must be positive, got {refs.hourly_cost_usd}")

    r_time = clamp((cur.throughput_sps - refs.throughput_sps) / refs.throughput_sps, -clip, clip)
    r_cost = clamp((refs.hourly_cost_usd - cur.hourly_cost_usd) / refs.hourly_cost_usd, -clip, clip)
    r_util = 1.0 - (abs(cur.gpu_util - gpu_util_target) + abs(cur.cpu_util - cpu_util_target))
    penalty = beta * sum(aggregate_severities(compliance))
    return weights.w_time * r_time + weights.w_cost * r_cost + weights.w_util * r_util - penalty
