"""Warm-start phase: seed the agent and starting allocation before optimizing.

Three paths, in decreasing order of prior knowledge:

* from_logs: replay historical run logs into critic pretraining and pick
  the best logged allocation for this preference.
* baseline_runs: probe three spread-out allocations with short runs on a
  data subset, extrapolate full-run behavior, and start from the winner.
* skip: no prior knowledge; start small and explore more aggressively.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .adaptive_reward import CPU_UTIL_SWEET_SPOT, GPU_UTIL_SWEET_SPOT, WeightVector, base_weights
from .agent import ActorCriticAgent
from .cluster_sim import (
    CostRates,
    DEFAULT_RATES,
    SimState,
    WorkloadSpec,
    scaled_workload,
    step_epoch,
)
from .domain import (
    DEFAULT_BOUNDS,
    NO_OP_ACTION,
    ExecutionRecord,
    PreferenceMode,
    ResourceBounds,
    ResourceConfig,
    SLASpec,
    StateVector,
    clamp,
    flatten_state,
)
from .errors import ConfigError, LogParseError

logger = logging.getLogger(__name__)

# Column order of the historical run-log CSV. This header is a stable
# interface: logs written after any run can seed later runs.
HISTORY_HEADER = (
    "model_id,dataset_size,epoch,gpus,cpus,epoch_time_s,hourly_cost_usd,"
    "cumulative_cost_usd,throughput_sps,gpu_util,cpu_util,memory_gb_used,reward"
)

# Probe allocations for baseline_runs: one small, one medium, one large.
BASELINE_PROBE_CONFIGS = (
    ResourceConfig(1, 1),
    ResourceConfig(2, 4),
    ResourceConfig(4, 8),
)
PROBE_EPOCH_FRACTION = 0.1
PROBE_DATA_FRACTION = 0.2
# Extrapolation factor from a probe on the data subset to the full dataset.
FULL_RUN_SCALE = 1.0 / PROBE_DATA_FRACTION

STARTING_EPSILON = {"skip": 0.3, "from_logs": 0.1, "baseline_runs": 0.2}
SKIP_START_CONFIG = ResourceConfig(1, 2)


class InitMode(Enum):
    SKIP = "skip"
    FROM_LOGS = "from_logs"
    BASELINE_RUNS = "baseline_runs"


@dataclass(frozen=True)
class LogRow:
    """One epoch from a historical run log."""

    model_id: str
    dataset_size: int
    epoch: int
    gpus: int
    cpus: int
    epoch_time_s: float
    hourly_cost_usd: float
    cumulative_cost_usd: float
    throughput_sps: float
    gpu_util: float
    cpu_util: float
    memory_gb_used: float
    reward: float


@dataclass(frozen=True)
class BaselineEstimate:
    """Full-run projections extrapolated from one probe run."""

    est_epoch_time_s: float
    est_throughput_sps: float
    est_hourly_cost_usd: float
    est_total_time_s: float
    est_total_cost_usd: float
    gpu_util: float
    cpu_util: float
    probe_epochs: int
    probe_data_fraction: float


@dataclass(frozen=True)
class InitOutcome:
    """What the warm-start phase decided."""

    mode: InitMode
    initial_config: ResourceConfig
    epsilon0: float
    pretrained: bool
    baseline_estimates: dict[ResourceConfig, BaselineEstimate] | None = None
    pretrain_mse: float | None = None


# ---------------- historical logs ----------------


def read_history(path: str | Path) -> list[LogRow]:
    """Parse a run-log CSV; any structural problem names the offending row."""
    path = Path(path)
    rows: list[LogRow] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise LogParseError(f"{path}: empty log file") from None
        if ",".join(header) != HISTORY_HEADER:
            raise LogParseError(f"{path}: unexpected header {','.join(header)!r}")
        for line_no, raw in enumerate(reader, start=2):
            if len(raw) != 13:
                raise LogParseError(f"{path}: row {line_no} has {len(raw)} fields, expected 13")
            try:
                rows.append(LogRow(
                    model_id=raw[0],
                    dataset_size=int(raw[1]),
                    epoch=int(raw[2]),
                    gpus=int(raw[3]),
                    cpus=int(raw[4]),
                    epoch_time_s=float(raw[5]),
                    hourly_cost_usd=float(raw[6]),
                    cumulative_cost_usd=float(raw[7]),
                    throughput_sps=float(raw[8]),
                    gpu_util=float(raw[9]),
                    cpu_util=float(raw[10]),
                    memory_gb_used=float(raw[11]),
                    reward=float(raw[12]),
                ))
            except ValueError as exc:
                raise LogParseError(f"{path}: row {line_no}: {exc}") from None
    return rows


def write_history(path: str | Path, records: Iterable[ExecutionRecord],
                  workload: WorkloadSpec) -> None:
    """Write trace records in the run-log schema so later runs can reuse them."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(HISTORY_HEADER + "\n")
        writer = csv.writer(fh)
        for rec in records:
            writer.writerow([
                workload.name, workload.dataset_size, rec.epoch, rec.gpus, rec.cpus,
                repr(rec.epoch_time_s), repr(rec.hourly_cost_usd), repr(rec.cumulative_cost_usd),
                repr(rec.throughput_sps), repr(rec.gpu_util), repr(rec.cpu_util),
                repr(rec.memory_gb_used), repr(rec.reward),
            ])


def rows_from_records(records: Iterable[ExecutionRecord], workload: WorkloadSpec) -> list[LogRow]:
    """In-memory equivalent of writing and re-reading a history file."""
    return [
        LogRow(
            model_id=workload.name, dataset_size=workload.dataset_size, epoch=rec.epoch,
            gpus=rec.gpus, cpus=rec.cpus, epoch_time_s=rec.epoch_time_s,
            hourly_cost_usd=rec.hourly_cost_usd, cumulative_cost_usd=rec.cumulative_cost_usd,
            throughput_sps=rec.throughput_sps, gpu_util=rec.gpu_util, cpu_util=rec.cpu_util,
            memory_gb_used=rec.memory_gb_used, reward=rec.reward,
        )
        for rec in records
    ]


def extract_patterns(logs: Sequence[LogRow], mode: PreferenceMode,
                     bounds: ResourceBounds = DEFAULT_BOUNDS) -> list[tuple[np.ndarray, int, float]]:
    """Turn log rows into (state, action, scalarized return) training rows.

    The state is rebuilt from each row's allocation, utilization, and
    progress; compliance components are taken as neutral (met) and the
    preference one-hot reflects the requesting mode. The return scalarizes
    throughput gain, hourly-cost reduction, and utilization fit against the
    log's first row under the mode's base weights. Rows with non-finite
    numeric fields are skipped with a counted warning.
    """
    finite_rows = []
    skipped = 0
    for row in logs:
        values = (row.epoch_time_s, row.hourly_cost_usd, row.cumulative_cost_usd,
                  row.throughput_sps, row.gpu_util, row.cpu_util, row.memory_gb_used, row.reward)
        if all(math.isfinite(v) for v in values):
            finite_rows.append(row)
        else:
            skipped += 1
    if skipped:
        logger.warning("extract_patterns: skipped %d rows with non-finite fields", skipped)
    if not finite_rows:
        return []

    first = finite_rows[0]
    if first.throughput_sps <= 0 or first.hourly_cost_usd <= 0:
        raise ConfigError("log reference row must have positive throughput and cost")
    weights = base_weights(mode)
    max_epoch = max(r.epoch for r in finite_rows)
    max_thr = max(r.throughput_sps for r in finite_rows)

    dataset: list[tuple[np.ndarray, int, float]] = []
    for row in finite_rows:
        state = StateVector(
            resources=(clamp(row.gpus / bounds.g_max, 0.0, 1.0), clamp(row.cpus / bounds.c_max, 0.0, 1.0)),
            utilization=(clamp(row.gpu_util, 0.0, 1.0), clamp(row.cpu_util, 0.0, 1.0)),
            progress=(
                clamp(row.epoch / max_epoch, 0.0, 1.0) if max_epoch > 0 else 0.0,
                clamp(row.throughput_sps / max_thr, 0.0, 1.0) if max_thr > 0 else 0.0,
            ),
            compliance=(1.0,) * 6,
            violations=(0.0,) * 6,
            preference=mode.one_hot(),
        )
        r_time = clamp((row.throughput_sps - first.throughput_sps) / first.throughput_sps, -1.0, 1.0)
        r_cost = clamp((first.hourly_cost_usd - row.hourly_cost_usd) / first.hourly_cost_usd, -1.0, 1.0)
        r_util = 1.0 - (abs(row.gpu_util - GPU_UTIL_SWEET_SPOT) + abs(row.cpu_util - CPU_UTIL_SWEET_SPOT))
        value = weights.w_time * r_time + weights.w_cost * r_cost + weights.w_util * r_util
        dataset.append((flatten_state(state), NO_OP_ACTION, value))
    return dataset


# ---------------- config scoring ----------------


def preference_scores(times: Sequence[float], costs: Sequence[float], utils: Sequence[float],
                      weights: WeightVector) -> list[float]:
    """Score candidate configs: higher is better under the given weights.

    Times and costs are min-max normalized over the candidates (lower is
    better); utilization is normalized with higher as better. A degenerate
    metric (all candidates equal) contributes nothing to the ordering.
    """
    def norm(values: Sequence[float]) -> list[float]:
        lo, hi = min(values), max(values)
        if hi <= lo:
            return [0.0] * len(values)
        return [(v - lo) / (hi - lo) for v in values]

    t_norm, c_norm, u_norm = norm(times), norm(costs), norm(utils)
    return [
        weights.w_time * (1.0 - t) + weights.w_cost * (1.0 - c) + weights.w_util * u
        for t, c, u in zip(t_norm, c_norm, u_norm)
    ]


def best_historical_config(logs: Sequence[LogRow], mode: PreferenceMode,
                           bounds: ResourceBounds = DEFAULT_BOUNDS) -> ResourceConfig:
    """Pick the logged allocation with the best preference score.

    Rows are grouped by allocation and averaged; a config that dominates on
    every metric wins under any preference.
    """
    groups: dict[tuple[int, int], list[LogRow]] = {}
    for row in logs:
        if 1 <= row.gpus <= bounds.g_max and 1 <= row.cpus <= bounds.c_max:
            groups.setdefault((row.gpus, row.cpus), []).append(row)
    if not groups:
        raise ConfigError("no log rows fall within the allocation bounds")

    configs = sorted(groups)
    times = [float(np.mean([r.epoch_time_s for r in groups[c]])) for c in configs]
    costs = [float(np.mean([r.hourly_cost_usd for r in groups[c]])) for c in configs]
    utils = [float(np.mean([(r.gpu_util + r.cpu_util) / 2 for r in groups[c]])) for c in configs]
    scores = preference_scores(times, costs, utils, base_weights(mode))
    best = configs[int(np.argmax(scores))]
    return ResourceConfig(*best)


# ---------------- baseline probes ----------------


def estimate_from_baseline(probe_metrics_time_s: float, probe_throughput_sps: float,
                           gpu_util: float, cpu_util: float, config: ResourceConfig,
                           workload: WorkloadSpec, probe_epochs: int,
                           rates: CostRates = DEFAULT_RATES) -> BaselineEstimate:
    """Extrapolate full-run behavior from a probe on the data subset.

    The probe ran on a fixed fraction of the data, so a full epoch takes
    1/fraction times as long. Throughput is a rate and carries over
    unchanged.
    """
    est_epoch = probe_metrics_time_s * FULL_RUN_SCALE
    est_total_time = est_epoch * workload.total_epochs
    cost_per_hour = config.gpus * rates.gpu_hourly_usd + config.cpus * rates.cpu_hourly_usd
    return BaselineEstimate(
        est_epoch_time_s=est_epoch,
        est_throughput_sps=probe_throughput_sps,
        est_hourly_cost_usd=cost_per_hour,
        est_total_time_s=est_total_time,
        est_total_cost_usd=cost_per_hour * est_total_time / 3600.0,
        gpu_util=gpu_util,
        cpu_util=cpu_util,
        probe_epochs=probe_epochs,
        probe_data_fraction=PROBE_DATA_FRACTION,
    )


def run_baseline_probes(workload: WorkloadSpec, seed: int,
                        rates: CostRates = DEFAULT_RATES) -> dict[ResourceConfig, BaselineEstimate]:
    """Short probe runs over the three spread-out allocations."""
    probe_epochs = max(1, math.ceil(PROBE_EPOCH_FRACTION * workload.total_epochs))
    probe_workload = scaled_workload(workload, PROBE_DATA_FRACTION, probe_epochs)
    estimates: dict[ResourceConfig, BaselineEstimate] = {}
    for i, config in enumerate(BASELINE_PROBE_CONFIGS):
        state = SimState(rng_seed=seed * 1009 + i)
        samples = []
        for _ in range(probe_epochs):
            state, metrics = step_epoch(state, config, probe_workload, rates)
            samples.append(metrics)
        estimates[config] = estimate_from_baseline(
            probe_metrics_time_s=float(np.mean([m.epoch_time_s for m in samples])),
            probe_throughput_sps=float(np.mean([m.throughput_sps for m in samples])),
            gpu_util=float(np.mean([m.gpu_util for m in samples])),
            cpu_util=float(np.mean([m.cpu_util for m in samples])),
            config=config, workload=workload, probe_epochs=probe_epochs, rates=rates,
        )
    return estimates


def select_baseline_config(estimates: dict[ResourceConfig, BaselineEstimate],
                           mode: PreferenceMode) -> ResourceConfig:
    """Best probed allocation under the preference's base weights."""
    configs = sorted(estimates, key=lambda c: (c.gpus, c.cpus))
    times = [estimates[c].est_total_time_s for c in configs]
    costs = [estimates[c].est_total_cost_usd for c in configs]
    utils = [(estimates[c].gpu_util + estimates[c].cpu_util) / 2 for c in configs]
    scores = preference_scores(times, costs, utils, base_weights(mode))
    return configs[int(np.argmax(scores))]


# ---------------- entry point ----------------


def initialize(
    mode: InitMode,
    workload: WorkloadSpec,
    sla: SLASpec,
    agent: ActorCriticAgent | None = None,
    logs: Sequence[LogRow] | None = None,
    bounds: ResourceBounds = DEFAULT_BOUNDS,
    rates: CostRates = DEFAULT_RATES,
    seed: int = 0,
    pretrain_epochs: int = 40,
) -> InitOutcome:
    """Run the chosen warm-start path and report the starting point.

    from_logs requires log rows and an agent to pretrain; baseline_runs
    charges three probe runs; skip is free and starts at one GPU with two
    cores.
    """
    if mode is InitMode.SKIP:
        return InitOutcome(mode=mode, initial_config=SKIP_START_CONFIG,
                           epsilon0=STARTING_EPSILON["skip"], pretrained=False)

    if mode is InitMode.FROM_LOGS:
        if not logs:
            raise ConfigError("from_logs initialization needs historical log rows")
        dataset = extract_patterns(logs, sla.mode, bounds)
        if not dataset:
            raise ConfigError("historical log contained no usable rows")
        mse = None
        pretrained = False
        if agent is not None:
            mse = agent.pretrain_critic(dataset, epochs=pretrain_epochs)
            pretrained = True
        config = best_historical_config(logs, sla.mode, bounds)
        return InitOutcome(mode=mode, initial_config=config,
                           epsilon0=STARTING_EPSILON["from_logs"], pretrained=pretrained,
                           pretrain_mse=mse)

    estimates = run_baseline_probes(workload, seed, rates)
    config = select_baseline_config(estimates, sla.mode)
    return InitOutcome(mode=mode, initial_config=config,
                       epsilon0=STARTING_EPSILON["baseline_runs"], pretrained=False,
                       baseline_estimates=estimates)
