"""Simulated single-node GPU cluster.

Closed-form cost and scaling models stand in for real hardware so every
optimization path runs deterministically on a laptop. Epoch time follows a
diminishing-returns speedup in GPUs and a logarithmic benefit from CPU
cores; cost accrues per wall-clock hour of the current allocation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .domain import ResourceConfig, clamp
from .errors import JobComplete

# Per-hour prices and memory footprint per allocated unit.
GPU_HOURLY_USD = 5.0
CPU_HOURLY_USD = 0.5
MEM_PER_GPU_GB = 8.0
MEM_PER_CPU_GB = 1.0

# Per-GPU batch sizing used by the memory model.
BATCH_PER_GPU = 64
BATCH_MIN = 32
BATCH_MAX = 512


@dataclass(frozen=True)
class CostRates:
    """Hourly prices for one GPU and one CPU core."""

    gpu_hourly_usd: float = GPU_HOURLY_USD
    cpu_hourly_usd: float = CPU_HOURLY_USD


DEFAULT_RATES = CostRates()


@dataclass(frozen=True)
class WorkloadSpec:
    """A training job to be simulated.

    ``t_base_s`` is the wall-clock seconds one epoch takes on a single GPU
    with a single CPU core over the full dataset. ``gpu_intensity`` and
    ``cpu_intensity`` describe how much of one device the job can keep busy.
    """

    name: str
    t_base_s: float
    total_epochs: int
    dataset_size: int
    gpu_intensity: float = 0.9
    cpu_intensity: float = 0.85
    model_mem_gb: float = 2.0
    per_sample_mem_mb: float = 4.0
    noise_sigma: float = 0.05

    def __post_init__(self) -> None:
        if self.t_base_s <= 0:
            raise ValueError(f"t_base_s must be positive, got {self.t_base_s}")
        if self.total_epochs < 1:
            raise ValueError(f"total_epochs must be >= 1, got {self.total_epochs}")
        if self.dataset_size < 1:
            raise ValueError(f"dataset_size must be >= 1, got {self.dataset_size}")
        for field_name in ("gpu_intensity", "cpu_intensity"):
            value = getattr(self, field_name)
            if not 0 < value <= 1:
                raise ValueError(f"{field_name} must be in (0, 1], got {value}")
        if self.model_mem_gb < 0 or self.per_sample_mem_mb < 0:
            raise ValueError("memory parameters must be non-negative")
        # Noise is truncated at three sigmas; this bound keeps epoch times positive.
        if not 0 <= self.noise_sigma < 1 / 3:
            raise ValueError(f"noise_sigma must be in [0, 1/3), got {self.noise_sigma}")


@dataclass(frozen=True)
class EpochMetrics:
    """Measurements reported by the cluster after one epoch."""

    epoch_time_s: float
    throughput_sps: float
    gpu_util: float
    cpu_util: float
    memory_used_gb: float
    memory_alloc_gb: float
    hourly_cost_usd: float


@dataclass(frozen=True)
class SimState:
    """Progress of one simulated run; updated functionally by step_epoch."""

    epoch_completed: int = 0
    elapsed_s: float = 0.0
    spent_usd: float = 0.0
    last_metrics: EpochMetrics | None = None
    rng_seed: int = 0


def gpu_speedup(gpus: int) -> float:
    """Diminishing-returns multi-GPU scaling: 1.0, 1.8, 2.6, 3.4, ..."""
    return 1.0 + 0.8 * (gpus - 1)


def cpu_benefit(cpus: int) -> float:
    """Logarithmic data-pipeline benefit from extra CPU cores."""
    return 1.0 + 0.1 * math.log2(cpus)


def hourly_cost(config: ResourceConfig, rates: CostRates = DEFAULT_RATES) -> float:
    """Price of holding an allocation for one hour."""
    return config.gpus * rates.gpu_hourly_usd + config.cpus * rates.cpu_hourly_usd


def epoch_time(config: ResourceConfig, workload: WorkloadSpec) -> float:
    """Noiseless seconds per epoch under the given allocation."""
    return workload.t_base_s / (gpu_speedup(config.gpus) * cpu_benefit(config.cpus))


def allocated_memory(config: ResourceConfig, per_gpu_gb: float = MEM_PER_GPU_GB,
                     per_cpu_gb: float = MEM_PER_CPU_GB) -> float:
    """GB of memory that comes with an allocation."""
    return per_gpu_gb * config.gpus + per_cpu_gb * config.cpus


def batch_size(config: ResourceConfig) -> int:
    """Effective batch size: scales with GPUs, clamped to supported range."""
    return int(clamp(BATCH_PER_GPU * config.gpus, BATCH_MIN, BATCH_MAX))


def memory_used(config: ResourceConfig, workload: WorkloadSpec) -> float:
    """GB actually consumed: model weights plus the in-flight batch."""
    return workload.model_mem_gb + workload.per_sample_mem_mb * batch_size(config) / 1024.0


def _utilization(intensity: float, units: int, noise: float) -> float:
    # One busy device saturates; extra units dilute utilization as 1/sqrt(n).
    return clamp(intensity / math.sqrt(units) + noise, 0.0, 1.0)


def predicted_metrics(config: ResourceConfig, workload: WorkloadSpec,
                      rates: CostRates = DEFAULT_RATES) -> EpochMetrics:
    """Noiseless metrics for one epoch; used for planning and bootstrapping."""
    t = epoch_time(config, workload)
    return EpochMetrics(
        epoch_time_s=t,
        throughput_sps=workload.dataset_size / t,
        gpu_util=_utilization(workload.gpu_intensity, config.gpus, 0.0),
        cpu_util=_utilization(workload.cpu_intensity, config.cpus, 0.0),
        memory_used_gb=memory_used(config, workload),
        memory_alloc_gb=allocated_memory(config),
        hourly_cost_usd=hourly_cost(config, rates),
    )


def step_epoch(state: SimState, config: ResourceConfig, workload: WorkloadSpec,
               rates: CostRates = DEFAULT_RATES) -> tuple[SimState, EpochMetrics]:
    """Advance the job by one epoch under ``config``.

    Noise draws are seeded by (state.rng_seed, epoch index), so a run is
    reproducible regardless of how the caller interleaves decisions, and
    noiseless runs (sigma = 0) are bit-identical across repeats.
    """
    if state.epoch_completed >= workload.total_epochs:
        raise JobComplete(f"workload {workload.name!r} already ran {workload.total_epochs} epochs")

    rng = np.random.default_rng([state.rng_seed, state.epoch_completed])
    sigma = workload.noise_sigma
    draws = rng.normal(0.0, sigma, size=3) if sigma > 0 else np.zeros(3)
    eps_time, eps_gpu, eps_cpu = (float(x) for x in np.clip(draws, -3.0 * sigma, 3.0 * sigma))

    t = epoch_time(config, workload) * (1.0 + eps_time)
    metrics = EpochMetrics(
        epoch_time_s=t,
        throughput_sps=workload.dataset_size / t,
        gpu_util=_utilization(workload.gpu_intensity, config.gpus, eps_gpu),
        cpu_util=_utilization(workload.cpu_intensity, config.cpus, eps_cpu),
        memory_used_gb=memory_used(config, workload),
        memory_alloc_gb=allocated_memory(config),
        hourly_cost_usd=hourly_cost(config, rates),
    )
    new_state = replace(
        state,
        epoch_completed=state.epoch_completed + 1,
        elapsed_s=state.elapsed_s + t,
        spent_usd=state.spent_usd + metrics.hourly_cost_usd * t / 3600.0,
        last_metrics=metrics,
    )
    return new_state, metrics


def scaled_workload(workload: WorkloadSpec, data_fraction: float, epochs: int) -> WorkloadSpec:
    """Shrink a workload for probe runs: fewer epochs on a data subset.

    Epoch time is linear in data size, so t_base scales with the fraction.
    """
    if not 0 < data_fraction <= 1:
        raise ValueError(f"data_fraction must be in (0, 1], got {data_fraction}")
    return replace(
        workload,
        t_base_s=workload.t_base_s * data_fraction,
        dataset_size=max(1, int(round(workload.dataset_size * data_fraction))),
        total_epochs=epochs,
    )
