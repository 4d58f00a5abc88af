"""Core value types: resource allocations, actions, SLA specs, agent state.

Everything here is a plain immutable value with explicit validation; the
simulator, monitor, and agent modules all build on these.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import SLASpecError

# Default single-node limits: 4 GPUs, 40 CPU cores.
DEFAULT_G_MAX = 4
DEFAULT_C_MAX = 40

STATE_DIM = 21
N_ACTIONS = 9
NO_OP_ACTION = 4  # (delta_gpu, delta_cpu) == (0, 0)

# Fixed ordering of the six tracked SLA dimensions.
SLA_DIMENSIONS = ("time", "cost", "throughput", "memory", "gpu_util", "cpu_util")


def clamp(x: float, lo: float, hi: float) -> float:
    """Clamp ``x`` into the closed interval [lo, hi]."""
    return lo if x < lo else hi if x > hi else x


@dataclass(frozen=True)
class ResourceBounds:
    """Inclusive per-job allocation limits."""

    g_max: int = DEFAULT_G_MAX
    c_max: int = DEFAULT_C_MAX

    def __post_init__(self) -> None:
        if self.g_max < 1 or self.c_max < 1:
            raise ValueError(f"bounds must be >= 1, got ({self.g_max}, {self.c_max})")


DEFAULT_BOUNDS = ResourceBounds()


@dataclass(frozen=True)
class ResourceConfig:
    """A concrete allocation of whole GPUs and CPU cores."""

    gpus: int
    cpus: int

    def __post_init__(self) -> None:
        if self.gpus < 1 or self.cpus < 1:
            raise ValueError(f"allocation must be >= 1 GPU and 1 CPU, got ({self.gpus}, {self.cpus})")

    def within(self, bounds: ResourceBounds) -> bool:
        return self.gpus <= bounds.g_max and self.cpus <= bounds.c_max


@dataclass(frozen=True)
class Action:
    """One discrete reallocation step: each delta is -1, 0, or +1."""

    delta_gpu: int
    delta_cpu: int

    def __post_init__(self) -> None:
        if self.delta_gpu not in (-1, 0, 1) or self.delta_cpu not in (-1, 0, 1):
            raise ValueError(f"deltas must be in {{-1, 0, 1}}, got ({self.delta_gpu}, {self.delta_cpu})")


def action_from_index(index: int) -> Action:
    """Decode a flat action index (0..8), GPU delta in the outer position.

    Index 0 is (-1, -1), index 4 is (0, 0), index 8 is (+1, +1).
    """
    if not 0 <= index < N_ACTIONS:
        raise ValueError(f"action index out of range: {index}")
    return Action(index // 3 - 1, index % 3 - 1)


def action_to_index(action: Action) -> int:
    """Inverse of :func:`action_from_index`."""
    return (action.delta_gpu + 1) * 3 + (action.delta_cpu + 1)


def apply_action(config: ResourceConfig, action: Action, bounds: ResourceBounds = DEFAULT_BOUNDS) -> ResourceConfig:
    """Apply a reallocation step, clamping at the allocation limits.

    A boundary-crossing delta is silently clamped rather than rejected, so
    the action space stays fixed at nine entries everywhere in the grid.
    """
    return ResourceConfig(
        gpus=int(clamp(config.gpus + action.delta_gpu, 1, bounds.g_max)),
        cpus=int(clamp(config.cpus + action.delta_cpu, 1, bounds.c_max)),
    )


class PreferenceMode(Enum):
    """Which objective the user cares about most."""

    TIME = "time"
    COST = "cost"
    BALANCED = "balanced"

    @classmethod
    def from_string(cls, text: str) -> "PreferenceMode":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise SLASpecError(f"unknown preference mode: {text!r} (expected time, cost, or balanced)") from None

    def one_hot(self) -> tuple[float, float, float]:
        order = (PreferenceMode.TIME, PreferenceMode.COST, PreferenceMode.BALANCED)
        return tuple(1.0 if self is m else 0.0 for m in order)  # type: ignore[return-value]


@dataclass(frozen=True)
class SLASpec:
    """User service-level targets. Any target may be omitted (None).

    Units: time in minutes (judged on the projected total), cost in USD
    (projected total), throughput in samples/s, memory in GB, utilizations
    as fractions in (0, 1].
    """

    mode: PreferenceMode
    time_target_min: float | None = None
    cost_target_usd: float | None = None
    throughput_target_sps: float | None = None
    memory_target_gb: float | None = None
    gpu_util_target: float | None = None
    cpu_util_target: float | None = None

    def __post_init__(self) -> None:
        for name in ("time_target_min", "cost_target_usd", "throughput_target_sps", "memory_target_gb"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise SLASpecError(f"{name} must be positive, got {value}")
        for name in ("gpu_util_target", "cpu_util_target"):
            value = getattr(self, name)
            if value is not None and not 0 < value <= 1:
                raise SLASpecError(f"{name} must be in (0, 1], got {value}")


@dataclass(frozen=True)
class ComplianceVector:
    """Met/violated flags plus violation severities for the six dimensions.

    ``met`` and ``severity`` follow :data:`SLA_DIMENSIONS` order. A met
    dimension always carries severity 0; severities live in [0, 1].
    """

    met: tuple[bool, bool, bool, bool, bool, bool]
    severity: tuple[float, float, float, float, float, float]

    def __post_init__(self) -> None:
        if len(self.met) != 6 or len(self.severity) != 6:
            raise ValueError("compliance vector must cover exactly six dimensions")
        for dim, (ok, sev) in enumerate(zip(self.met, self.severity)):
            if not 0.0 <= sev <= 1.0:
                raise ValueError(f"severity[{dim}] out of [0, 1]: {sev}")
            if ok and sev != 0.0:
                raise ValueError(f"met dimension {SLA_DIMENSIONS[dim]} must have zero severity, got {sev}")

    @property
    def all_met(self) -> bool:
        return all(self.met)

    def flags(self) -> tuple[float, ...]:
        return tuple(1.0 if ok else 0.0 for ok in self.met)


FULLY_COMPLIANT = ComplianceVector(met=(True,) * 6, severity=(0.0,) * 6)


@dataclass(frozen=True)
class StateVector:
    """Normalized observation fed to the agent.

    Components, in flattened order:
      resources (2)   - GPU and CPU allocation over their limits
      utilization (2) - measured GPU and CPU utilization
      progress (2)    - epoch progress and normalized throughput
      compliance (6)  - met flags as 0/1
      violations (6)  - violation severities
      preference (3)  - one-hot preference mode
    """

    resources: tuple[float, float]
    utilization: tuple[float, float]
    progress: tuple[float, float]
    compliance: tuple[float, ...]
    violations: tuple[float, ...]
    preference: tuple[float, float, float]

    def __post_init__(self) -> None:
        if len(self.compliance) != 6 or len(self.violations) != 6:
            raise ValueError("compliance and violations must have six entries each")
        for group_name, group in (
            ("resources", self.resources),
            ("utilization", self.utilization),
            ("progress", self.progress),
            ("compliance", self.compliance),
            ("violations", self.violations),
            ("preference", self.preference),
        ):
            for value in group:
                if not 0.0 <= value <= 1.0:
                    raise ValueError(f"state component {group_name} out of [0, 1]: {value}")


def flatten_state(state: StateVector) -> np.ndarray:
    """Concatenate the state components into a length-21 float vector."""
    return np.array(
        state.resources + state.utilization + state.progress
        + state.compliance + state.violations + state.preference,
        dtype=np.float64,
    )


def parse_state(vector: np.ndarray) -> StateVector:
    """Rebuild a :class:`StateVector` from its flattened form."""
    flat = np.asarray(vector, dtype=np.float64).reshape(-1)
    if flat.shape[0] != STATE_DIM:
        raise ValueError(f"state vector must have {STATE_DIM} entries, got {flat.shape[0]}")
    as_floats = tuple(float(x) for x in flat)
    return StateVector(
        resources=as_floats[0:2],
        utilization=as_floats[2:4],
        progress=as_floats[4:6],
        compliance=as_floats[6:12],
        violations=as_floats[12:18],
        preference=as_floats[18:21],
    )


@dataclass(frozen=True)
class ExecutionRecord:
    """One trace row: the observable outcome of a single simulated epoch."""

    step_index: int
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
    weights: tuple[float, float, float]
    compliance: tuple[bool, ...]
    severities: tuple[float, ...]
    action_index: int
