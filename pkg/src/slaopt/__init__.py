"""SLA-aware multi-objective resource optimizer for ML training jobs.

The package pairs an actor-critic allocation agent with a simulated
cluster so the whole optimization loop runs without real hardware:

- cluster_sim: cost, epoch-time, memory, and utilization models
- sla_monitor: compliance evaluation and the change-detection gate
- adaptive_reward: preference weights, severity-adaptive scalarization
- agent: numpy actor-critic networks, replay buffer, Adam updates
- initialization: warm starting from history logs or baseline probes
- orchestrator: the online loop, Pareto front, and method variants
- reporting: run summaries, compliance reports, recommendations
- cli: the `slaopt` command (run / bench / report / recommend)
"""

from .adaptive_reward import WeightVector, adapt_weights, aggregate_severities, base_weights, reward
from .agent import ActorCriticAgent, ReplayBuffer, Transition
from .cluster_sim import (
    CostRates,
    EpochMetrics,
    SimState,
    WorkloadSpec,
    allocated_memory,
    batch_size,
    epoch_time,
    hourly_cost,
    predicted_metrics,
    scaled_workload,
    step_epoch,
)
from .domain import (
    Action,
    ComplianceVector,
    PreferenceMode,
    ResourceBounds,
    ResourceConfig,
    SLASpec,
    StateVector,
    action_from_index,
    apply_action,
    flatten_state,
)
from .errors import ConfigError, JobComplete, LogParseError, SLASpecError
from .initialization import InitMode, LogRow, initialize, read_history, write_history
from .orchestrator import (
    Method,
    ParetoPoint,
    RunConfig,
    RunResult,
    pareto_front,
    run,
    select_configuration,
)
from .reporting import Recommendation, Report, RunSummary, build_report, recommend, render_report
from .sla_monitor import change_detected, evaluate_compliance, project_totals

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ActorCriticAgent",
    "ComplianceVector",
    "ConfigError",
    "CostRates",
    "EpochMetrics",
    "InitMode",
    "JobComplete",
    "LogParseError",
    "LogRow",
    "Method",
    "ParetoPoint",
    "PreferenceMode",
    "Recommendation",
    "ReplayBuffer",
    "Report",
    "ResourceBounds",
    "ResourceConfig",
    "RunConfig",
    "RunResult",
    "RunSummary",
    "SLASpec",
    "SLASpecError",
    "SimState",
    "StateVector",
    "Transition",
    "WeightVector",
    "WorkloadSpec",
    "action_from_index",
    "adapt_weights",
    "aggregate_severities",
    "allocated_memory",
    "apply_action",
    "base_weights",
    "batch_size",
    "build_report",
    "change_detected",
    "epoch_time",
    "evaluate_compliance",
    "flatten_state",
    "hourly_cost",
    "initialize",
    "pareto_front",
    "predicted_metrics",
    "project_totals",
    "read_history",
    "recommend",
    "render_report",
    "reward",
    "run",
    "scaled_workload",
    "select_configuration",
    "step_epoch",
    "write_history",
    "__version__",
]
