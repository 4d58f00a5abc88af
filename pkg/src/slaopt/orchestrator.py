"""End-to-end run orchestration: warm start, online episodes, Pareto selection.

A run executes one workload under one SLA spec with one of seven methods,
replaying the workload for a number of episodes while the agent (if any)
keeps its networks, replay buffer, and exploration rate across episodes.
Each episode yields one (total time, total cost) outcome; the Pareto front
over episodes is extracted and a final configuration picked per the
user's preference.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .adaptive_reward import (
    RewardRefs,
    WeightVector,
    adapt_weights,
    base_weights,
    reward,
)
from .agent import ActorCriticAgent, Transition
from .cluster_sim import (
    CostRates,
    DEFAULT_RATES,
    EpochMetrics,
    SimState,
    WorkloadSpec,
    epoch_time,
    hourly_cost,
    predicted_metrics,
    step_epoch,
)
from .domain import (
    DEFAULT_BOUNDS,
    NO_OP_ACTION,
    ComplianceVector,
    ExecutionRecord,
    ResourceBounds,
    ResourceConfig,
    SLASpec,
    StateVector,
    action_from_index,
    apply_action,
    clamp,
    flatten_state,
)
from .errors import ConfigError
from .initialization import (
    InitMode,
    InitOutcome,
    LogRow,
    initialize,
    preference_scores,
)
from .domain import PreferenceMode
from .reporting import Report, RunSummary, build_report, recommend
from .sla_monitor import change_detected, evaluate_compliance, project_totals

TRACE_HEADER = (
    "step_index,epoch,gpus,cpus,epoch_time_s,hourly_cost_usd,cumulative_cost_usd,"
    "throughput_sps,gpu_util,cpu_util,memory_gb_used,reward,w_time,w_cost,w_util,"
    "met_time,met_cost,met_throughput,met_memory,met_gpu_util,met_cpu_util,"
    "sev_time,sev_cost,sev_throughput,sev_memory,sev_gpu_util,sev_cpu_util,action_index"
)
PARETO_HEADER = "total_time_s,total_cost_usd,sla_compliant"


class Method(Enum):
    """Run modes, from the fixed reference to the fully adaptive optimizer."""

    BASIC = "basic"            # fixed one-GPU allocation, no optimization
    STATIC_RECOM = "static_recom"  # one-shot model-based pick, held fixed
    LITE = "lite"              # online greedy heuristic, no learning
    SKIP = "skip"              # actor-critic with no warm start
    BASE_RUNS = "base_runs"    # actor-critic warm-started by probe runs
    WITH_TARGET_LOGS = "with_target_logs"  # actor-critic warm-started from logs
    FULL = "full"              # logs when available, probe runs otherwise

    @classmethod
    def from_string(cls, text: str) -> "Method":
        try:
            return cls(text.strip().lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ConfigError(f"unknown method {text!r} (expected one of: {choices})") from None


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one optimization run."""

    workload: WorkloadSpec
    sla: SLASpec
    method: Method = Method.FULL
    episodes: int = 10
    seed: int = 0
    bounds: ResourceBounds = DEFAULT_BOUNDS
    rates: CostRates = DEFAULT_RATES
    noiseless: bool = False
    tau_change: float = 0.1       # state-shift gate for taking an action
    alpha: float = 0.5            # violation-to-weight adaptation rate
    beta: float = 0.5             # violation penalty scale in the reward
    gamma: float = 0.95           # discount for the critic bootstrap
    adapt_weights_enabled: bool = True
    entropy_coef: float = 0.0
    reward_clip: float = 1.0
    gpu_util_target: float = 0.8
    cpu_util_target: float = 0.7
    pretrain_epochs: int = 40
    basic_cpus: int | None = None  # Basic reference CPU count; default all cores
    logs: tuple[LogRow, ...] | None = None
    initial_config: ResourceConfig | None = None  # override the warm-start pick
    checkpoint_in: str | None = None
    checkpoint_out: str | None = None

    def __post_init__(self) -> None:
        if self.episodes < 1:
            raise ConfigError(f"episodes must be >= 1, got {self.episodes}")
        if self.tau_change < 0 or self.alpha < 0 or self.beta < 0:
            raise ConfigError("tau_change, alpha, and beta must be non-negative")
        if not 0 < self.gamma <= 1:
            raise ConfigError(f"gamma must be in (0, 1], got {self.gamma}")


@dataclass(frozen=True)
class ParetoPoint:
    """One episode's outcome in objective space."""

    total_time_s: float
    total_cost_usd: float
    config: ResourceConfig
    sla_compliant: bool
    episode: int


@dataclass(frozen=True)
class EpisodeOutcome:
    """Objective point plus the final observables of one episode."""

    point: ParetoPoint
    final_metrics: EpochMetrics
    final_compliance: ComplianceVector
    final_config: ResourceConfig
    mean_reward: float
    decisions: int


@dataclass
class RunResult:
    """Everything a run produced."""

    config: RunConfig
    initial_config: ResourceConfig
    trace: list[ExecutionRecord]
    episodes: list[EpisodeOutcome]
    front: list[ParetoPoint]
    selected: EpisodeOutcome
    optimized_summary: RunSummary
    baseline_summary: RunSummary
    report: Report
    init_outcome: InitOutcome | None = None


class RunContext:
    """Shared per-run state threaded through the episode loop."""

    def __init__(self, cfg: RunConfig, workload: WorkloadSpec) -> None:
        self.cfg = cfg
        self.workload = workload
        self.bounds = cfg.bounds
        self.rates = cfg.rates
        self.sla = cfg.sla
        self.base_w = base_weights(cfg.sla.mode)
        self.refs: RewardRefs | None = None
        # Throughput ceiling used to normalize the state's throughput entry.
        top = ResourceConfig(cfg.bounds.g_max, cfg.bounds.c_max)
        self.throughput_cap = workload.dataset_size / epoch_time(top, workload)

    def build_state(self, metrics: EpochMetrics, sim: SimState, config: ResourceConfig,
                    compliance: ComplianceVector) -> StateVector:
        return StateVector(
            resources=(config.gpus / self.bounds.g_max, config.cpus / self.bounds.c_max),
            utilization=(metrics.gpu_util, metrics.cpu_util),
            progress=(
                sim.epoch_completed / self.workload.total_epochs,
                clamp(metrics.throughput_sps / self.throughput_cap, 0.0, 1.0),
            ),
            compliance=compliance.flags(),
            violations=compliance.severity,
            preference=self.sla.mode.one_hot(),
        )

    def evaluate(self, metrics: EpochMetrics, sim: SimState,
                 config: ResourceConfig) -> ComplianceVector:
        projected_time, projected_cost = project_totals(sim, config, self.workload, self.rates)
        return evaluate_compliance(
            metrics=metrics,
            progress=sim.epoch_completed / self.workload.total_epochs,
            spec=self.sla,
            elapsed_s=sim.elapsed_s,
            spent_usd=sim.spent_usd,
            projected_total_time_s=projected_time,
            projected_total_cost_usd=projected_cost,
            baseline_throughput_sps=self.refs.throughput_sps if self.refs else None,
        )

    def epoch_reward(self, prev: EpochMetrics, cur: EpochMetrics, weights: WeightVector,
                     compliance: ComplianceVector) -> float:
        return reward(
            prev, cur, weights, compliance, self.refs,
            gpu_util_target=self.cfg.gpu_util_target,
            cpu_util_target=self.cfg.cpu_util_target,
            beta=self.cfg.beta, clip=self.cfg.reward_clip,
        )


# ---------------- policies ----------------


class AgentPolicy:
    """Online actor-critic decisions with replay learning."""

    def __init__(self, agent: ActorCriticAgent) -> None:
        self.agent = agent

    def choose(self, state: StateVector, config: ResourceConfig, weights: WeightVector,
               compliance: ComplianceVector, sim: SimState, metrics: EpochMetrics,
               ctx: RunContext) -> int:
        index = self.agent.select_action(flatten_state(state))
        self.agent.decay_epsilon()
        return index

    def observe(self, state: np.ndarray, action: int, value: float, next_state: np.ndarray,
                terminal: bool, ctx: RunContext) -> None:
        self.agent.buffer.add(Transition(state, action, value, next_state, terminal))
        if len(self.agent.buffer) >= self.agent.batch_size:
            batch = self.agent.buffer.sample(self.agent.batch_size, self.agent.rng)
            self.agent.update(batch, ctx.cfg.gamma)


class GreedyModelPolicy:
    """One-step lookahead over the noiseless cluster models; no learning.

    Scores every action by the reward its predicted next epoch would earn
    under the current weights, including the violation penalty from the
    projected totals, and takes the argmax.
    """

    def choose(self, state: StateVector, config: ResourceConfig, weights: WeightVector,
               compliance: ComplianceVector, sim: SimState, metrics: EpochMetrics,
               ctx: RunContext) -> int:
        scores = []
        for index in range(9):
            candidate = apply_action(config, action_from_index(index), ctx.bounds)
            predicted = predicted_metrics(candidate, ctx.workload, ctx.rates)
            projected_time, projected_cost = project_totals(sim, candidate, ctx.workload, ctx.rates)
            peek = evaluate_compliance(
                metrics=predicted,
                progress=(sim.epoch_completed + 1) / ctx.workload.total_epochs,
                spec=ctx.sla,
                elapsed_s=sim.elapsed_s,
                spent_usd=sim.spent_usd,
                projected_total_time_s=projected_time,
                projected_total_cost_usd=projected_cost,
                baseline_throughput_sps=ctx.refs.throughput_sps if ctx.refs else None,
            )
            scores.append(reward(
                metrics, predicted, weights, peek,
                ctx.refs,
                gpu_util_target=ctx.cfg.gpu_util_target,
                cpu_util_target=ctx.cfg.cpu_util_target,
                beta=ctx.cfg.beta, clip=ctx.cfg.reward_clip,
            ))
        return int(np.argmax(scores))

    def observe(self, state: np.ndarray, action: int, value: float, next_state: np.ndarray,
                terminal: bool, ctx: RunContext) -> None:
        pass  # nothing to learn


# ---------------- episode loop ----------------


def online_episode(policy, ctx: RunContext, episode_index: int, start_config: ResourceConfig,
                   step_offset: int = 0, cost_offset: float = 0.0,
                   ) -> tuple[list[ExecutionRecord], EpisodeOutcome]:
    """Run the workload once, deciding (at most) once per epoch.

    Per epoch: rebuild the state, check the change/violation gate, and if
    it fires let the policy reallocate, then advance one epoch (the
    stabilization wait), score it, and store the transition. A run with no
    policy is a plain simulation of the starting allocation.
    """
    workload = ctx.workload
    sim = SimState(rng_seed=ctx.cfg.seed * 100_003 + episode_index)
    config = start_config
    weights = ctx.base_w
    last_metrics = predicted_metrics(config, workload, ctx.rates)
    compliance = ctx.evaluate(last_metrics, sim, config)
    state = ctx.build_state(last_metrics, sim, config, compliance)
    previous_state = state

    records: list[ExecutionRecord] = []
    rewards: list[float] = []
    decisions = 0

    for epoch in range(workload.total_epochs):
        fired = policy is not None and change_detected(previous_state, state, ctx.cfg.tau_change, compliance)
        action_index = NO_OP_ACTION
        if fired:
            weights = (adapt_weights(ctx.base_w, compliance, ctx.cfg.alpha)
                       if ctx.cfg.adapt_weights_enabled else ctx.base_w)
            action_index = policy.choose(state, config, weights, compliance, sim, last_metrics, ctx)
            config = apply_action(config, action_from_index(action_index), ctx.bounds)
            decisions += 1

        sim, metrics = step_epoch(sim, config, workload, ctx.rates)
        if ctx.refs is None:
            ctx.refs = RewardRefs(metrics.throughput_sps, metrics.hourly_cost_usd)
        new_compliance = ctx.evaluate(metrics, sim, config)
        value = ctx.epoch_reward(last_metrics, metrics, weights, new_compliance)

        records.append(ExecutionRecord(
            step_index=step_offset + epoch,
            epoch=epoch,
            gpus=config.gpus,
            cpus=config.cpus,
            epoch_time_s=metrics.epoch_time_s,
            hourly_cost_usd=metrics.hourly_cost_usd,
            cumulative_cost_usd=cost_offset + sim.spent_usd,
            throughput_sps=metrics.throughput_sps,
            gpu_util=metrics.gpu_util,
            cpu_util=metrics.cpu_util,
            memory_gb_used=metrics.memory_used_gb,
            reward=value,
            weights=weights.as_tuple(),
            compliance=new_compliance.met,
            severities=new_compliance.severity,
            action_index=action_index,
        ))
        rewards.append(value)

        next_state = ctx.build_state(metrics, sim, config, new_compliance)
        if fired:
            policy.observe(flatten_state(state), action_index, value, flatten_state(next_state),
                           epoch == workload.total_epochs - 1, ctx)

        previous_state = state
        state = next_state
        compliance = new_compliance
        last_metrics = metrics

    point = ParetoPoint(
        total_time_s=sim.elapsed_s,
        total_cost_usd=sim.spent_usd,
        config=config,
        sla_compliant=compliance.all_met,
        episode=episode_index,
    )
    outcome = EpisodeOutcome(
        point=point,
        final_metrics=last_metrics,
        final_compliance=compliance,
        final_config=config,
        mean_reward=float(np.mean(rewards)),
        decisions=decisions,
    )
    return records, outcome


# ---------------- Pareto selection ----------------


def pareto_front(points: Sequence[ParetoPoint]) -> list[ParetoPoint]:
    """Non-dominated points under minimization of (time, cost), time-ascending.

    Strict dominance: another point is at least as good on both objectives
    and better on one. Duplicated non-dominated points are all kept.
    """
    if not points:
        raise ValueError("cannot extract a Pareto front from zero points")
    ordered = sorted(points, key=lambda p: (p.total_time_s, p.total_cost_usd))
    front: list[ParetoPoint] = []
    best: ParetoPoint | None = None
    for p in ordered:
        if best is None or p.total_cost_usd < best.total_cost_usd:
            front.append(p)
            best = p
        elif (p.total_cost_usd == best.total_cost_usd
              and p.total_time_s == best.total_time_s):
            front.append(p)  # exact duplicate of the current frontier point
    return front


def select_configuration(front: Sequence[ParetoPoint], sla: SLASpec) -> ParetoPoint:
    """Pick the front point matching the preference.

    SLA-compliant points are preferred; if none exist the whole front is
    considered. Time preference takes the fastest point, cost the cheapest,
    and balanced the point closest to the ideal corner after min-max
    normalization over the front.
    """
    if not front:
        raise ValueError("cannot select from an empty front")
    candidates = [p for p in front if p.sla_compliant] or list(front)
    if sla.mode is PreferenceMode.TIME:
        return min(candidates, key=lambda p: p.total_time_s)
    if sla.mode is PreferenceMode.COST:
        return min(candidates, key=lambda p: p.total_cost_usd)

    times = [p.total_time_s for p in front]
    costs = [p.total_cost_usd for p in front]
    t_lo, t_hi = min(times), max(times)
    c_lo, c_hi = min(costs), max(costs)
    t_range = (t_hi - t_lo) or 1.0
    c_range = (c_hi - c_lo) or 1.0

    def distance(p: ParetoPoint) -> float:
        t = (p.total_time_s - t_lo) / t_range
        c = (p.total_cost_usd - c_lo) / c_range
        return math.hypot(t, c)

    return min(candidates, key=distance)


def compliance_rate(records: Sequence[ExecutionRecord]) -> float:
    """Mean fraction of SLA dimensions met across a trace."""
    if not records:
        raise ValueError("empty trace")
    return float(np.mean([sum(rec.compliance) / len(rec.compliance) for rec in records]))


# ---------------- method setup ----------------


def _static_recommendation(workload: WorkloadSpec, sla: SLASpec, bounds: ResourceBounds,
                           rates: CostRates) -> ResourceConfig:
    """Best fixed allocation over the whole grid under the preference weights."""
    configs = [ResourceConfig(g, c)
               for g in range(1, bounds.g_max + 1)
               for c in range(1, bounds.c_max + 1)]
    times, costs, utils = [], [], []
    for config in configs:
        t = epoch_time(config, workload) * workload.total_epochs
        times.append(t)
        costs.append(hourly_cost(config, rates) * t / 3600.0)
        m = predicted_metrics(config, workload, rates)
        utils.append((m.gpu_util + m.cpu_util) / 2)
    scores = preference_scores(times, costs, utils, base_weights(sla.mode))
    return configs[int(np.argmax(scores))]


def _setup(cfg: RunConfig, workload: WorkloadSpec) -> tuple[object | None, ResourceConfig, int, bool, InitOutcome | None, ActorCriticAgent | None]:
    """Resolve method into (policy, start config, episodes, adapt, init, agent)."""
    method = cfg.method
    if method is Method.BASIC:
        cpus = cfg.basic_cpus if cfg.basic_cpus is not None else cfg.bounds.c_max
        start = ResourceConfig(1, cpus)
        return None, start, 1, False, None, None
    if method is Method.STATIC_RECOM:
        start = _static_recommendation(workload, cfg.sla, cfg.bounds, cfg.rates)
        return None, start, 1, False, None, None
    if method is Method.LITE:
        return GreedyModelPolicy(), ResourceConfig(1, 2), cfg.episodes, cfg.adapt_weights_enabled, None, None

    if method is Method.SKIP:
        init_mode = InitMode.SKIP
    elif method is Method.BASE_RUNS:
        init_mode = InitMode.BASELINE_RUNS
    elif method is Method.WITH_TARGET_LOGS:
        if not cfg.logs:
            raise ConfigError("with_target_logs needs historical logs (--logs)")
        init_mode = InitMode.FROM_LOGS
    else:  # FULL: use whatever knowledge is available
        init_mode = InitMode.FROM_LOGS if cfg.logs else InitMode.BASELINE_RUNS

    agent = ActorCriticAgent(seed=cfg.seed, entropy_coef=cfg.entropy_coef)
    if cfg.checkpoint_in:
        agent.load_checkpoint(cfg.checkpoint_in)
    outcome = initialize(
        init_mode, workload, cfg.sla, agent=agent, logs=cfg.logs,
        bounds=cfg.bounds, rates=cfg.rates, seed=cfg.seed,
        pretrain_epochs=cfg.pretrain_epochs,
    )
    agent.epsilon = outcome.epsilon0
    return AgentPolicy(agent), outcome.initial_config, cfg.episodes, cfg.adapt_weights_enabled, outcome, agent


def summary_from_outcome(outcome: EpisodeOutcome, cfg: RunConfig, workload: WorkloadSpec,
                         initial_config: ResourceConfig) -> RunSummary:
    m = outcome.final_metrics
    return RunSummary(
        workload_name=workload.name,
        t_base_s=workload.t_base_s,
        total_epochs=workload.total_epochs,
        dataset_size=workload.dataset_size,
        mode=cfg.sla.mode.value,
        method=cfg.method.value,
        seed=cfg.seed,
        initial_gpus=initial_config.gpus,
        initial_cpus=initial_config.cpus,
        gpus=outcome.final_config.gpus,
        cpus=outcome.final_config.cpus,
        total_time_s=outcome.point.total_time_s,
        total_cost_usd=outcome.point.total_cost_usd,
        throughput_sps=m.throughput_sps,
        gpu_util=m.gpu_util,
        cpu_util=m.cpu_util,
        memory_used_gb=m.memory_used_gb,
        memory_alloc_gb=m.memory_alloc_gb,
        met=outcome.final_compliance.met,
        severities=outcome.final_compliance.severity,
    )


def run(cfg: RunConfig) -> RunResult:
    """Execute one full optimization run; see the module docstring."""
    workload = replace(cfg.workload, noise_sigma=0.0) if cfg.noiseless else cfg.workload
    policy, start, episodes, adapt, init_outcome, agent = _setup(cfg, workload)
    if cfg.initial_config is not None:
        start = cfg.initial_config
    if not start.within(cfg.bounds):
        raise ConfigError(f"start allocation ({start.gpus}, {start.cpus}) exceeds bounds")
    cfg_effective = replace(cfg, adapt_weights_enabled=adapt)

    ctx = RunContext(cfg_effective, workload)
    if (init_outcome is not None and init_outcome.baseline_estimates
            and start in init_outcome.baseline_estimates):
        est = init_outcome.baseline_estimates[start]
        ctx.refs = RewardRefs(est.est_throughput_sps, est.est_hourly_cost_usd)

    trace: list[ExecutionRecord] = []
    outcomes: list[EpisodeOutcome] = []
    cost_offset = 0.0
    for episode in range(episodes):
        records, outcome = online_episode(
            policy, ctx, episode, start,
            step_offset=len(trace), cost_offset=cost_offset,
        )
        trace.extend(records)
        outcomes.append(outcome)
        cost_offset += outcome.point.total_cost_usd

    front = pareto_front([o.point for o in outcomes])
    selected_point = select_configuration(front, cfg.sla)
    selected = next(o for o in outcomes if o.point is selected_point)

    if agent is not None and cfg.checkpoint_out:
        agent.save_checkpoint(cfg.checkpoint_out)

    optimized_summary = summary_from_outcome(selected, cfg_effective, workload, start)
    if cfg.method is Method.BASIC:
        baseline_summary = optimized_summary
    else:
        baseline_cfg = replace(cfg, method=Method.BASIC, logs=None, initial_config=None,
                               checkpoint_in=None, checkpoint_out=None)
        baseline_summary = run(baseline_cfg).optimized_summary

    recommendations = recommend(workload, selected.final_config, bounds=cfg.bounds, rates=cfg.rates)
    report = build_report(baseline_summary, optimized_summary, recommendations)

    return RunResult(
        config=cfg,
        initial_config=start,
        trace=trace,
        episodes=outcomes,
        front=front,
        selected=selected,
        optimized_summary=optimized_summary,
        baseline_summary=baseline_summary,
        report=report,
        init_outcome=init_outcome,
    )


# ---------------- delimited output ----------------


def write_trace_csv(path: str | Path, records: Iterable[ExecutionRecord]) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write(TRACE_HEADER + "\n")
        writer = csv.writer(fh)
        for r in records:
            writer.writerow([
                r.step_index, r.epoch, r.gpus, r.cpus,
                repr(r.epoch_time_s), repr(r.hourly_cost_usd), repr(r.cumulative_cost_usd),
                repr(r.throughput_sps), repr(r.gpu_util), repr(r.cpu_util),
                repr(r.memory_gb_used), repr(r.reward),
                repr(r.weights[0]), repr(r.weights[1]), repr(r.weights[2]),
                *(int(flag) for flag in r.compliance),
                *(repr(s) for s in r.severities),
                r.action_index,
            ])


def write_pareto_csv(path: str | Path, front: Iterable[ParetoPoint]) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write(PARETO_HEADER + "\n")
        for p in front:
            fh.write(f"{p.total_time_s!r},{p.total_cost_usd!r},{int(p.sla_compliant)}\n")
