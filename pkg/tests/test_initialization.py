"""Warm-start paths: history logs, baseline probes, and config scoring."""

import math

import numpy as np
import pytest

from slaopt.agent import ActorCriticAgent
from slaopt.cluster_sim import WorkloadSpec, epoch_time, hourly_cost
from slaopt.domain import NO_OP_ACTION, PreferenceMode, ResourceConfig, SLASpec, STATE_DIM
from slaopt.errors import ConfigError, LogParseError
from slaopt.initialization import (
    BASELINE_PROBE_CONFIGS,
    HISTORY_HEADER,
    InitMode,
    LogRow,
    STARTING_EPSILON,
    best_historical_config,
    estimate_from_baseline,
    extract_patterns,
    initialize,
    preference_scores,
    read_history,
    run_baseline_probes,
    select_baseline_config,
    write_history,
)

TOL = 1e-9


def _workload(**overrides) -> WorkloadSpec:
    base = dict(name="init", t_base_s=600.0, total_epochs=10, dataset_size=50_000,
                noise_sigma=0.0)
    base.update(overrides)
    return WorkloadSpec(**base)


def _row(epoch=0, gpus=1, cpus=2, epoch_time_s=300.0, hourly=6.0, throughput=100.0,
         gpu_util=0.8, cpu_util=0.6, reward=0.1) -> LogRow:
    return LogRow(
        model_id="m", dataset_size=50_000, epoch=epoch, gpus=gpus, cpus=cpus,
        epoch_time_s=epoch_time_s, hourly_cost_usd=hourly,
        cumulative_cost_usd=hourly * epoch_time_s / 3600.0,
        throughput_sps=throughput, gpu_util=gpu_util, cpu_util=cpu_util,
        memory_gb_used=4.0, reward=reward,
    )


# ---------------- history CSV ----------------


def test_history_header_bit_exact():
    assert HISTORY_HEADER == ("model_id,dataset_size,epoch,gpus,cpus,epoch_time_s,"
                              "hourly_cost_usd,cumulative_cost_usd,throughput_sps,"
                              "gpu_util,cpu_util,memory_gb_used,reward")


def test_history_roundtrip(tmp_path):
    from slaopt.domain import ExecutionRecord

    records = [
        ExecutionRecord(
            step_index=i, epoch=i, gpus=2, cpus=4, epoch_time_s=277.78 + i,
            hourly_cost_usd=12.0, cumulative_cost_usd=0.9 * (i + 1),
            throughput_sps=180.0, gpu_util=0.64, cpu_util=0.42, memory_gb_used=2.5,
            reward=0.3, weights=(0.3, 0.3, 0.4), compliance=(True,) * 6,
            severities=(0.0,) * 6, action_index=4,
        )
        for i in range(3)
    ]
    path = tmp_path / "history.csv"
    write_history(path, records, _workload())
    rows = read_history(path)
    assert len(rows) == 3
    assert rows[0].model_id == "init"
    assert rows[0].dataset_size == 50_000
    assert rows[1].epoch == 1
    assert abs(rows[2].epoch_time_s - 279.78) < TOL  # repr round-trips exactly


def test_read_history_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(LogParseError):
        read_history(path)


def test_read_history_names_offending_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(HISTORY_HEADER + "\nm,50000,0,1,2,not_a_number,6,0.5,100,0.8,0.6,4,0.1\n")
    with pytest.raises(LogParseError, match="row 2"):
        read_history(path)
    path.write_text(HISTORY_HEADER + "\nm,50000,0,1,2\n")
    with pytest.raises(LogParseError, match="row 2"):
        read_history(path)


def test_read_history_rejects_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(LogParseError):
        read_history(path)


# ---------------- pattern extraction ----------------


def test_extract_patterns_single_row():
    """A lone row scores only utilization since both deltas are zero."""
    rows = [_row(gpu_util=0.8, cpu_util=0.7)]
    dataset = extract_patterns(rows, PreferenceMode.TIME)
    assert len(dataset) == 1
    state, action, value = dataset[0]
    assert state.shape == (STATE_DIM,)
    assert action == NO_OP_ACTION
    assert abs(value - 0.3 * 1.0) < TOL  # w_util * perfect utilization fit


def test_extract_patterns_faster_row_scores_higher_under_time_priority():
    rows = [
        _row(epoch=0, epoch_time_s=300.0, throughput=100.0),
        _row(epoch=1, epoch_time_s=150.0, throughput=200.0),
    ]
    dataset = extract_patterns(rows, PreferenceMode.TIME)
    assert dataset[1][2] > dataset[0][2]


def test_extract_patterns_skips_non_finite_rows():
    rows = [_row(epoch=0), _row(epoch=1, throughput=math.nan), _row(epoch=2)]
    dataset = extract_patterns(rows, PreferenceMode.BALANCED)
    assert len(dataset) == 2


def test_extract_patterns_keeps_all_finite_rows():
    rows = [_row(epoch=i) for i in range(1000)]
    assert len(extract_patterns(rows, PreferenceMode.COST)) == 1000


# ---------------- config scoring ----------------


def test_preference_scores_ordering():
    # Candidate 0 is fastest and priciest; candidate 2 is slowest and cheapest.
    times = [100.0, 200.0, 300.0]
    costs = [30.0, 20.0, 10.0]
    utils = [0.5, 0.5, 0.5]
    from slaopt.adaptive_reward import base_weights

    time_scores = preference_scores(times, costs, utils, base_weights(PreferenceMode.TIME))
    assert int(np.argmax(time_scores)) == 0
    cost_scores = preference_scores(times, costs, utils, base_weights(PreferenceMode.COST))
    assert int(np.argmax(cost_scores)) == 2


def test_preference_scores_degenerate_metric():
    from slaopt.adaptive_reward import base_weights

    scores = preference_scores([5.0, 5.0], [1.0, 1.0], [0.5, 0.4],
                               base_weights(PreferenceMode.BALANCED))
    # Degenerate time and cost columns leave utilization to break the tie.
    assert scores[0] > scores[1]
    flat = preference_scores([5.0, 5.0], [1.0, 1.0], [0.4, 0.4],
                             base_weights(PreferenceMode.BALANCED))
    assert flat[0] == flat[1]


def test_best_historical_config_dominance():
    """A config better on every metric wins regardless of preference."""
    rows = [
        _row(gpus=1, cpus=2, epoch_time_s=400.0, hourly=8.0, gpu_util=0.5, cpu_util=0.4),
        _row(gpus=2, cpus=4, epoch_time_s=200.0, hourly=6.0, gpu_util=0.8, cpu_util=0.7),
    ]
    for mode in PreferenceMode:
        assert best_historical_config(rows, mode) == ResourceConfig(2, 4)


def test_best_historical_config_ignores_out_of_bounds_rows():
    rows = [_row(gpus=9, cpus=2), _row(gpus=1, cpus=2)]
    assert best_historical_config(rows, PreferenceMode.TIME) == ResourceConfig(1, 2)
    with pytest.raises(ConfigError):
        best_historical_config([_row(gpus=9, cpus=200)], PreferenceMode.TIME)


# ---------------- baseline probes ----------------


def test_estimate_from_baseline_frozen():
    """Frozen: a 120 s probe epoch on 20% data extrapolates to 600 s."""
    w = _workload()
    est = estimate_from_baseline(
        probe_metrics_time_s=120.0, probe_throughput_sps=250.0, gpu_util=0.8,
        cpu_util=0.6, config=ResourceConfig(2, 4), workload=w, probe_epochs=1,
    )
    assert abs(est.est_epoch_time_s - 600.0) < TOL
    assert abs(est.est_total_time_s - 6000.0) < TOL
    assert abs(est.est_throughput_sps - 250.0) < TOL  # rates are size-invariant
    assert abs(est.est_hourly_cost_usd - 12.0) < TOL
    assert abs(est.est_total_cost_usd - 20.0) < TOL


def test_noiseless_probe_estimates_match_true_epoch_times():
    """The simulator is linear in data size, so the x5 recovery is exact."""
    w = _workload()
    estimates = run_baseline_probes(w, seed=0)
    assert set(estimates) == set(BASELINE_PROBE_CONFIGS)
    for config, est in estimates.items():
        true_epoch = epoch_time(config, w)
        assert abs(est.est_epoch_time_s - true_epoch) < TOL
        assert abs(est.est_total_time_s - true_epoch * w.total_epochs) < TOL
        assert abs(est.est_hourly_cost_usd - hourly_cost(config)) < TOL
        # Probe throughput (20% of the data in 20% of the time) equals the full rate.
        assert abs(est.est_throughput_sps - w.dataset_size / true_epoch) < TOL


def test_probe_accounting():
    """Probe phase work is exactly 3 configs x ceil(0.1 N) epochs x 20% data."""
    w = _workload(total_epochs=25)
    estimates = run_baseline_probes(w, seed=3)
    expected_epochs = math.ceil(0.1 * 25)
    for est in estimates.values():
        assert est.probe_epochs == expected_epochs
        assert est.probe_data_fraction == 0.2
    assert len(estimates) == 3


def test_select_baseline_config_matches_brute_force():
    """The selected probe config is the argmax of the scalarized objective."""
    w = _workload()
    estimates = run_baseline_probes(w, seed=0)
    for mode in PreferenceMode:
        picked = select_baseline_config(estimates, mode)
        from slaopt.adaptive_reward import base_weights

        configs = sorted(estimates, key=lambda c: (c.gpus, c.cpus))
        scores = preference_scores(
            [estimates[c].est_total_time_s for c in configs],
            [estimates[c].est_total_cost_usd for c in configs],
            [(estimates[c].gpu_util + estimates[c].cpu_util) / 2 for c in configs],
            base_weights(mode),
        )
        assert picked == configs[int(np.argmax(scores))]


# ---------------- the initialize entry point ----------------


def test_initialize_skip_path():
    outcome = initialize(InitMode.SKIP, _workload(), SLASpec(mode=PreferenceMode.BALANCED))
    assert outcome.initial_config == ResourceConfig(1, 2)
    assert outcome.epsilon0 == 0.3
    assert not outcome.pretrained


def test_initialize_epsilon_mapping():
    assert STARTING_EPSILON == {"skip": 0.3, "from_logs": 0.1, "baseline_runs": 0.2}


def test_initialize_from_logs_requires_rows():
    with pytest.raises(ConfigError):
        initialize(InitMode.FROM_LOGS, _workload(), SLASpec(mode=PreferenceMode.TIME), logs=None)


def test_initialize_from_logs_pretrains_critic():
    rows = [_row(epoch=i, gpus=1 + i % 2, cpus=2 + i % 3, epoch_time_s=300.0 - i,
                 throughput=100.0 + i) for i in range(40)]
    agent = ActorCriticAgent(seed=0)
    outcome = initialize(InitMode.FROM_LOGS, _workload(), SLASpec(mode=PreferenceMode.TIME),
                         agent=agent, logs=rows, pretrain_epochs=25)
    assert outcome.pretrained
    assert outcome.epsilon0 == 0.1
    assert outcome.pretrain_mse is not None
    history = agent.pretrain_mse_history
    assert len(history) == 25
    assert history[-1] < history[0] / 10.0  # the regression actually fit


def test_initialize_baseline_runs_path():
    outcome = initialize(InitMode.BASELINE_RUNS, _workload(), SLASpec(mode=PreferenceMode.TIME),
                         seed=0)
    assert outcome.epsilon0 == 0.2
    assert outcome.baseline_estimates is not None
    assert outcome.initial_config in BASELINE_PROBE_CONFIGS
