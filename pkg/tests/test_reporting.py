"""Tests for run summaries, recommendations, and the compliance report."""

import math
from pathlib import Path

import pytest

from slaopt.cluster_sim import WorkloadSpec, allocated_memory, epoch_time, hourly_cost
from slaopt.domain import DEFAULT_BOUNDS, ResourceConfig
from slaopt.errors import ConfigError
from slaopt.reporting import (
    COST_OPTION_TIME_FACTOR,
    Recommendation,
    RunSummary,
    _resource_change,
    _signed,
    _signed_cost,
    build_report,
    recommend,
    render_report,
)

DATA_DIR = Path(__file__).parent / "data"


def _summary(**overrides) -> RunSummary:
    base = dict(
        workload_name="text-classifier",
        t_base_s=109.94,
        total_epochs=10,
        dataset_size=150000,
        mode="balanced",
        method="full",
        seed=42,
        initial_gpus=1,
        initial_cpus=4,
        gpus=1,
        cpus=6,
        total_time_s=873.6,
        total_cost_usd=1.97,
        throughput_sps=1712.40,
        gpu_util=0.72,
        cpu_util=0.55,
        memory_used_gb=2.25,
        memory_alloc_gb=14.0,
        met=(True, True, False, True, True, True),
        severities=(0.0, 0.0, 0.14, 0.0, 0.0, 0.0),
    )
    base.update(overrides)
    return RunSummary(**base)


def _baseline_summary() -> RunSummary:
    return _summary(
        gpus=1,
        cpus=4,
        total_time_s=1884.0,
        total_cost_usd=1.9647,
        throughput_sps=1640.23,
        gpu_util=0.43,
        cpu_util=0.52,
        memory_alloc_gb=12.0,
        met=(True, True, False, True, False, True),
        severities=(0.0, 0.0, 0.10, 0.0, 0.57, 0.0),
    )


# ---------------------------------------------------------------------------
# RunSummary serialization
# ---------------------------------------------------------------------------

def test_summary_text_roundtrip():
    """to_text followed by from_text reproduces every field exactly."""
    original = _summary()
    restored = RunSummary.from_text(original.to_text())
    assert restored == original


def test_summary_save_load_roundtrip(tmp_path):
    """save/load through a file preserves the summary."""
    original = _baseline_summary()
    path = tmp_path / "summary.txt"
    original.save(path)
    assert RunSummary.load(path) == original


def test_summary_text_is_key_value_lines():
    """Serialized form is 'key = value' lines ending with a newline."""
    text = _summary().to_text()
    assert text.endswith("\n")
    for line in text.strip().splitlines():
        assert " = " in line
    assert "workload_name = text-classifier" in text
    assert "met = 1,1,0,1,1,1" in text


def test_summary_from_text_tolerates_comments_and_blanks():
    """Comment and blank lines in the serialized form are skipped."""
    text = "# saved by a run\n\n" + _summary().to_text()
    assert RunSummary.from_text(text) == _summary()


def test_summary_from_text_missing_key():
    """Dropping a required key raises ConfigError naming the key."""
    lines = [l for l in _summary().to_text().splitlines() if not l.startswith("seed")]
    with pytest.raises(ConfigError, match="seed"):
        RunSummary.from_text("\n".join(lines))


def test_summary_from_text_bad_value():
    """A non-numeric value for a numeric key raises ConfigError."""
    text = _summary().to_text().replace("total_time_s = 873.6", "total_time_s = fast")
    with pytest.raises(ConfigError):
        RunSummary.from_text(text)


def test_summary_from_text_junk_line():
    """A line without '=' raises ConfigError."""
    with pytest.raises(ConfigError, match="not 'key = value'"):
        RunSummary.from_text("no equals sign here\n")


def test_summary_requires_six_flags():
    """met and severities must both have six entries."""
    with pytest.raises(ValueError):
        _summary(met=(True, True, True))
    with pytest.raises(ValueError):
        _summary(severities=(0.0,))


def test_summary_workload_reconstruction():
    """workload() rebuilds a noiseless spec from the planning fields."""
    workload = _summary().workload()
    assert workload.name == "text-classifier"
    assert workload.t_base_s == 109.94
    assert workload.total_epochs == 10
    assert workload.dataset_size == 150000
    assert workload.noise_sigma == 0.0


# ---------------------------------------------------------------------------
# Formatting helpers
# ---------------------------------------------------------------------------

def test_signed_formatting():
    """Signed percentages carry a direction label and one decimal."""
    assert _signed(53.63057, "faster", "slower") == "53.6% (faster)"
    assert _signed(-2.04, "faster", "slower") == "2.0% (slower)"
    assert _signed(4.3999, "increase", "decrease") == "4.4% (increase)"
    assert _signed(0.0, "faster", "slower") == "0.0% (no change)"
    assert _signed(1e-12, "faster", "slower") == "0.0% (no change)"


def test_signed_cost_formatting():
    """Cost percentages use two decimals and increase/decrease labels."""
    assert _signed_cost(0.26976) == "0.27% (increase)"
    assert _signed_cost(-12.5) == "12.50% (decrease)"
    assert _signed_cost(0.0) == "0.00% (no change)"


def test_resource_change_lines():
    """Resource change lines spell out the direction and magnitude."""
    assert _resource_change("GPUs", 1, 1) == "- GPUs: 1 → 1 (no changes)"
    assert _resource_change("CPUs", 4, 6) == "- CPUs: 4 → 6 (increased by 2)"
    assert _resource_change("CPUs", 8, 3) == "- CPUs: 8 → 3 (decreased by 5)"


# ---------------------------------------------------------------------------
# Recommendations
# ---------------------------------------------------------------------------

def _grid_totals(workload):
    out = {}
    for g in range(1, DEFAULT_BOUNDS.g_max + 1):
        for c in range(1, DEFAULT_BOUNDS.c_max + 1):
            config = ResourceConfig(g, c)
            t = epoch_time(config, workload) * workload.total_epochs
            out[config] = (t, hourly_cost(config) * t / 3600.0)
    return out


def test_recommend_time_option_is_grid_fastest():
    """The time-critical option is the fastest allocation in the grid."""
    workload = _summary().workload()
    totals = _grid_totals(workload)
    fastest = min(totals, key=lambda cfg: totals[cfg])
    recs = recommend(workload, ResourceConfig(1, 6))
    assert recs[0].label == "Time-Critical"
    assert recs[0].config == fastest == ResourceConfig(4, 40)
    assert recs[0].est_time_min == pytest.approx(totals[fastest][0] / 60.0, abs=1e-12)
    assert recs[0].est_cost_usd == pytest.approx(totals[fastest][1], abs=1e-12)
    assert recs[0].memory_gb == allocated_memory(fastest)


def test_recommend_cost_option_cheapest_within_time_budget():
    """The cost option is the cheapest allocation within 1.5x the best time."""
    workload = _summary().workload()
    totals = _grid_totals(workload)
    best_time = min(t for t, _ in totals.values())
    affordable = {cfg: tc for cfg, tc in totals.items()
                  if tc[0] <= COST_OPTION_TIME_FACTOR * best_time}
    cheapest = min(affordable, key=lambda cfg: (affordable[cfg][1], affordable[cfg][0]))
    recs = recommend(workload, ResourceConfig(1, 6))
    assert recs[1].label == "Cost-Critical"
    assert recs[1].config == cheapest
    assert totals[recs[1].config][0] <= COST_OPTION_TIME_FACTOR * best_time
    assert recs[1].est_cost_usd <= recs[0].est_cost_usd


def test_recommend_balanced_option_echoes_current():
    """The balanced option keeps the current allocation with 0% change."""
    workload = _summary().workload()
    current = ResourceConfig(1, 6)
    recs = recommend(workload, current)
    assert recs[2].label == "Balanced"
    assert recs[2].config == current
    assert recs[2].change_pct == pytest.approx(0.0, abs=1e-12)


def test_recommend_change_pct_relative_to_current():
    """change_pct compares each option against the current allocation."""
    workload = _summary().workload()
    current = ResourceConfig(1, 6)
    current_time = epoch_time(current, workload) * workload.total_epochs
    recs = recommend(workload, current)
    for rec in recs:
        t = epoch_time(rec.config, workload) * workload.total_epochs
        expected = (current_time - t) / current_time * 100.0
        assert rec.change_pct == pytest.approx(expected, abs=1e-9)


# ---------------------------------------------------------------------------
# Report assembly and rendering
# ---------------------------------------------------------------------------

def _golden_inputs():
    baseline = _baseline_summary()
    optimized = _summary()
    recs = recommend(optimized.workload(), ResourceConfig(optimized.gpus, optimized.cpus))
    return baseline, optimized, recs


def test_build_report_derived_percentages():
    """Improvement percentages are recomputed from the raw summaries."""
    baseline, optimized, recs = _golden_inputs()
    report = build_report(baseline, optimized, recs)
    assert report.time_improvement_pct == pytest.approx(53.63057324840764, abs=1e-9)
    assert report.cost_change_pct == pytest.approx(0.26976128671044347, abs=1e-9)
    assert report.throughput_change_pct == pytest.approx(4.399992683952865, abs=1e-9)


def test_build_report_requires_three_recommendations():
    """A report carries exactly three recommendations."""
    baseline, optimized, recs = _golden_inputs()
    with pytest.raises(ValueError):
        build_report(baseline, optimized, recs[:2])


def test_build_report_rejects_degenerate_baseline():
    """Non-positive baseline figures cannot anchor percentages."""
    baseline, optimized, recs = _golden_inputs()
    bad = _baseline_summary().__class__(**{**baseline.__dict__, "total_time_s": 0.0})
    with pytest.raises(ConfigError):
        build_report(bad, optimized, recs)


def test_report_matches_golden_file():
    """Rendering the frozen summaries reproduces the golden report exactly."""
    baseline, optimized, recs = _golden_inputs()
    text = render_report(baseline, optimized, recs)
    golden = (DATA_DIR / "golden_report.txt").read_text(encoding="utf-8")
    assert text == golden


def test_report_headline_lines():
    """Headline figures render with the expected style."""
    baseline, optimized, recs = _golden_inputs()
    text = render_report(baseline, optimized, recs)
    assert "- Time: 53.6% (faster)" in text
    assert "- Cost: 0.27% (increase)" in text
    assert "- Throughput: 4.4% (increase)" in text
    assert "- Training time: 14.56 minutes" in text
    assert "- Cost: $1.97" in text
    assert "- Throughput: 1712.40 samples/sec" in text
    assert "- Resources: 1 GPU, 6 CPUs, 14.0 GB memory" in text
    assert "- GPUs: 1 → 1 (no changes)" in text
    assert "- CPUs: 4 → 6 (increased by 2)" in text
    assert text.count("Option:") == 3
    assert text.endswith("\n")


def test_report_percentages_recomputable_from_summaries():
    """Percentages printed in the report agree with the raw summary data."""
    baseline, optimized, recs = _golden_inputs()
    text = render_report(baseline, optimized, recs)
    time_pct = (baseline.total_time_s - optimized.total_time_s) / baseline.total_time_s * 100.0
    cost_pct = (optimized.total_cost_usd - baseline.total_cost_usd) / baseline.total_cost_usd * 100.0
    thr_pct = (optimized.throughput_sps - baseline.throughput_sps) / baseline.throughput_sps * 100.0
    assert f"- Time: {abs(time_pct):.1f}% (faster)" in text
    assert f"- Cost: {abs(cost_pct):.2f}% (increase)" in text
    assert f"- Throughput: {abs(thr_pct):.1f}% (increase)" in text
    assert math.isclose(round(time_pct, 1), 53.6, abs_tol=0.1)


def test_golden_summaries_on_disk_match_constructors():
    """The checked-in summary files parse back to the frozen constructors."""
    baseline = RunSummary.load(DATA_DIR / "golden_baseline_summary.txt")
    optimized = RunSummary.load(DATA_DIR / "golden_optimized_summary.txt")
    assert baseline == _baseline_summary()
    assert optimized == _summary()


def test_render_report_single_gpu_pluralization():
    """Counts of one render without the plural s."""
    baseline, optimized, recs = _golden_inputs()
    text = render_report(baseline, optimized, recs)
    assert "1 GPU," in text and "6 CPUs," in text
