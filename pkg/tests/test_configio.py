"""Tests for key = value config parsing and the SLA option grammar."""

import pytest

from slaopt.configio import load_workload, parse_kv_file, parse_kv_text, parse_sla_option
from slaopt.errors import ConfigError, SLASpecError


# ---------------------------------------------------------------------------
# key = value parsing
# ---------------------------------------------------------------------------

def test_parse_kv_text_basic():
    """Keys and values are stripped; later duplicates win."""
    values = parse_kv_text("a = 1\nb=two\n a = 3 \n")
    assert values == {"a": "3", "b": "two"}


def test_parse_kv_text_comments_and_blanks():
    """Full-line and trailing comments and blank lines are ignored."""
    text = "# header comment\n\nalpha = 0.5  # inline note\n   \n# done\n"
    assert parse_kv_text(text) == {"alpha": "0.5"}


def test_parse_kv_text_missing_equals():
    """A non-comment line without '=' is rejected with its line number."""
    with pytest.raises(ConfigError, match="line 2"):
        parse_kv_text("a = 1\nnot a pair\n")


def test_parse_kv_text_empty_key():
    """A line like '= 3' has no key and is rejected."""
    with pytest.raises(ConfigError, match="empty key"):
        parse_kv_text("= 3\n")


def test_parse_kv_file_roundtrip(tmp_path):
    """parse_kv_file reads the same grammar from disk."""
    path = tmp_path / "conf.txt"
    path.write_text("x = 10\n# c\ny = z\n", encoding="utf-8")
    assert parse_kv_file(path) == {"x": "10", "y": "z"}


# ---------------------------------------------------------------------------
# workload files
# ---------------------------------------------------------------------------

def _write_workload(tmp_path, text, name="wl.conf"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_workload_minimal_defaults(tmp_path):
    """Only the three size keys are required; the rest take defaults."""
    path = _write_workload(tmp_path, "t_base_s = 120\ntotal_epochs = 6\ndataset_size = 2048\n")
    workload = load_workload(path)
    assert workload.name == "wl"
    assert workload.t_base_s == 120.0
    assert workload.total_epochs == 6
    assert workload.dataset_size == 2048
    assert workload.gpu_intensity == 0.9
    assert workload.cpu_intensity == 0.85
    assert workload.model_mem_gb == 2.0
    assert workload.per_sample_mem_mb == 4.0
    assert workload.noise_sigma == 0.05


def test_load_workload_all_keys(tmp_path):
    """Every key is honored when present."""
    path = _write_workload(tmp_path, "\n".join([
        "name = resnet-run",
        "t_base_s = 300.5",
        "total_epochs = 12",
        "dataset_size = 50000",
        "gpu_intensity = 0.7",
        "cpu_intensity = 0.6",
        "model_mem_gb = 4.5",
        "per_sample_mem_mb = 8",
        "noise_sigma = 0.02",
    ]))
    workload = load_workload(path)
    assert workload.name == "resnet-run"
    assert workload.t_base_s == 300.5
    assert workload.gpu_intensity == 0.7
    assert workload.per_sample_mem_mb == 8.0
    assert workload.noise_sigma == 0.02


def test_load_workload_unknown_key(tmp_path):
    """Unknown keys are reported by name."""
    path = _write_workload(tmp_path, "t_base_s = 1\ntotal_epochs = 1\ndataset_size = 1\nspeed = 9\n")
    with pytest.raises(ConfigError, match="speed"):
        load_workload(path)


def test_load_workload_missing_required(tmp_path):
    """Missing t_base_s is a config error naming the key."""
    path = _write_workload(tmp_path, "total_epochs = 4\ndataset_size = 100\n")
    with pytest.raises(ConfigError, match="t_base_s"):
        load_workload(path)


def test_load_workload_bad_value(tmp_path):
    """A non-numeric epoch count is a config error."""
    path = _write_workload(tmp_path, "t_base_s = 1\ntotal_epochs = ten\ndataset_size = 100\n")
    with pytest.raises(ConfigError, match="total_epochs"):
        load_workload(path)


def test_load_workload_out_of_range(tmp_path):
    """Spec-level validation failures surface as config errors."""
    path = _write_workload(
        tmp_path, "t_base_s = 1\ntotal_epochs = 4\ndataset_size = 100\nnoise_sigma = 0.5\n")
    with pytest.raises(ConfigError):
        load_workload(path)


# ---------------------------------------------------------------------------
# SLA option grammar
# ---------------------------------------------------------------------------

def test_parse_sla_option_plain_mode():
    """A bare mode has no targets set."""
    sla = parse_sla_option("balanced")
    assert sla.mode.value == "balanced"
    assert sla.time_target_min is None
    assert sla.cost_target_usd is None


def test_parse_sla_option_with_targets():
    """Targets after the colon populate the matching fields."""
    sla = parse_sla_option("time:time=30,gpu_util=0.7,cost=5.5")
    assert sla.mode.value == "time"
    assert sla.time_target_min == 30.0
    assert sla.gpu_util_target == 0.7
    assert sla.cost_target_usd == 5.5
    assert sla.throughput_target_sps is None


def test_parse_sla_option_all_target_keys():
    """All six documented target keys are accepted."""
    sla = parse_sla_option("cost:time=10,cost=2,throughput=500,memory=16,gpu_util=0.6,cpu_util=0.5")
    assert sla.memory_target_gb == 16.0
    assert sla.throughput_target_sps == 500.0
    assert sla.cpu_util_target == 0.5


def test_parse_sla_option_bad_mode():
    """An unknown mode is an SLA spec error."""
    with pytest.raises(SLASpecError):
        parse_sla_option("speed")


def test_parse_sla_option_bad_key():
    """An unknown target key is an SLA spec error."""
    with pytest.raises(SLASpecError, match="banana"):
        parse_sla_option("time:banana=1")


def test_parse_sla_option_non_numeric_value():
    """A non-numeric target value is an SLA spec error."""
    with pytest.raises(SLASpecError, match="time"):
        parse_sla_option("time:time=soon")


def test_parse_sla_option_not_key_value():
    """A target item without '=' is an SLA spec error."""
    with pytest.raises(SLASpecError):
        parse_sla_option("time:30")


def test_parse_sla_option_rejects_invalid_target():
    """Out-of-range targets fail SLA validation."""
    with pytest.raises(SLASpecError):
        parse_sla_option("time:gpu_util=1.5")
