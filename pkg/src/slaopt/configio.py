"""Flat key = value config parsing for workloads, SLA targets, and run knobs."""

from __future__ import annotations

from pathlib import Path

from .cluster_sim import WorkloadSpec
from .domain import PreferenceMode, SLASpec
from .errors import ConfigError, SLASpecError


def parse_kv_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse 'key = value' lines; '#' starts a comment, blank lines ignored."""
    values: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}, line {line_no}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}, line {line_no}: empty key")
        values[key] = value.strip()
    return values


def parse_kv_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    return parse_kv_text(path.read_text(encoding="utf-8"), source=str(path))


def _typed(values: dict[str, str], key: str, cast, source: str, default=None, required: bool = False):
    if key not in values:
        if required:
            raise ConfigError(f"{source}: missing required key {key!r}")
        return default
    try:
        return cast(values[key])
    except ValueError:
        raise ConfigError(f"{source}: key {key!r} has invalid value {values[key]!r}") from None


def load_workload(path: str | Path) -> WorkloadSpec:
    """Load a workload spec; see README for the key list."""
    source = str(path)
    values = parse_kv_file(path)
    known = {"name", "t_base_s", "total_epochs", "dataset_size", "gpu_intensity",
             "cpu_intensity", "model_mem_gb", "per_sample_mem_mb", "noise_sigma"}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"{source}: unknown workload keys: {', '.join(sorted(unknown))}")
    try:
        return WorkloadSpec(
            name=values.get("name", Path(path).stem),
            t_base_s=_typed(values, "t_base_s", float, source, required=True),
            total_epochs=_typed(values, "total_epochs", int, source, required=True),
            dataset_size=_typed(values, "dataset_size", int, source, required=True),
            gpu_intensity=_typed(values, "gpu_intensity", float, source, default=0.9),
            cpu_intensity=_typed(values, "cpu_intensity", float, source, default=0.85),
            model_mem_gb=_typed(values, "model_mem_gb", float, source, default=2.0),
            per_sample_mem_mb=_typed(values, "per_sample_mem_mb", float, source, default=4.0),
            noise_sigma=_typed(values, "noise_sigma", float, source, default=0.05),
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


# SLA option keys accepted after the mode, e.g. "time:time=30,gpu_util=0.7".
_SLA_KEYS = {
    "time": "time_target_min",
    "cost": "cost_target_usd",
    "throughput": "throughput_target_sps",
    "memory": "memory_target_gb",
    "gpu_util": "gpu_util_target",
    "cpu_util": "cpu_util_target",
}


def parse_sla_option(option: str) -> SLASpec:
    """Parse '--sla MODE[:key=value,...]' into an SLA spec.

    Modes are time, cost, or balanced; target keys are time (minutes),
    cost (USD), throughput (samples/s), memory (GB), gpu_util, cpu_util.
    """
    mode_text, _, rest = option.partition(":")
    mode = PreferenceMode.from_string(mode_text)
    targets: dict[str, float] = {}
    if rest:
        for item in rest.split(","):
            if "=" not in item:
                raise SLASpecError(f"SLA target {item!r} is not key=value")
            key, _, value = item.partition("=")
            key = key.strip()
            if key not in _SLA_KEYS:
                raise SLASpecError(f"unknown SLA target key {key!r} (expected one of: {', '.join(_SLA_KEYS)})")
            try:
                targets[_SLA_KEYS[key]] = float(value)
            except ValueError:
                raise SLASpecError(f"SLA target {key!r} has non-numeric value {value!r}") from None
    return SLASpec(mode=mode, **targets)
