"""Command line interface.

Verbs: run (optimize one workload), bench (compare methods and
preferences), report (render the compliance report from saved summaries),
recommend (print allocation options). Exit codes: 0 success, 1 config
error, 2 invalid SLA spec, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .configio import load_workload, parse_kv_file, parse_sla_option
from .domain import PreferenceMode, ResourceConfig
from .errors import ConfigError, LogParseError, SLASpecError
from .figures import save_allocation_figure, save_bench_figure, save_pareto_figure
from .initialization import read_history, rows_from_records, write_history
from .orchestrator import Method, RunConfig, RunResult, run, write_pareto_csv, write_trace_csv
from .reporting import RunSummary, recommend, render_report

BENCH_HEADER = ("method,preference,total_time_s,total_cost_usd,"
                "time_improvement_pct,cost_improvement_pct,priority_improvement_pct")


class _Parser(argparse.ArgumentParser):
    """Argparse that reports usage problems as config errors (exit 1)."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="slaopt", description="SLA-aware resource optimizer for training jobs")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p: _Parser) -> None:
        p.add_argument("--workload", required=True, help="workload config file (key = value)")
        p.add_argument("--sla", default="balanced",
                       help="MODE[:key=value,...]; modes: time, cost, balanced")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--episodes", type=int, default=10)
        p.add_argument("--out-dir", default="slaopt-out")
        p.add_argument("--noiseless", action="store_true", help="disable simulator noise")
        p.add_argument("--run-config", help="optional key = value file with run knobs")
        p.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    p_run = sub.add_parser("run", help="optimize one workload")
    common(p_run)
    p_run.add_argument("--method", default="full",
                       help="basic, static_recom, lite, skip, base_runs, with_target_logs, full")
    p_run.add_argument("--logs", help="historical run-log CSV for warm starting")
    p_run.add_argument("--save-nets", help="write network checkpoint here after the run")
    p_run.add_argument("--load-nets", help="load a network checkpoint before the run")

    p_bench = sub.add_parser("bench", help="compare methods across preferences")
    common(p_bench)
    p_bench.add_argument("--methods", help="comma list of methods (default: all)")

    p_report = sub.add_parser("report", help="render a report from saved summaries")
    p_report.add_argument("--baseline", required=True, help="baseline run summary file")
    p_report.add_argument("--optimized", required=True, help="optimized run summary file")
    p_report.add_argument("--out", help="write the report here instead of stdout")

    p_rec = sub.add_parser("recommend", help="print allocation recommendations")
    p_rec.add_argument("--workload", required=True)
    p_rec.add_argument("--sla", default="balanced")
    p_rec.add_argument("--gpus", type=int, required=True, help="current GPU allocation")
    p_rec.add_argument("--cpus", type=int, required=True, help="current CPU allocation")
    return parser


_RUN_KNOBS = {
    "tau_change": float, "alpha": float, "beta": float, "gamma": float,
    "gpu_util_target": float, "cpu_util_target": float, "reward_clip": float,
    "entropy_coef": float, "pretrain_epochs": int, "basic_cpus": int,
    "adapt_weights_enabled": lambda v: bool(int(v)),
    "g_max": int, "c_max": int, "gpu_hourly_usd": float, "cpu_hourly_usd": float,
}


def _apply_run_config(cfg: RunConfig, path: str) -> RunConfig:
    values = parse_kv_file(path)
    unknown = set(values) - set(_RUN_KNOBS)
    if unknown:
        raise ConfigError(f"{path}: unknown run knobs: {', '.join(sorted(unknown))}")
    fields: dict = {}
    bounds = cfg.bounds
    rates = cfg.rates
    for key, cast in _RUN_KNOBS.items():
        if key not in values:
            continue
        try:
            value = cast(values[key])
        except ValueError:
            raise ConfigError(f"{path}: key {key!r} has invalid value {values[key]!r}") from None
        if key == "g_max":
            bounds = replace(bounds, g_max=value)
        elif key == "c_max":
            bounds = replace(bounds, c_max=value)
        elif key == "gpu_hourly_usd":
            rates = replace(rates, gpu_hourly_usd=value)
        elif key == "cpu_hourly_usd":
            rates = replace(rates, cpu_hourly_usd=value)
        else:
            fields[key] = value
    return replace(cfg, bounds=bounds, rates=rates, **fields)


def _write_run_outputs(result: RunResult, out_dir: Path, figures: bool) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    trace_path = out_dir / "trace.csv"
    write_trace_csv(trace_path, result.trace)
    written.append(trace_path)
    pareto_path = out_dir / "pareto.csv"
    write_pareto_csv(pareto_path, result.front)
    written.append(pareto_path)
    summary_path = out_dir / "summary.txt"
    result.optimized_summary.save(summary_path)
    written.append(summary_path)
    baseline_path = out_dir / "baseline_summary.txt"
    result.baseline_summary.save(baseline_path)
    written.append(baseline_path)
    report_path = out_dir / "report.txt"
    report_path.write_text(
        render_report(result.baseline_summary, result.optimized_summary,
                      list(result.report.recommendations)),
        encoding="utf-8",
    )
    written.append(report_path)
    history_path = out_dir / "history.csv"
    write_history(history_path, result.trace, result.config.workload)
    written.append(history_path)
    if figures:
        fig_dir = out_dir / "figures"
        fig_dir.mkdir(exist_ok=True)
        written.append(save_allocation_figure(result.trace, fig_dir / "allocation.png"))
        points = [o.point for o in result.episodes]
        written.append(save_pareto_figure(points, result.front, result.selected.point,
                                          fig_dir / "pareto.png"))
    return written


def _cmd_run(args: argparse.Namespace) -> int:
    workload = load_workload(args.workload)
    sla = parse_sla_option(args.sla)
    logs = tuple(read_history(args.logs)) if args.logs else None
    cfg = RunConfig(
        workload=workload, sla=sla, method=Method.from_string(args.method),
        episodes=args.episodes, seed=args.seed, noiseless=args.noiseless,
        logs=logs, checkpoint_in=args.load_nets, checkpoint_out=args.save_nets,
    )
    if args.run_config:
        cfg = _apply_run_config(cfg, args.run_config)
    result = run(cfg)
    out_dir = Path(args.out_dir)
    written = _write_run_outputs(result, out_dir, figures=not args.no_figures)

    s = result.optimized_summary
    point = result.selected.point
    print(f"method={cfg.method.value} mode={sla.mode.value} seed={cfg.seed} "
          f"episodes={len(result.episodes)} decisions={sum(o.decisions for o in result.episodes)}")
    print(f"selected: {s.gpus} GPUs, {s.cpus} CPUs; total_time_min={point.total_time_s / 60:.2f} "
          f"total_cost_usd={point.total_cost_usd:.2f} sla_compliant={'yes' if point.sla_compliant else 'no'}")
    print("wrote: " + ", ".join(str(p) for p in written))
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    workload = load_workload(args.workload)
    base_sla = parse_sla_option(args.sla)
    if args.methods:
        methods = [Method.from_string(m) for m in args.methods.split(",")]
    else:
        methods = list(Method)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows: list[dict] = []
    for mode in (PreferenceMode.TIME, PreferenceMode.COST, PreferenceMode.BALANCED):
        sla = replace(base_sla, mode=mode)
        log_pool: list = []
        for method in methods:
            cfg = RunConfig(
                workload=workload, sla=sla, method=method, episodes=args.episodes,
                seed=args.seed, noiseless=args.noiseless,
                logs=tuple(log_pool[-2000:]) or None if method in (Method.WITH_TARGET_LOGS, Method.FULL) else None,
            )
            if args.run_config:
                cfg = _apply_run_config(cfg, args.run_config)
            try:
                result = run(cfg)
            except ConfigError as exc:
                print(f"skipping {method.value}/{mode.value}: {exc}", file=sys.stderr)
                continue
            log_pool.extend(rows_from_records(result.trace, workload))
            point = result.selected.point
            baseline = result.baseline_summary
            time_impr = (baseline.total_time_s - point.total_time_s) / baseline.total_time_s * 100.0
            cost_impr = (baseline.total_cost_usd - point.total_cost_usd) / baseline.total_cost_usd * 100.0
            priority = {"time": time_impr, "cost": cost_impr,
                        "balanced": (time_impr + cost_impr) / 2.0}[mode.value]
            rows.append({
                "method": method.value, "preference": mode.value,
                "total_time_s": point.total_time_s, "total_cost_usd": point.total_cost_usd,
                "time_improvement_pct": time_impr, "cost_improvement_pct": cost_impr,
                "priority_improvement_pct": priority,
            })
            print(f"{method.value:>17} {mode.value:>9}: time={point.total_time_s / 60:8.2f} min "
                  f"cost=${point.total_cost_usd:7.2f} priority_improvement={priority:6.1f}%")

    bench_path = out_dir / "bench.csv"
    with bench_path.open("w", newline="") as fh:
        fh.write(BENCH_HEADER + "\n")
        for row in rows:
            fh.write(f"{row['method']},{row['preference']},{row['total_time_s']!r},"
                     f"{row['total_cost_usd']!r},{row['time_improvement_pct']!r},"
                     f"{row['cost_improvement_pct']!r},{row['priority_improvement_pct']!r}\n")
    written = [bench_path]
    if not args.no_figures:
        fig_dir = out_dir / "figures"
        fig_dir.mkdir(exist_ok=True)
        written.append(save_bench_figure(rows, fig_dir / "bench.png"))
    print("wrote: " + ", ".join(str(p) for p in written))
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    baseline = RunSummary.load(args.baseline)
    optimized = RunSummary.load(args.optimized)
    recs = recommend(optimized.workload(), ResourceConfig(optimized.gpus, optimized.cpus))
    text = render_report(baseline, optimized, recs)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote: {args.out}")
    else:
        print(text, end="")
    return 0


def _cmd_recommend(args: argparse.Namespace) -> int:
    workload = load_workload(args.workload)
    parse_sla_option(args.sla)  # validate mode/targets even though planning is preference-free
    try:
        current = ResourceConfig(args.gpus, args.cpus)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    for rec in recommend(workload, current):
        print(f"{rec.label} Option:")
        print(f"GPUs: {rec.config.gpus}, CPUs: {rec.config.cpus}, Memory: {rec.memory_gb:.1f} GB")
        print(f"Estimated time: {rec.est_time_min:.2f} min ({rec.change_pct:.1f}% change), "
              f"Cost: ${rec.est_cost_usd:.2f} (for complete training)")
        print(f"Description: {rec.description}")
        print()
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.verb == "run":
            return _cmd_run(args)
        if args.verb == "bench":
            return _cmd_bench(args)
        if args.verb == "report":
            return _cmd_report(args)
        return _cmd_recommend(args)
    except SLASpecError as exc:
        print(f"error: invalid SLA spec: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, LogParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
