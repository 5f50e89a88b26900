"""Command-line orchestration: run, sweep, replay, score, fixtures.

One command per process.  Exit codes are machine-checkable for batch
schedulers: 0 success, 2 configuration error, 3 source/backend error,
4 insufficient data.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import analysis, fixtures, model, records, telemetry
from .errors import ConfigError, EntrobenchError, InsufficientDataError, SourceError
from .gemm import run_experiment
from .manifest import (
    ExperimentManifest,
    load_manifest,
    manifest_digest,
    manifest_to_text,
)
from .patterns import BASELINE_FAMILIES, PatternSpec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOURCE = 3
EXIT_DATA = 4

SUMMARY_HEADER = "family,level,value_mode,mean_w,tdp_frac,flop_rate,pj_per_flop_vs_fixed"
SERIES_HEADER = "family,value_mode,level,mean_w,tdp_w,baseline_random_w,baseline_fixed_w"
SCORE_HEADER = "family,level,value_mode,score_per_flop,mul_toggles,acc_toggles,flops"


def build_sampler(descriptor: str, interval_ms: float) -> telemetry.Sampler:
    """Source descriptors: replay:<timeline.csv>, pm:<path>, rapl:<path>."""
    kind, _, arg = descriptor.partition(":")
    if kind == "replay":
        try:
            source = telemetry.ReplaySource(telemetry.read_timeline(arg))
        except OSError as exc:
            raise ConfigError(f"cannot read replay timeline {arg!r}: {exc}") from exc
    elif kind == "pm":
        source = telemetry.FilePowerSource(arg or "/sys/cray/pm_counters/power")
    elif kind == "rapl":
        path = arg

        def read_uj(path=path):
            return float(Path(path).read_text().split()[0])

        source = telemetry.EnergyCounterSource(read_uj, name="rapl", scale=1e-6)
    else:
        raise ConfigError(f"unknown telemetry source descriptor {descriptor!r}")
    return telemetry.Sampler(source, interval_ms=interval_ms)


def _summary_row(record, timelines, m: ExperimentManifest) -> dict:
    cfg = record.config
    row = {
        "family": cfg.pattern.family.value,
        "level": cfg.pattern.level,
        "value_mode": cfg.pattern.value_mode.value,
        "mean_w": "",
        "tdp_frac": "",
        "flop_rate": repr(record.flop_rate),
        "pj_per_flop_vs_fixed": "",
    }
    if timelines:
        first_id = record.timeline_ids[0] if record.timeline_ids else next(iter(timelines))
        stats = analysis.steady_state_window(
            timelines[first_id], record, trim_fraction=m.trim_fraction
        )
        row["mean_w"] = repr(stats.mean_w)
        row["tdp_frac"] = repr(analysis.tdp_fraction(stats.mean_w, m.tdp_w))
        row["pj_per_flop_vs_fixed"] = repr(
            analysis.pj_per_flop(stats.mean_w - m.baseline_fixed_w, record.flop_rate)
        )
    return row


def _write_summary(rows, path) -> None:
    keys = SUMMARY_HEADER.split(",")
    lines = [SUMMARY_HEADER]
    lines += [",".join(str(row[k]) for k in keys) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def _write_series(series: analysis.SweepSeries, path) -> None:
    lines = [SERIES_HEADER]
    for level, mean_w in series.points:
        lines.append(
            f"{series.family},{series.value_mode},{level},{mean_w!r},"
            f"{series.tdp_w!r},{series.baseline_random_w!r},{series.baseline_fixed_w!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def execute_run(m: ExperimentManifest, run_dir: Path, run_index: int = 0) -> dict:
    """Run one experiment and persist all artifacts; returns the summary row."""
    run_dir.mkdir(parents=True, exist_ok=True)
    phase = "configure"
    try:
        m.require_backend()
        (run_dir / "manifest").write_text(manifest_to_text(m))
        (run_dir / "manifest.sha256").write_text(manifest_digest(m) + "\n")

        phase = "telemetry-setup"
        samplers = [build_sampler(d, m.interval_ms) for d in m.sources]

        phase = "workload"
        record, timelines = run_experiment(
            m.gemm_config(), samplers=samplers,
            node_id=m.node_id, run_index=run_index,
        )

        phase = "persist"
        records.write_record(record, run_dir / "record.csv")
        for tid, timeline in timelines.items():
            telemetry.write_timeline(timeline, run_dir / f"timeline-{tid}.csv")

        phase = "summarize"
        row = _summary_row(record, timelines, m)
        _write_summary([row], run_dir / "summary.csv")
        return row
    except Exception as exc:
        (run_dir / "failed").write_text(f"phase={phase}\nerror={exc}\n")
        raise


def _load_run_dir(run_dir: Path):
    record = records.read_record(run_dir / "record.csv")
    timelines = {}
    for path in sorted(run_dir.glob("timeline-*.csv")):
        tid = path.stem[len("timeline-"):]
        timelines[tid] = telemetry.read_timeline(path)
    return record, timelines


def discover_run_dirs(paths) -> list[Path]:
    found = []
    for path in paths:
        path = Path(path)
        if (path / "record.csv").exists():
            found.append(path)
        else:
            found.extend(p.parent for p in sorted(path.glob("**/record.csv")))
    return sorted(set(found))


def cmd_run(m: ExperimentManifest, out: Path) -> int:
    for rep in range(m.repetitions_per_node):
        run_dir = out / f"run-{rep:03d}" if m.repetitions_per_node > 1 else out
        row = execute_run(m, run_dir, run_index=rep)
        print(f"run {run_dir}: {row['family']} L{row['level']} "
              f"mean_w={row['mean_w'] or 'n/a'}")
    return EXIT_OK


def cmd_sweep(m: ExperimentManifest, out: Path) -> int:
    if m.pattern.is_baseline:
        raise ConfigError("sweep requires a pattern family, not a baseline")
    plan = m.sweep or None
    modes = plan.value_modes if plan else ("independent", "fixed_common")
    levels = m.sweep_levels()
    results = {}  # (mode) -> [(level, mean_w)]
    for mode in modes:
        for level in levels:
            spec = dataclasses.replace(m.pattern, level=level, value_mode=mode)
            sub = dataclasses.replace(m, pattern=spec, sweep=None)
            run_dir = out / f"{spec.family.value}-{mode}-L{level:02d}"
            try:
                row = execute_run(sub, run_dir)
            except EntrobenchError as exc:
                print(f"level {level} ({mode}) failed: {exc}", file=sys.stderr)
                continue
            if row["mean_w"]:
                results.setdefault(mode, []).append((level, float(row["mean_w"])))
    for mode, points in sorted(results.items()):
        series = analysis.sweep_series(
            m.pattern.family.value, mode, points,
            m.tdp_w, m.baseline_random_w, m.baseline_fixed_w,
        )
        _write_series(series, out / f"series-{m.pattern.family.value}-{mode}.csv")
    return EXIT_OK


def cmd_replay(inputs, out: Path, m: ExperimentManifest | None = None) -> int:
    run_dirs = discover_run_dirs(inputs)
    if not run_dirs:
        raise ConfigError("replay found no run directories (no record.csv)")
    out.mkdir(parents=True, exist_ok=True)

    defaults = m or _default_analysis_manifest()
    rows = []
    loaded = []
    for run_dir in run_dirs:
        record, timelines = _load_run_dir(run_dir)
        rows.append(_summary_row(record, timelines, defaults))
        loaded.append((record, rows[-1]))

    rows.sort(key=lambda r: (r["family"], r["value_mode"], r["level"]))
    _write_summary(rows, out / "summary.csv")

    by_curve = {}
    baselines = {}
    for record, row in loaded:
        family = record.config.pattern.family
        if not row["mean_w"]:
            continue
        mean_w = float(row["mean_w"])
        if family in BASELINE_FAMILIES:
            baselines[family.value] = mean_w
        else:
            key = (family.value, row["value_mode"])
            by_curve.setdefault(key, {})[row["level"]] = mean_w

    for (family, mode), level_means in sorted(by_curve.items()):
        if len(level_means) < 2:
            continue
        series = analysis.sweep_series(
            family, mode, level_means.items(),
            defaults.tdp_w, defaults.baseline_random_w, defaults.baseline_fixed_w,
        )
        _write_series(series, out / f"series-{family}-{mode}.csv")

    report_lines = []
    if "baseline_random" in baselines and "baseline_fixed" in baselines:
        pct = analysis.percent_increase(
            baselines["baseline_random"], baselines["baseline_fixed"]
        )
        report_lines.append(f"percent_increase={pct:.2f}")
    if report_lines:
        (out / "report.txt").write_text("\n".join(report_lines) + "\n")
        for line in report_lines:
            print(line)
    return EXIT_OK


def _default_analysis_manifest() -> ExperimentManifest:
    return ExperimentManifest(
        pattern=PatternSpec(family="baseline_fixed", n_dim=2),
        warmup_seconds=0.0,
    )


def cmd_score(m: ExperimentManifest, out: Path) -> int:
    plan = m.model
    if m.pattern.n_dim > plan.max_n_dim:
        raise ConfigError(
            f"n_dim={m.pattern.n_dim} exceeds the simulation budget "
            f"({plan.max_n_dim}); raise [model] max_n_dim to override"
        )
    tile = (plan.tile_m, plan.tile_n)
    if tile == (1, 1) and plan.lanes > 1:
        schedule = model.schedule_for_lanes(plan.lanes)
    else:
        schedule = model.Schedule(lanes=plan.lanes, tile=tile)

    if m.sweep is not None and not m.pattern.is_baseline:
        specs = [
            dataclasses.replace(m.pattern, level=level, value_mode=mode)
            for mode in m.sweep.value_modes
            for level in m.sweep_levels()
        ]
    else:
        specs = [m.pattern]

    ranked = model.predict_ordering(specs, schedule, plan.w_mul, plan.w_acc)
    for rank, (spec, report) in enumerate(ranked, start=1):
        print(f"#{rank} {spec.family.value} L{spec.level} {spec.value_mode.value} "
              f"score={report.score_per_flop:.3f}")

    by_key = sorted(
        ranked, key=lambda sr: (sr[0].family.value, sr[0].value_mode.value, sr[0].level)
    )
    lines = [SCORE_HEADER]
    for spec, report in by_key:
        lines.append(
            f"{spec.family.value},{spec.level},{spec.value_mode.value},"
            f"{report.score_per_flop!r},{report.mul_input_toggles},"
            f"{report.acc_toggles},{report.flops}"
        )
    out.mkdir(parents=True, exist_ok=True)
    (out / "score.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_fixtures(out: Path) -> int:
    """Emit the embedded recorded-measurement fixtures for inspection/replay."""
    out.mkdir(parents=True, exist_ok=True)
    count = 0
    for name, _spec, record, timeline in fixtures.iter_fixture_runs():
        run_dir = out / name
        run_dir.mkdir(exist_ok=True)
        records.write_record(record, run_dir / "record.csv")
        telemetry.write_timeline(timeline, run_dir / f"timeline-{record.timeline_ids[0]}.csv")
        count += 1
    print(f"wrote {count} fixture runs to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entrobench",
        description="Input-entropy power benchmarking for DGEMM workloads",
    )
    parser.add_argument("--manifest", help="experiment manifest path")
    parser.add_argument("--out", help="output directory (overrides manifest)")
    parser.add_argument("--seed", type=int, help="override pattern seed")
    parser.add_argument("--interval-ms", type=float, help="override sampling interval")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", help="run one experiment from a manifest")
    sub.add_parser("sweep", help="run all levels of a pattern family")
    replay = sub.add_parser("replay", help="re-analyze recorded runs")
    replay.add_argument("inputs", nargs="+", help="run directories or roots")
    sub.add_parser("score", help="toggle-model scoring of pattern specs")
    sub.add_parser("fixtures", help="emit embedded recorded fixtures")
    return parser


def _manifest_for(args) -> ExperimentManifest:
    if not args.manifest:
        raise ConfigError(f"{args.command} requires --manifest")
    m = load_manifest(args.manifest)
    if args.seed is not None:
        m = dataclasses.replace(
            m, pattern=dataclasses.replace(m.pattern, seed=args.seed)
        )
    if args.interval_ms is not None:
        m = dataclasses.replace(m, interval_ms=args.interval_ms)
    if args.out:
        m = dataclasses.replace(m, out_dir=args.out)
    return m


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fixtures":
            return cmd_fixtures(Path(args.out or "fixtures-out"))
        if args.command == "replay":
            m = load_manifest(args.manifest) if args.manifest else None
            return cmd_replay(args.inputs, Path(args.out or "replay-out"), m)
        m = _manifest_for(args)
        out = Path(m.out_dir)
        if args.command == "run":
            return cmd_run(m, out)
        if args.command == "sweep":
            return cmd_sweep(m, out)
        if args.command == "score":
            return cmd_score(m, out)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SourceError as exc:
        print(f"source/backend error: {exc}", file=sys.stderr)
        return EXIT_SOURCE
    except InsufficientDataError as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
