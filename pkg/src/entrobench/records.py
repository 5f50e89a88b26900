"""RunRecord persistence: one CSV file per run (header row + data row)."""

from __future__ import annotations

import csv
import io

from .errors import FormatError
from .gemm import GemmConfig, RunRecord
from .patterns import PatternSpec

RECORD_SCHEMA = "entrobench-record v1"

_FIELDS = (
    "family", "n", "level", "value_mode", "seed",
    "reps", "alpha", "beta", "backend", "warmup_seconds_config",
    "warmup_seconds", "warmup_iterations", "measured_seconds",
    "total_flops", "flop_rate", "checksum", "checksum_bits",
    "node_id", "run_index", "measured_start_ms", "measured_end_ms",
    "timeline_ids", "warnings",
)


def record_to_text(record: RunRecord) -> str:
    cfg = record.config
    row = {
        "family": cfg.pattern.family.value,
        "n": cfg.pattern.n_dim,
        "level": cfg.pattern.level,
        "value_mode": cfg.pattern.value_mode.value,
        "seed": cfg.pattern.seed,
        "reps": cfg.reps,
        "alpha": repr(cfg.alpha),
        "beta": repr(cfg.beta),
        "backend": cfg.backend_id,
        "warmup_seconds_config": repr(cfg.warmup_seconds),
        "warmup_seconds": repr(record.warmup_seconds),
        "warmup_iterations": record.warmup_iterations,
        "measured_seconds": repr(record.measured_seconds),
        "total_flops": record.total_flops,
        "flop_rate": repr(record.flop_rate),
        "checksum": repr(record.checksum),
        "checksum_bits": record.checksum_bits,
        "node_id": record.node_id,
        "run_index": record.run_index,
        "measured_start_ms": repr(record.measured_start_ms),
        "measured_end_ms": repr(record.measured_end_ms),
        "timeline_ids": ";".join(record.timeline_ids),
        "warnings": ";".join(record.warnings),
    }
    buf = io.StringIO()
    buf.write(f"# {RECORD_SCHEMA}\n")
    writer = csv.DictWriter(buf, fieldnames=_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerow(row)
    return buf.getvalue()


def record_from_text(text: str) -> RunRecord:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(f"# {RECORD_SCHEMA}"):
        raise FormatError("unrecognized record schema version")
    rows = list(csv.DictReader(lines[1:]))
    if len(rows) != 1:
        raise FormatError(f"record file must hold exactly one row, got {len(rows)}")
    row = rows[0]
    try:
        pattern = PatternSpec(
            family=row["family"],
            n_dim=int(row["n"]),
            level=int(row["level"]),
            value_mode=row["value_mode"],
            seed=int(row["seed"]),
        )
        config = GemmConfig(
            pattern=pattern,
            reps=int(row["reps"]),
            alpha=float(row["alpha"]),
            beta=float(row["beta"]),
            backend_id=row["backend"],
            warmup_seconds=float(row["warmup_seconds_config"]),
        )
        return RunRecord(
            config=config,
            warmup_seconds=float(row["warmup_seconds"]),
            warmup_iterations=int(row["warmup_iterations"]),
            measured_seconds=float(row["measured_seconds"]),
            total_flops=int(row["total_flops"]),
            flop_rate=float(row["flop_rate"]),
            checksum=float(row["checksum"]),
            checksum_bits=row["checksum_bits"],
            timeline_ids=tuple(t for t in row["timeline_ids"].split(";") if t),
            node_id=row["node_id"],
            run_index=int(row["run_index"]),
            measured_start_ms=float(row["measured_start_ms"]),
            measured_end_ms=float(row["measured_end_ms"]),
            warnings=tuple(w for w in row["warnings"].split(";") if w),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed record file: {exc}") from exc


def write_record(record: RunRecord, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(record_to_text(record))


def read_record(path) -> RunRecord:
    with open(path) as fh:
        return record_from_text(fh.read())
