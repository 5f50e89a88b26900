"""Power telemetry collection and parsing.

Timelines are ordered (t_ms, watts) samples from one source: a live GPU
management-tool CSV stream, a Cray-style pm_counters file, a RAPL-style
energy counter (power derived by finite differences), or a replay file.
Samples are taken at face value; no smoothing, and parsers never invent
samples for gaps.
"""

from __future__ import annotations

import csv
import io
import threading
import time
from dataclasses import dataclass, replace
from datetime import datetime

from .errors import FormatError, InsufficientDataError, SourceError

DEFAULT_INTERVAL_MS = 100.0
MAX_CONSECUTIVE_FAILURES = 10

TIMELINE_SCHEMA = "entrobench-timeline v1"
TIMELINE_HEADER = "t_ms,watts,source"


@dataclass(frozen=True)
class PowerSample:
    t_ms: float
    watts: float
    source: str

    def __post_init__(self):
        if not (self.t_ms >= 0.0 and self.t_ms == self.t_ms):
            raise FormatError(f"t_ms must be nonnegative and finite, got {self.t_ms}")
        if not self.watts >= 0.0:
            raise FormatError(f"watts must be nonnegative, got {self.watts}")


@dataclass(frozen=True)
class Timeline:
    samples: tuple[PowerSample, ...]
    source: str
    epoch: float = 0.0
    interval_ms: float = DEFAULT_INTERVAL_MS
    gap_count: int = 0
    skipped_rows: int = 0

    def __post_init__(self):
        if self.interval_ms <= 0:
            raise FormatError(f"interval_ms must be positive, got {self.interval_ms}")
        times = [s.t_ms for s in self.samples]
        for prev, cur in zip(times, times[1:]):
            if cur <= prev:
                raise FormatError(
                    f"samples must be strictly increasing in t_ms ({prev} -> {cur})"
                )

    def __len__(self) -> int:
        return len(self.samples)


class SourceGap(Exception):
    """One unreadable poll; recorded as a missing sample, not a value."""


class ReplaySource:
    """Pre-recorded (t_ms, watts) pairs, emitted verbatim by sample_loop."""

    def __init__(self, samples, name: str = "replay"):
        self.name = name
        if isinstance(samples, Timeline):
            self._pairs = [(s.t_ms, s.watts) for s in samples.samples]
        else:
            self._pairs = [(float(t), float(w)) for t, w in samples]

    def pairs(self):
        return list(self._pairs)


class CallablePowerSource:
    """Wraps a zero-argument callable returning instantaneous watts."""

    def __init__(self, fn, name: str = "power"):
        self._fn = fn
        self.name = name

    def read(self) -> float:
        return float(self._fn())


class FilePowerSource:
    """Reads a pm_counters-style power file on every poll.

    Default live path on Cray nodes: /sys/cray/pm_counters/power.
    """

    def __init__(self, path, name: str = "pm_counters"):
        self.path = path
        self.name = name

    def read(self) -> float:
        with open(self.path) as fh:
            return parse_pm_counters(fh.read()).watts


class EnergyCounterSource:
    """Monotone energy counter (joules); power by finite difference.

    The first read and any counter wrap (value decreasing) yield flagged
    gaps, never a fabricated or negative wattage.
    """

    def __init__(self, read_joules, name: str = "energy", scale: float = 1.0):
        self._read = read_joules
        self._scale = scale  # e.g. 1e-6 for RAPL microjoule counters
        self.name = name
        self._last: tuple[float, float] | None = None  # (joules, perf seconds)

    def read(self) -> float:
        joules = float(self._read()) * self._scale
        now = time.perf_counter()
        last = self._last
        self._last = (joules, now)
        if last is None:
            raise SourceGap("first counter read establishes the baseline")
        if joules < last[0]:
            raise SourceGap("energy counter wrapped")
        dt = now - last[1]
        if dt <= 0:
            raise SourceGap("non-advancing clock between counter reads")
        return (joules - last[0]) / dt


def sample_loop(source, interval_ms: float, stop_signal: threading.Event) -> Timeline:
    """Poll a source at a nominal interval until stop_signal fires.

    Actual timestamps are recorded (jitter preserved).  Read failures are
    recorded as gaps; more than MAX_CONSECUTIVE_FAILURES in a row aborts
    with a SourceError.
    """
    if interval_ms < 1:
        raise FormatError(f"interval_ms must be >= 1, got {interval_ms}")

    if isinstance(source, ReplaySource):
        samples = []
        for t_ms, watts in source.pairs():
            if stop_signal.is_set():
                break
            samples.append(PowerSample(t_ms=t_ms, watts=watts, source=source.name))
        return Timeline(samples=tuple(samples), source=source.name,
                        interval_ms=interval_ms)

    samples = []
    gaps = 0
    consecutive_failures = 0
    epoch = time.perf_counter()
    tick = 0
    while not stop_signal.is_set():
        tick += 1
        try:
            watts = source.read()
        except SourceGap:
            gaps += 1
        except Exception as exc:  # noqa: BLE001 - counted, then surfaced
            gaps += 1
            consecutive_failures += 1
            if consecutive_failures > MAX_CONSECUTIVE_FAILURES:
                raise SourceError(
                    f"source {source.name} failed {consecutive_failures} "
                    f"consecutive reads: {exc}"
                ) from exc
        else:
            consecutive_failures = 0
            t_ms = (time.perf_counter() - epoch) * 1000.0
            if not samples or t_ms > samples[-1].t_ms:
                samples.append(PowerSample(t_ms=t_ms, watts=watts, source=source.name))
        next_deadline = epoch + tick * interval_ms / 1000.0
        remaining = next_deadline - time.perf_counter()
        if remaining > 0:
            stop_signal.wait(remaining)
    return Timeline(samples=tuple(samples), source=source.name,
                    interval_ms=interval_ms, gap_count=gaps)


class Sampler:
    """Runs sample_loop on a background thread alongside the workload."""

    def __init__(self, source, interval_ms: float = DEFAULT_INTERVAL_MS):
        self.source = source
        self.interval_ms = interval_ms
        self.name = getattr(source, "name", "source")
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self._timeline: Timeline | None = None
        self._error: Exception | None = None
        self.epoch_perf: float = 0.0

    def start(self) -> None:
        self.epoch_perf = time.perf_counter()
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def _run(self) -> None:
        try:
            self._timeline = sample_loop(self.source, self.interval_ms, self._stop)
        except Exception as exc:  # noqa: BLE001 - reraised in stop()
            self._error = exc

    def stop(self) -> Timeline:
        self._stop.set()
        if self._thread is not None:
            self._thread.join()
        if self._error is not None:
            raise self._error
        assert self._timeline is not None
        return replace(self._timeline, epoch=self.epoch_perf)


def _parse_smi_timestamp(text: str) -> datetime:
    for fmt in ("%Y/%m/%d %H:%M:%S.%f", "%Y/%m/%d %H:%M:%S"):
        try:
            return datetime.strptime(text.strip(), fmt)
        except ValueError:
            continue
    raise FormatError(f"unparseable timestamp {text!r}")


_UNAVAILABLE = {"N/A", "[Not Supported]", "[N/A]"}


def parse_power_csv(text: str) -> Timeline:
    """Parse the GPU management tool's query-CSV dialect.

    Expected: a header row naming timestamp and power.draw columns, then
    rows like `2022/09/01 10:00:00.123, 238.51 W`.  Timestamps become t_ms
    relative to the first valid row; unavailable readings are skipped and
    counted.
    """
    lines = text.splitlines()
    header_idx = None
    for idx, line in enumerate(lines):
        if line.strip():
            header_idx = idx
            break
    if header_idx is None:
        raise FormatError("empty power CSV")
    header = [cell.strip().lower() for cell in lines[header_idx].split(",")]
    if len(header) < 2 or "timestamp" not in header[0] or "power.draw" not in header[1]:
        raise FormatError(
            f"line {header_idx + 1}: expected 'timestamp, power.draw [W]' header, "
            f"got {lines[header_idx]!r}"
        )

    samples = []
    skipped = 0
    t0 = None
    for lineno, line in enumerate(lines[header_idx + 1:], start=header_idx + 2):
        if not line.strip():
            continue
        cells = [cell.strip() for cell in line.split(",")]
        if len(cells) < 2:
            raise FormatError(f"line {lineno}: expected 2 columns, got {line!r}")
        if cells[1] in _UNAVAILABLE:
            skipped += 1
            continue
        stamp = _parse_smi_timestamp(cells[0])
        value = cells[1]
        if value.endswith("W"):
            value = value[:-1].strip()
        try:
            watts = float(value)
        except ValueError:
            raise FormatError(f"line {lineno}: bad power value {cells[1]!r}") from None
        if t0 is None:
            t0 = stamp
        t_ms = (stamp - t0).total_seconds() * 1000.0
        samples.append(PowerSample(t_ms=t_ms, watts=watts, source="power_csv"))

    if not samples:
        raise InsufficientDataError("power CSV contains zero valid rows")
    return Timeline(samples=tuple(samples), source="power_csv",
                    skipped_rows=skipped)


def parse_pm_counters(text: str) -> PowerSample:
    """Parse one pm_counters line: `<value> W <timestamp_us>`.

    Energy files (unit J) must go through the counter finite-difference
    path instead; a non-W unit is rejected here.
    """
    tokens = text.split()
    if len(tokens) != 3:
        raise FormatError(f"expected '<value> <unit> <timestamp>', got {text!r}")
    value, unit, stamp = tokens
    if unit != "W":
        raise FormatError(f"expected unit W, got {unit!r}")
    try:
        watts = float(value)
        t_us = int(stamp)
    except ValueError:
        raise FormatError(f"non-numeric pm_counters fields in {text!r}") from None
    return PowerSample(t_ms=t_us / 1000.0, watts=watts, source="pm_counters")


def timeline_to_text(timeline: Timeline) -> str:
    """Bit-exact CSV form: schema comment, header, one sample per row."""
    out = io.StringIO()
    out.write(
        f"# {TIMELINE_SCHEMA} source={timeline.source} epoch={timeline.epoch!r} "
        f"interval_ms={timeline.interval_ms!r}\n"
    )
    out.write(TIMELINE_HEADER + "\n")
    for s in timeline.samples:
        out.write(f"{s.t_ms!r},{s.watts!r},{s.source}\n")
    return out.getvalue()


def timeline_from_text(text: str) -> Timeline:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(f"# {TIMELINE_SCHEMA}"):
        raise FormatError("unrecognized timeline schema version")
    meta = dict(
        part.split("=", 1)
        for part in lines[0][2 + len(TIMELINE_SCHEMA):].split()
        if "=" in part
    )
    if len(lines) < 2 or lines[1] != TIMELINE_HEADER:
        raise FormatError(f"expected header {TIMELINE_HEADER!r}")
    samples = []
    seen = set()
    for row in csv.reader(lines[2:]):
        if not row:
            continue
        t_ms, watts, source = float(row[0]), float(row[1]), row[2]
        if t_ms in seen:
            raise FormatError(f"duplicate t_ms {t_ms}")
        seen.add(t_ms)
        samples.append(PowerSample(t_ms=t_ms, watts=watts, source=source))
    return Timeline(
        samples=tuple(samples),
        source=meta.get("source", "timeline"),
        epoch=float(meta.get("epoch", 0.0)),
        interval_ms=float(meta.get("interval_ms", DEFAULT_INTERVAL_MS)),
    )


def write_timeline(timeline: Timeline, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(timeline_to_text(timeline))


def read_timeline(path) -> Timeline:
    with open(path) as fh:
        return timeline_from_text(fh.read())
