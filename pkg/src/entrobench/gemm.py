"""DGEMM workload execution under the measured-power protocol.

An experiment generates one operand pair, runs an untimed warm-up phase
for a configured number of seconds, then runs a fixed count of timed
back-to-back C <- alpha*A*B + beta*C multiplications against a pluggable
backend.  The output matrix is carried across repetitions without
re-zeroing; FLOP accounting uses the standard 2*N^3 per multiplication.
"""

from __future__ import annotations

import subprocess
import time
from dataclasses import dataclass

import numpy as np

from . import patterns
from .errors import ConfigError, SourceError
from .patterns import Family, MatrixPair, PatternSpec, generate

DEFAULT_REPS = 100
DEFAULT_WARMUP_SECONDS = 60.0


@dataclass(frozen=True)
class GemmConfig:
    pattern: PatternSpec
    reps: int = DEFAULT_REPS
    alpha: float = 1.0
    beta: float = 1.0
    backend_id: str = "reference"
    warmup_seconds: float = DEFAULT_WARMUP_SECONDS

    def __post_init__(self):
        if self.reps < 1:
            raise ConfigError(f"reps must be >= 1, got {self.reps}")
        if self.warmup_seconds < 0:
            raise ConfigError("warmup_seconds must be nonnegative")

    @property
    def n_dim(self) -> int:
        return self.pattern.n_dim


@dataclass(frozen=True)
class RunRecord:
    """Provenance for one experiment: timings, FLOP accounting, checksum."""

    config: GemmConfig
    warmup_seconds: float
    warmup_iterations: int
    measured_seconds: float
    total_flops: int
    flop_rate: float
    checksum: float
    checksum_bits: str
    timeline_ids: tuple[str, ...] = ()
    node_id: str = "local"
    run_index: int = 0
    # Measured-phase window in the epoch frame of the attached timelines.
    measured_start_ms: float = 0.0
    measured_end_ms: float = 0.0
    warnings: tuple[str, ...] = ()


def flop_count(n_dim: int, reps: int) -> int:
    """reps * 2 * N^3; the alpha/beta 3N^2 term is excluded by convention."""
    if n_dim < 1 or reps < 1:
        raise ConfigError("n_dim and reps must be positive")
    return reps * 2 * n_dim ** 3


def reference_gemm(a, b, c, alpha: float = 1.0, beta: float = 1.0) -> np.ndarray:
    """C' = alpha*A*B + beta*C with ascending-k per-cell summation.

    The per-cell accumulation order makes results bit-reproducible and
    bit-identical to a naive scalar triple loop.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    n = a.shape[0]
    for m in (a, b, c):
        if m.shape != (n, n):
            raise ConfigError(f"operands must all be {n}x{n}, got {m.shape}")
    out = np.empty((n, n))
    for i in range(n):
        row_a = a[i]
        acc = np.zeros(n)
        for k in range(n):
            acc = acc + row_a[k] * b[k]
        out[i] = alpha * acc + beta * c[i]
    return out


def checksum(c: np.ndarray) -> tuple[float, str]:
    """Sum of all elements in ascending row-major order, plus its bit pattern."""
    total = 0.0
    for v in c.ravel():
        total += float(v)
    bits = np.float64(total).view(np.uint64)
    return total, f"{int(bits):016x}"


@dataclass(frozen=True)
class Backend:
    run: object  # callable (a, b, c, alpha, beta) -> c'
    supports_gpu: bool = False
    in_process: bool = True
    fpu_path: str | None = None


_BACKENDS: dict[str, Backend] = {}


def register_backend(backend_id: str, backend: Backend) -> None:
    _BACKENDS[backend_id] = backend


def get_backend(backend_id: str) -> Backend:
    try:
        return _BACKENDS[backend_id]
    except KeyError:
        raise ConfigError(
            f"backend {backend_id!r} is not registered "
            f"(known: {sorted(_BACKENDS)})"
        ) from None


def backend_ids() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


register_backend("reference", Backend(run=reference_gemm))


def make_subprocess_backend(command: list[str], workdir) -> Backend:
    """Backend that hands operands to an external program via raw files.

    Protocol: the runner writes a.bin / b.bin / c.bin (raw little-endian
    float64, row-major) plus an `input.manifest` key=value file with n,
    alpha, beta, and the file names, then invokes `command input.manifest`.
    The program must exit 0 and leave a `result.manifest` with at least
    wall_seconds and the output file name (c_out, same raw layout).
    """
    from pathlib import Path

    workdir = Path(workdir)

    def run(a, b, c, alpha, beta):
        workdir.mkdir(parents=True, exist_ok=True)
        n = a.shape[0]
        patterns.dump_matrix(a, workdir / "a.bin")
        patterns.dump_matrix(b, workdir / "b.bin")
        patterns.dump_matrix(c, workdir / "c.bin")
        (workdir / "input.manifest").write_text(
            f"n={n}\nalpha={alpha!r}\nbeta={beta!r}\na=a.bin\nb=b.bin\nc=c.bin\n"
        )
        proc = subprocess.run(
            [*command, "input.manifest"], cwd=workdir,
            capture_output=True, text=True,
        )
        if proc.returncode != 0:
            raise SourceError(
                f"backend command {command} exited {proc.returncode}: {proc.stderr}"
            )
        result = {}
        for line in (workdir / "result.manifest").read_text().splitlines():
            if "=" in line:
                key, _, value = line.partition("=")
                result[key.strip()] = value.strip()
        if "wall_seconds" not in result:
            raise SourceError("backend result.manifest is missing wall_seconds")
        return patterns.load_matrix(workdir / result.get("c_out", "c_out.bin"), n)

    return Backend(run=run, in_process=False)


def initial_c(spec: PatternSpec) -> float:
    """C starts at 1.0 for the fixed-input baseline, 0.0 otherwise."""
    return patterns.FIXED_C_INIT if spec.family is Family.BASELINE_FIXED else 0.0


def run_experiment(
    config: GemmConfig,
    samplers=(),
    node_id: str = "local",
    run_index: int = 0,
) -> tuple[RunRecord, dict]:
    """Execute one experiment; returns (record, {timeline_id: Timeline}).

    Samplers (telemetry.Sampler) run concurrently with the workload.  A
    sampler that fails to start degrades the run to empty timeline_ids with
    a warning flag rather than aborting: power-less runs still carry valid
    FLOP-rate data.
    """
    backend = get_backend(config.backend_id)
    pair: MatrixPair = generate(config.pattern)
    c = np.full((config.n_dim, config.n_dim), initial_c(config.pattern))

    warnings = []
    started = []
    for sampler in samplers:
        try:
            sampler.start()
            started.append(sampler)
        except Exception as exc:  # noqa: BLE001 - degrade, don't abort
            warnings.append(f"sampler {getattr(sampler, 'name', '?')} failed: {exc}")

    def one_gemm(c):
        return backend.run(pair.a, pair.b, c, config.alpha, config.beta)

    warmup_iters = 0
    t0 = time.perf_counter()
    while time.perf_counter() - t0 < config.warmup_seconds:
        c = one_gemm(c)
        warmup_iters += 1
    warmup_elapsed = time.perf_counter() - t0

    t_start = time.perf_counter()
    for _ in range(config.reps):
        c = one_gemm(c)
    t_end = time.perf_counter()
    measured = max(t_end - t_start, 1e-9)

    timelines = {}
    window = (0.0, measured * 1000.0)
    for idx, sampler in enumerate(started):
        timeline = sampler.stop()
        tid = f"{timeline.source}-{idx}"
        timelines[tid] = timeline
        if hasattr(getattr(sampler, "source", None), "pairs"):
            # replayed sources carry their own time base; the recorded span
            # is the measured window
            if timeline.samples:
                window = (timeline.samples[0].t_ms, timeline.samples[-1].t_ms)
        else:
            window = (
                (t_start - sampler.epoch_perf) * 1000.0,
                (t_end - sampler.epoch_perf) * 1000.0,
            )

    total = flop_count(config.n_dim, config.reps)
    csum, cbits = checksum(c)
    record = RunRecord(
        config=config,
        warmup_seconds=warmup_elapsed,
        warmup_iterations=warmup_iters,
        measured_seconds=measured,
        total_flops=total,
        flop_rate=total / measured,
        checksum=csum,
        checksum_bits=cbits,
        timeline_ids=tuple(timelines),
        node_id=node_id,
        run_index=run_index,
        measured_start_ms=window[0],
        measured_end_ms=window[1],
        warnings=tuple(warnings),
    )
    return record, timelines
