"""Desk-scale dynamic-power proxy: FMA operand bit-toggle counting.

Simulates the operand stream a lane-multiplexed, k-inner tiled GEMM would
feed one FMA port and counts cycle-to-cycle Hamming toggles over the two
64-bit multiplier operand words and the 64-bit accumulator word.  The
per-FLOP toggle score is a proxy for dynamic FPU power: it reproduces the
qualitative ordering of measured pattern power without hardware, not the
wattage itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .patterns import MatrixPair


@dataclass(frozen=True)
class Schedule:
    """Lane multiplexing model: interleaved logical threads per FMA port.

    `lanes` threads round-robin on one port, each owning one output cell of
    a (tm, tn) tile; tiles are traversed row-major with the k-loop inside.
    This is a declared model of warp/SMT time multiplexing, not a claim
    about any vendor kernel's real schedule.
    """

    lanes: int = 1
    tile: tuple[int, int] = (1, 1)
    traversal: str = "k_inner_row_major"

    def __post_init__(self):
        if self.lanes < 1:
            raise ConfigError(f"lanes must be >= 1, got {self.lanes}")
        tm, tn = self.tile
        if tm < 1 or tn < 1:
            raise ConfigError(f"tile dims must be positive, got {self.tile}")
        if (tm * tn) % self.lanes:
            raise ConfigError(
                f"tile of {tm * tn} cells does not divide evenly into "
                f"{self.lanes} lanes"
            )
        if self.traversal != "k_inner_row_major":
            raise ConfigError(f"unknown traversal {self.traversal!r}")


def schedule_for_lanes(lanes: int) -> Schedule:
    """Default schedule: one lane-group per most-square tile of `lanes` cells.

    A square footprint avoids degenerate operand sharing (a 1xL group reads
    the same A element on every lane of a cycle, which suppresses A-word
    toggles for high-entropy inputs and skews comparisons across patterns).
    """
    tm = 1
    for cand in range(1, int(lanes ** 0.5) + 1):
        if lanes % cand == 0:
            tm = cand
    return Schedule(lanes=lanes, tile=(tm, lanes // tm))


@dataclass(frozen=True)
class FmaStream:
    """Merged FMA-port operand stream: one entry per FMA cycle.

    a_vals/b_vals are the multiplier operand words; acc_vals is the
    accumulator word after each cycle's multiply-add (products accumulated
    in ascending-k order per lane).
    """

    a_vals: np.ndarray
    b_vals: np.ndarray
    acc_vals: np.ndarray

    def __len__(self) -> int:
        return len(self.a_vals)


@dataclass(frozen=True)
class ToggleReport:
    flops: int
    mul_input_toggles: int
    acc_toggles: int
    score_per_flop: float
    w_mul: float = 1.0
    w_acc: float = 1.0


def bits64(x: float) -> int:
    """IEEE-754 binary64 bit pattern of x as an unsigned integer."""
    return int(np.float64(x).view(np.uint64))


def hamming(p: int, q: int) -> int:
    """Number of differing bits between two 64-bit patterns."""
    return ((p ^ q) & 0xFFFFFFFFFFFFFFFF).bit_count()


def _output_order(n: int, schedule: Schedule) -> tuple[np.ndarray, np.ndarray]:
    """Row/col indices of output cells in tile-row-major traversal order."""
    tm, tn = schedule.tile
    if n % tm or n % tn:
        raise ConfigError(f"tile {schedule.tile} does not divide n_dim {n}")
    rows = []
    cols = []
    for ti in range(0, n, tm):
        for tj in range(0, n, tn):
            for di in range(tm):
                for dj in range(tn):
                    rows.append(ti + di)
                    cols.append(tj + dj)
    return np.array(rows), np.array(cols)


def operand_stream(pair: MatrixPair, schedule: Schedule = Schedule()) -> FmaStream:
    """Build the merged FMA-port stream for a matrix pair under a schedule.

    Each lane-group of `lanes` consecutive output cells shares the port;
    within a group the k-loop advances once per round-robin pass, so
    consecutive port cycles alternate lanes.  Accumulators run the actual
    arithmetic (product then add per cycle), so zero-propagation effects
    in the dot products show up in the accumulator word naturally.
    """
    n = pair.spec.n_dim
    a, b = pair.a, pair.b
    lanes = schedule.lanes
    rows, cols = _output_order(n, schedule)

    a_parts = []
    b_parts = []
    acc_parts = []
    for start in range(0, n * n, lanes):
        i_arr = rows[start:start + lanes]
        j_arr = cols[start:start + lanes]
        a_block = a[i_arr, :].T          # (n, lanes): a[i_l, k] at [k, l]
        b_block = b[:, j_arr]            # (n, lanes): b[k, j_l] at [k, l]
        prods = a_block * b_block
        acc = np.cumsum(prods, axis=0)   # ascending-k, sequential per lane
        a_parts.append(a_block.ravel())  # k-major, lane-minor interleave
        b_parts.append(b_block.ravel())
        acc_parts.append(acc.ravel())

    return FmaStream(
        a_vals=np.concatenate(a_parts),
        b_vals=np.concatenate(b_parts),
        acc_vals=np.concatenate(acc_parts),
    )


def _word_toggles(values: np.ndarray) -> int:
    bits = np.ascontiguousarray(values, dtype=np.float64).view(np.uint64)
    if len(bits) < 2:
        return 0
    return int(np.bitwise_count(bits[1:] ^ bits[:-1]).sum())


def toggle_score(stream: FmaStream, w_mul: float = 1.0, w_acc: float = 1.0) -> ToggleReport:
    """Cycle-to-cycle toggle totals over the port stream, per FLOP."""
    flops = len(stream)
    if flops == 0:
        raise ConfigError("empty operand stream")
    mul = _word_toggles(stream.a_vals) + _word_toggles(stream.b_vals)
    acc = _word_toggles(stream.acc_vals)
    score = (w_mul * mul + w_acc * acc) / flops
    return ToggleReport(
        flops=flops,
        mul_input_toggles=mul,
        acc_toggles=acc,
        score_per_flop=score,
        w_mul=w_mul,
        w_acc=w_acc,
    )


def score_spec(spec, schedule: Schedule = Schedule(),
               w_mul: float = 1.0, w_acc: float = 1.0) -> ToggleReport:
    """Generate a spec's matrices and score its operand stream."""
    from .patterns import generate

    return toggle_score(operand_stream(generate(spec), schedule), w_mul, w_acc)


def predict_ordering(specs, schedule: Schedule = Schedule(),
                     w_mul: float = 1.0, w_acc: float = 1.0):
    """Rank specs by descending score_per_flop (ties keep input order).

    Intended to be rank-correlated with measured power for a shared N.
    """
    specs = list(specs)
    if not specs:
        raise ConfigError("predict_ordering needs at least one spec")
    dims = {s.n_dim for s in specs}
    if len(dims) > 1:
        raise ConfigError(f"all specs must share n_dim, got {sorted(dims)}")
    scored = [(spec, score_spec(spec, schedule, w_mul, w_acc)) for spec in specs]
    order = sorted(range(len(scored)),
                   key=lambda idx: (-scored[idx][1].score_per_flop, idx))
    return [scored[idx] for idx in order]
