"""Entropy-controlled DGEMM input matrix generation.

Input matrices are built from a declarative PatternSpec: a family (two
baselines plus four structured families), a matrix dimension N (power of
two), a level n selecting how finely the random-valued region is divided
(0 <= n <= log2 N), and a value mode choosing between independently drawn
random cells and a single shared constant.

Block families keep the random fraction at exactly 50% for level >= 1,
arranged as row/column stripes or a checkerboard.  Sparse families grow
the random region from N cells (one row/column/diagonal) to the full
matrix.  All remaining cells are exactly 0.0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# Splitting constant so A and B get decorrelated streams from one user seed.
SEED_SPLIT = 0x9E3779B97F4A7C15

# Recorded in run manifests; the generator sequence for a given identifier
# must stay stable across releases (numpy guarantees PCG64 stream stability).
PRNG_ALGORITHM = "numpy-pcg64"

_U64 = 1 << 64


class Family(str, enum.Enum):
    BASELINE_RANDOM = "baseline_random"
    BASELINE_FIXED = "baseline_fixed"
    BLOCK_ROWCOL = "block_rowcol"
    BLOCK_DIAGONAL = "block_diagonal"
    SPARSE_ROWCOL = "sparse_rowcol"
    SPARSE_DIAGONAL = "sparse_diagonal"


class ValueMode(str, enum.Enum):
    INDEPENDENT = "independent"
    FIXED_COMMON = "fixed_common"


BASELINE_FAMILIES = frozenset({Family.BASELINE_RANDOM, Family.BASELINE_FIXED})
PATTERN_FAMILIES = tuple(f for f in Family if f not in BASELINE_FAMILIES)

# Fixed-input operand values (the low-entropy reference workload).
FIXED_A_VALUE = 2.0
FIXED_B_VALUE = 0.5
FIXED_C_INIT = 1.0


def _log2_int(n: int) -> int:
    if n < 2 or n & (n - 1):
        raise ConfigError(f"n_dim must be a power of two >= 2, got {n}")
    return n.bit_length() - 1


@dataclass(frozen=True)
class PatternSpec:
    """Declarative description of one input-matrix entropy pattern."""

    family: Family
    n_dim: int
    level: int = 0
    value_mode: ValueMode = ValueMode.INDEPENDENT
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "value_mode", ValueMode(self.value_mode))
        max_level = _log2_int(self.n_dim)
        if not 0 <= self.level <= max_level:
            raise ConfigError(
                f"level must be in [0, {max_level}] for n_dim={self.n_dim}, "
                f"got {self.level}"
            )
        if not 0 <= self.seed < _U64:
            raise ConfigError(f"seed must be an unsigned 64-bit value, got {self.seed}")

    @property
    def max_level(self) -> int:
        return _log2_int(self.n_dim)

    @property
    def is_baseline(self) -> bool:
        return self.family in BASELINE_FAMILIES


@dataclass(frozen=True)
class MatrixPair:
    """Concrete A and B operands generated from a PatternSpec.

    Arrays are row-major float64 and frozen read-only, so a pair can be
    shared across threads after construction.
    """

    a: np.ndarray
    b: np.ndarray
    spec: PatternSpec


def masks(spec: PatternSpec) -> tuple[np.ndarray, np.ndarray]:
    """Boolean random-designation masks (True = random cell) for A and B.

    Baseline families have trivially all-true masks and are rejected here;
    generate() handles them directly.
    """
    if spec.is_baseline:
        raise ConfigError(f"masks() does not apply to baseline family {spec.family.value}")

    n, lvl = spec.n_dim, spec.level
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]

    if spec.family is Family.BLOCK_ROWCOL:
        if lvl == 0:
            full = np.ones((n, n), dtype=bool)
            return full, full.copy()
        s = n // (1 << lvl)  # stripe height/width
        mask_a = np.broadcast_to((i // s) % 2 == 0, (n, n)).copy()
        mask_b = np.broadcast_to((j // s) % 2 == 0, (n, n)).copy()
        return mask_a, mask_b

    if spec.family is Family.BLOCK_DIAGONAL:
        if lvl == 0:
            full = np.ones((n, n), dtype=bool)
            return full, full.copy()
        s = n // (1 << lvl)
        mask_a = (i // s + j // s) % 2 == 0
        return mask_a, ~mask_a

    if spec.family is Family.SPARSE_ROWCOL:
        rows = 1 << lvl
        mask_a = np.broadcast_to(i < rows, (n, n)).copy()
        mask_b = np.broadcast_to(j < rows, (n, n)).copy()
        return mask_a, mask_b

    # sparse_diagonal: 2^level full diagonals, wrapping modulo N.
    d = n >> lvl  # diagonal stride
    mask_a = (j - i) % n % d == 0
    mask_b = (i + j) % n % d == d - 1
    return mask_a, mask_b


def random_fraction(mask: np.ndarray) -> float:
    """Fraction of random-designated cells in a mask."""
    return float(np.count_nonzero(mask)) / mask.size


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _uniform_open_closed(rng: np.random.Generator, count) -> np.ndarray:
    # (0, 1] so no independent draw collides with the 0.0 zero-cell sentinel.
    return 1.0 - rng.random(count)


def generate(spec: PatternSpec) -> MatrixPair:
    """Generate the A/B operand pair for a spec.

    Pure function of the spec: identical specs (including seed) yield
    bit-identical matrices.
    """
    n = spec.n_dim
    rng_a = _rng(spec.seed)
    rng_b = _rng(spec.seed ^ SEED_SPLIT)

    if spec.family is Family.BASELINE_FIXED:
        a = np.full((n, n), FIXED_A_VALUE)
        b = np.full((n, n), FIXED_B_VALUE)
    elif spec.family is Family.BASELINE_RANDOM:
        a = _uniform_open_closed(rng_a, (n, n))
        b = _uniform_open_closed(rng_b, (n, n))
    else:
        mask_a, mask_b = masks(spec)
        a = np.zeros((n, n))
        b = np.zeros((n, n))
        if spec.value_mode is ValueMode.FIXED_COMMON:
            common = float(_uniform_open_closed(rng_a, None))
            a[mask_a] = common
            b[mask_b] = common
        else:
            a[mask_a] = _uniform_open_closed(rng_a, int(np.count_nonzero(mask_a)))
            b[mask_b] = _uniform_open_closed(rng_b, int(np.count_nonzero(mask_b)))

    a.setflags(write=False)
    b.setflags(write=False)
    return MatrixPair(a=a, b=b, spec=spec)


def dump_matrix(matrix: np.ndarray, path) -> None:
    """Raw little-endian float64 dump, row-major, no header.

    Dimensions are carried by the owning manifest, not the file.
    """
    np.ascontiguousarray(matrix, dtype="<f8").tofile(path)


def load_matrix(path, n_dim: int) -> np.ndarray:
    data = np.fromfile(path, dtype="<f8")
    if data.size != n_dim * n_dim:
        raise ConfigError(
            f"matrix file {path} holds {data.size} values, expected {n_dim * n_dim}"
        )
    return data.reshape(n_dim, n_dim)
