"""Finite dyadic model on the periodic unit cube.

The torus [0, 1)^n is cut into ``N = 3 * 2**L`` base cells per axis. A grid is
selected by a shift vector ``s`` in ``{0, 1, 2}^n``; its level-``k`` cubes are
``2**-k * (j + [0, 1)^n) + s / 3`` taken modulo 1. Since ``N / 3 = 2**L`` the
shift is a whole number of cells, so every cube of every grid is an exact union
of base cells.

Internally each grid is handled in its *aligned frame*: the cell array rolled
by ``-s * 2**L`` along every axis, in which the grid becomes the standard one.
Cube sums are built bottom-up with elementwise adds over a fixed reduction
tree (3**n cells into a level-L cube, then 2**n children into a parent), so
every cube integral is bit-reproducible and exactly additive over children.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, DepthError, LevelRangeError, PositivityError

MAX_DEPTH = 12


@dataclass(frozen=True)
class ModelConfig:
    n: int = 1
    L: int = 4

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ConfigError(f"dimension must be 1 or 2, got {self.n}")
        if not isinstance(self.L, (int, np.integer)) or not 1 <= self.L <= MAX_DEPTH:
            raise ConfigError(f"depth L must be an integer in [1, {MAX_DEPTH}], got {self.L}")

    @property
    def N(self) -> int:
        return 3 * 2**self.L

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    @property
    def cell_volume(self) -> float:
        return float(self.N) ** -self.n

    def grids(self) -> list:
        """All 3**n shifted grids in lexicographic order."""
        return [GridId(s) for s in itertools.product(range(3), repeat=self.n)]

    def cube_cells(self, k: int) -> int:
        """Number of base cells in a level-k cube."""
        return (3 * 2 ** (self.L - k)) ** self.n


class GridId(NamedTuple):
    shift: tuple

    @classmethod
    def standard(cls, n: int) -> "GridId":
        return cls((0,) * n)


class Cube(NamedTuple):
    """A dyadic cube ``(grid, level, index)``; tuples sort lexicographically."""

    grid: GridId
    level: int
    index: tuple

    @property
    def n(self) -> int:
        return len(self.index)

    @property
    def measure(self) -> float:
        # a power of two, exact in binary floating point
        return 2.0 ** (-self.level * self.n)

    @property
    def exact_measure(self) -> Fraction:
        return Fraction(1, 2 ** (self.level * self.n))

    def parent(self) -> "Cube":
        if self.level == 0:
            raise LevelRangeError("the root cube has no parent")
        return Cube(self.grid, self.level - 1, tuple(j >> 1 for j in self.index))

    def ancestor(self, level: int) -> "Cube":
        d = self.level - level
        if d < 0:
            raise LevelRangeError(f"level {level} is below cube level {self.level}")
        return Cube(self.grid, level, tuple(j >> d for j in self.index))

    def contains(self, other: "Cube") -> bool:
        """Non-strict containment; cubes of different grids are never compared."""
        if other.grid != self.grid or other.level < self.level:
            return False
        d = other.level - self.level
        return all((b >> d) == a for a, b in zip(self.index, other.index))

    def intersects(self, other: "Cube") -> bool:
        return self.contains(other) or other.contains(self)

    def left_endpoints(self, cfg: ModelConfig) -> tuple:
        """Left endpoint per axis as an exact fraction in [0, 1)."""
        return tuple(
            Fraction((3 * j * 2 ** (cfg.L - self.level) + s * 2**cfg.L) % cfg.N, cfg.N)
            for j, s in zip(self.index, self.grid.shift)
        )

    def wraps(self, cfg: ModelConfig) -> bool:
        """True if the cube crosses the seam x = 0 of the torus on some axis."""
        return bool(_wrap_mask(cfg, self.grid, self.level)[self.index])


def check_cube(cfg: ModelConfig, cube: Cube) -> None:
    if cube.n != cfg.n or len(cube.grid.shift) != cfg.n:
        raise ConfigError(f"cube dimension {cube.n} does not match model dimension {cfg.n}")
    if not 0 <= cube.level <= cfg.L:
        raise ConfigError(f"cube level {cube.level} outside [0, {cfg.L}]")
    if any(not 0 <= j < 2**cube.level for j in cube.index):
        raise ConfigError(f"cube index {cube.index} out of range at level {cube.level}")


def cubes_at_level(cfg: ModelConfig, grid: GridId, k: int) -> list:
    if not 0 <= k <= cfg.L:
        raise LevelRangeError(f"level {k} outside [0, {cfg.L}]")
    grid = GridId(tuple(grid.shift if isinstance(grid, GridId) else grid))
    return [Cube(grid, k, j) for j in itertools.product(range(2**k), repeat=cfg.n)]


def children(cfg: ModelConfig, cube: Cube) -> list:
    if cube.level >= cfg.L:
        raise DepthError(f"cube at level {cube.level} is at maximal depth {cfg.L}")
    return [
        Cube(cube.grid, cube.level + 1, tuple(2 * j + e for j, e in zip(cube.index, eps)))
        for eps in itertools.product((0, 1), repeat=cube.n)
    ]


def subcubes(cfg: ModelConfig, cube: Cube, level: int) -> list:
    """All same-grid cubes at ``level`` inside ``cube``, lexicographic."""
    d = level - cube.level
    if d < 0 or level > cfg.L:
        raise LevelRangeError(f"level {level} not in [{cube.level}, {cfg.L}]")
    ranges = [range(j << d, (j + 1) << d) for j in cube.index]
    return [Cube(cube.grid, level, idx) for idx in itertools.product(*ranges)]


def cell_extent(cfg: ModelConfig, cube: Cube) -> tuple:
    """Per-axis arrays of base-cell indices covered by the cube (with wraparound)."""
    check_cube(cfg, cube)
    size = 3 * 2 ** (cfg.L - cube.level)
    return tuple(
        (np.arange(size) + j * size + s * 2**cfg.L) % cfg.N
        for j, s in zip(cube.index, cube.grid.shift)
    )


def cube_mask(cfg: ModelConfig, cube: Cube) -> np.ndarray:
    """Boolean cell mask of a cube."""
    mask = np.zeros(cfg.shape, dtype=bool)
    mask[np.ix_(*cell_extent(cfg, cube))] = True
    return mask


# --- aligned-frame machinery -------------------------------------------------

def _spatial_axes(arr: np.ndarray, n: int) -> tuple:
    return tuple(range(arr.ndim - n, arr.ndim))


def align(arr: np.ndarray, cfg: ModelConfig, grid: GridId) -> np.ndarray:
    """Roll a cell array (possibly with leading batch axes) into ``grid``'s frame."""
    shifts = tuple(-s * 2**cfg.L for s in grid.shift)
    if not any(shifts):
        return arr
    return np.roll(arr, shifts, _spatial_axes(arr, cfg.n))


def unalign(arr: np.ndarray, cfg: ModelConfig, grid: GridId) -> np.ndarray:
    shifts = tuple(s * 2**cfg.L for s in grid.shift)
    if not any(shifts):
        return arr
    return np.roll(arr, shifts, _spatial_axes(arr, cfg.n))


def _halve(arr: np.ndarray, n: int) -> np.ndarray:
    """Sum 2**n children into their parent (fixed add order)."""
    if n == 1:
        return arr[..., 0::2] + arr[..., 1::2]
    return (arr[..., 0::2, 0::2] + arr[..., 0::2, 1::2]) + (
        arr[..., 1::2, 0::2] + arr[..., 1::2, 1::2]
    )


def level_sums_aligned(aligned: np.ndarray, cfg: ModelConfig) -> list:
    """Cube sums of cell values at every level, from an aligned cell array.

    Returns a list indexed by level ``k`` of arrays with trailing shape
    ``(2**k,) * n``. Works for float and integer arrays and keeps leading axes.
    """
    n, M = cfg.n, 2**cfg.L
    lead = aligned.shape[: aligned.ndim - n]
    if n == 1:
        a = aligned.reshape(lead + (M, 3))
        base = (a[..., 0] + a[..., 1]) + a[..., 2]
    else:
        a = aligned.reshape(lead + (M, 3, M, 3))
        base = a[..., :, 0, :, 0].copy()
        for u, v in itertools.product(range(3), repeat=2):
            if (u, v) != (0, 0):
                base = base + a[..., :, u, :, v]
    out = [base]
    for _ in range(cfg.L):
        out.append(_halve(out[-1], n))
    return out[::-1]


def level_sums(arr: np.ndarray, cfg: ModelConfig, grid: GridId) -> list:
    return level_sums_aligned(align(arr, cfg, grid), cfg)


def reduce_levels(arr: np.ndarray, n: int, times: int) -> np.ndarray:
    """Apply the parent reduction ``times`` times to a per-cube array."""
    for _ in range(times):
        arr = _halve(arr, n)
    return arr


def upsample(arr: np.ndarray, n: int, factor: int) -> np.ndarray:
    """Repeat each entry ``factor`` times along every trailing spatial axis."""
    if factor == 1:
        return arr
    for ax in range(arr.ndim - n, arr.ndim):
        arr = np.repeat(arr, factor, axis=ax)
    return arr


def to_cells(per_cube: np.ndarray, cfg: ModelConfig, grid: GridId, level: int) -> np.ndarray:
    """Expand a per-cube array at ``level`` to base cells in the original frame."""
    fine = upsample(per_cube, cfg.n, 3 * 2 ** (cfg.L - level))
    return unalign(fine, cfg, grid)


def _wrap_mask(cfg: ModelConfig, grid: GridId, k: int) -> np.ndarray:
    size = 3 * 2 ** (cfg.L - k)
    j = np.arange(2**k)
    masks = []
    for s in grid.shift:
        start = j * size + s * 2**cfg.L
        masks.append(start + size > cfg.N)
    out = masks[0]
    if cfg.n == 2:
        out = masks[0][:, None] | masks[1][None, :]
    return out


def wrap_mask(cfg: ModelConfig, grid: GridId, k: int) -> np.ndarray:
    """Boolean per-cube array: True where a level-k cube crosses the torus seam."""
    return _wrap_mask(cfg, GridId(tuple(grid.shift)), k)


# --- cell functions ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CellFunction:
    """A non-negative function constant on each base cell."""

    cfg: ModelConfig
    values: np.ndarray
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if vals.shape != self.cfg.shape:
            raise ConfigError(f"values shape {vals.shape} != model shape {self.cfg.shape}")
        if not np.all(np.isfinite(vals)):
            raise PositivityError("cell values must be finite")
        if np.any(vals < 0):
            raise PositivityError("cell values must be non-negative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, cfg: ModelConfig, c: float) -> "CellFunction":
        return cls(cfg, np.full(cfg.shape, float(c)))

    @classmethod
    def from_halves(cls, cfg: ModelConfig, left: float, right: float) -> "CellFunction":
        """1D helper: value ``left`` on [0, 1/2), ``right`` on [1/2, 1)."""
        if cfg.n != 1:
            raise ConfigError("from_halves is one-dimensional")
        half = cfg.N // 2
        return cls(cfg, np.r_[np.full(half, float(left)), np.full(half, float(right))])

    def sums(self, grid: GridId) -> list:
        """Per-level cube sums of cell values in ``grid``'s aligned frame (cached)."""
        key = tuple(grid.shift)
        if key not in self._cache:
            sums = level_sums(self.values, self.cfg, GridId(key))
            for s in sums:
                s.setflags(write=False)
            self._cache[key] = sums
        return self._cache[key]

    def averages(self, grid: GridId, k: int) -> np.ndarray:
        return self.sums(grid)[k] / self.cfg.cube_cells(k)

    def integrals(self, grid: GridId, k: int) -> np.ndarray:
        return self.sums(grid)[k] * self.cfg.cell_volume

    def total(self) -> float:
        """Integral over the torus."""
        return float(self.sums(GridId.standard(self.cfg.n))[0].ravel()[0]) * self.cfg.cell_volume

    def mean(self) -> float:
        return self.total()

    def __mul__(self, other):
        if isinstance(other, CellFunction):
            _same_cfg(self, other)
            return CellFunction(self.cfg, self.values * other.values)
        return CellFunction(self.cfg, self.values * float(other))

    __rmul__ = __mul__

    def __add__(self, other):
        _same_cfg(self, other)
        return CellFunction(self.cfg, self.values + other.values)

    def __pow__(self, a: float):
        return CellFunction(self.cfg, self.values ** float(a))

    def restrict(self, cube: Cube) -> "CellFunction":
        """``f * 1_Q``."""
        return CellFunction(self.cfg, np.where(cube_mask(self.cfg, cube), self.values, 0.0))


def _same_cfg(a: CellFunction, b: CellFunction) -> None:
    if a.cfg != b.cfg:
        raise ConfigError(f"mismatched model configurations {a.cfg} and {b.cfg}")


def same_config(*fs: CellFunction) -> ModelConfig:
    cfg = fs[0].cfg
    for f in fs[1:]:
        _same_cfg(fs[0], f)
    return cfg


def cube_integral(f: CellFunction, cube: Cube) -> float:
    """Exact cell sum over the cube times the cell volume."""
    check_cube(f.cfg, cube)
    return float(f.integrals(cube.grid, cube.level)[cube.index])


def cube_average(f: CellFunction, cube: Cube) -> float:
    check_cube(f.cfg, cube)
    return float(f.averages(cube.grid, cube.level)[cube.index])


def cube_family(cfg: ModelConfig, grids: Sequence[GridId] | None = None, periodic: bool = True):
    """Yield ``(grid, level, keep_mask)`` over the finite cube family.

    ``keep_mask`` is None when every cube at that level is kept; in segment mode
    (``periodic=False``) cubes crossing the seam are masked out.
    """
    for grid in grids if grids is not None else cfg.grids():
        grid = GridId(tuple(grid.shift if isinstance(grid, GridId) else grid))
        for k in range(cfg.L + 1):
            keep = None
            if not periodic and any(grid.shift):
                keep = ~wrap_mask(cfg, grid, k)
            yield grid, k, keep
