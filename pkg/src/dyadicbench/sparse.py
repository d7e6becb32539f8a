"""Sparse families of dyadic cubes: representation, exact verification and
generators (seeded random, and stopping cubes of the dyadic maximal function)."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dyadic import (
    CellFunction, Cube, GridId, ModelConfig, check_cube, cube_mask, same_config, subcubes,
    to_cells, upsample,
)
from .errors import ConfigError, LevelRangeError, SparsenessError
from .rng import XorShift64Star


@dataclass(frozen=True)
class SparseFamily:
    """Cubes of one grid grouped in stages ``stages[k] = (Q_{j,k})_j``."""

    cfg: ModelConfig
    grid: GridId
    stages: tuple

    def __post_init__(self):
        grid = GridId(tuple(self.grid.shift))
        stages = tuple(tuple(sorted(Cube(GridId(tuple(q.grid.shift)), q.level, tuple(q.index))
                                    for q in st)) for st in self.stages)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "stages", stages)

    @classmethod
    def single(cls, cube: Cube, cfg: ModelConfig) -> "SparseFamily":
        return cls(cfg, cube.grid, ((cube,),))

    @classmethod
    def empty(cls, cfg: ModelConfig, grid: GridId | None = None) -> "SparseFamily":
        return cls(cfg, grid or GridId.standard(cfg.n), ())

    @property
    def cubes(self) -> list:
        """All cubes, stages ascending and lexicographic within a stage."""
        return [q for st in self.stages for q in st]

    def __len__(self):
        return sum(len(st) for st in self.stages)

    def restaged(self, cubes: Iterable[Cube]) -> "SparseFamily":
        return restage(self.cfg, self.grid, cubes)

    def gamma_mask(self, k: int) -> np.ndarray:
        """Cell mask of the union of stage ``k`` (empty past the last stage)."""
        mask = np.zeros(self.cfg.shape, dtype=bool)
        if k < len(self.stages):
            for q in self.stages[k]:
                mask |= cube_mask(self.cfg, q)
        return mask

    def e_sets(self) -> dict:
        """``E(Q) = Q minus Gamma_{k+1}`` as cell masks, keyed by (stage, cube)."""
        out = {}
        for k, st in enumerate(self.stages):
            nxt = self.gamma_mask(k + 1)
            for q in st:
                out[(k, q)] = cube_mask(self.cfg, q) & ~nxt
        return out

    def to_json(self) -> str:
        data = {
            "grid": {"shift": list(self.grid.shift)},
            "stages": [[{"k": q.level, "j": list(q.index)} for q in st] for st in self.stages],
        }
        return json.dumps(data, separators=(",", ":"))

    @classmethod
    def from_json(cls, cfg: ModelConfig, text: str) -> "SparseFamily":
        data = json.loads(text)
        grid = GridId(tuple(data["grid"]["shift"]))
        stages = tuple(tuple(Cube(grid, d["k"], tuple(d["j"])) for d in st) for st in data["stages"])
        return cls(cfg, grid, stages)


@dataclass(frozen=True)
class SparseViolation:
    condition: str
    stage: int
    cube: Cube | None
    detail: str

    def __str__(self):
        return f"{self.condition} violated at stage {self.stage}, cube {self.cube}: {self.detail}"


def _fine_slices(cfg: ModelConfig, q: Cube) -> tuple:
    """Slices of ``q`` on the aligned level-L grid of its own grid."""
    size = 2 ** (cfg.L - q.level)
    return tuple(slice(j * size, (j + 1) * size) for j in q.index)


def verify_sparse(fam: SparseFamily) -> SparseViolation | None:
    """Check the three sparseness conditions with integer counts of finest cubes.

    Returns None when the family is sparse, else the first violation found.
    """
    cfg = fam.cfg
    shape = (2**cfg.L,) * cfg.n
    for k, st in enumerate(fam.stages):
        for q in st:
            if q.grid != fam.grid:
                return SparseViolation("single grid", k, q, f"cube grid {q.grid} != family grid {fam.grid}")
            try:
                check_cube(cfg, q)
            except ConfigError as exc:
                return SparseViolation("valid cube", k, q, str(exc))
    gammas = []
    for k, st in enumerate(fam.stages):
        cover = np.zeros(shape, dtype=np.int32)
        for q in st:
            cover[_fine_slices(cfg, q)] += 1
            if cover[_fine_slices(cfg, q)].max() > 1:
                return SparseViolation("stage disjointness", k, q, "overlaps another cube of the same stage")
        gammas.append(cover > 0)
    for k in range(1, len(gammas)):
        outside = gammas[k] & ~gammas[k - 1]
        if outside.any():
            bad = next(q for q in fam.stages[k] if outside[_fine_slices(cfg, q)].any())
            return SparseViolation("nesting", k, bad, "stage cube not inside the previous stage union")
    for k, st in enumerate(fam.stages):
        nxt = gammas[k + 1] if k + 1 < len(gammas) else None
        for q in st:
            size = (2 ** (cfg.L - q.level)) ** cfg.n
            covered = int(nxt[_fine_slices(cfg, q)].sum()) if nxt is not None else 0
            if 2 * covered > size:
                return SparseViolation(
                    "half covering", k, q, f"next stage covers {covered}/{size} of the cube",
                )
    return None


def restage(cfg: ModelConfig, grid: GridId, cubes: Iterable[Cube]) -> SparseFamily:
    """Stage a set of cubes by containment depth (number of strict ancestors in the set)."""
    cubes = sorted(set(cubes))
    depth = {}
    for q in sorted(cubes, key=lambda c: c.level):
        depth[q] = sum(1 for r in cubes if r.level < q.level and r.contains(q))
    nstages = max(depth.values(), default=-1) + 1
    stages = [[] for _ in range(nstages)]
    for q in cubes:
        stages[depth[q]].append(q)
    return SparseFamily(cfg, grid, tuple(tuple(st) for st in stages))


def random_sparse(cfg: ModelConfig, grid: GridId, seed: int, depth: int,
                  root: Cube | None = None, max_jump: int = 3) -> SparseFamily:
    """A seeded random sparse family.

    Each stage-k cube picks a deeper level (at most ``max_jump`` below it) and a
    random set of at most half of its descendants there as its stage-(k+1)
    cubes. Draws come from :class:`XorShift64Star` in a fixed order, so the
    output depends only on the arguments.
    """
    if not 0 <= depth <= cfg.L:
        raise LevelRangeError(f"depth {depth} outside [0, {cfg.L}]")
    grid = GridId(tuple(grid.shift))
    if root is None:
        root = Cube(grid, 0, (0,) * cfg.n)
    check_cube(cfg, root)
    if root.grid != grid:
        raise ConfigError("root cube must lie in the requested grid")
    rng = XorShift64Star(seed)
    stages = [(root,)]
    frontier = [root]
    for _ in range(depth):
        nxt = []
        for q in frontier:
            if q.level >= cfg.L:
                continue
            jump = 1 + rng.below(min(max_jump, cfg.L - q.level))
            desc = subcubes(cfg, q, q.level + jump)
            count = rng.below(len(desc) // 2 + 1)
            nxt.extend(rng.sample(desc, count))
        if not nxt:
            break
        frontier = sorted(nxt)
        stages.append(tuple(frontier))
    fam = SparseFamily(cfg, grid, tuple(stages))
    violation = verify_sparse(fam)
    if violation is not None:
        raise SparsenessError(violation)
    return fam


def product_averages(gs: Sequence[CellFunction], grid: GridId) -> list:
    """Per level, the product over slots of cube averages."""
    cfg = gs[0].cfg
    out = []
    for k in range(cfg.L + 1):
        prod = gs[0].averages(grid, k)
        for g in gs[1:]:
            prod = prod * g.averages(grid, k)
        out.append(prod)
    return out


def stopping_cubes(prods: list, cfg: ModelConfig, grid: GridId, t: float) -> list:
    """Maximal cubes whose product of averages exceeds ``t``."""
    n = cfg.n
    found = []
    anc = np.full((1,) * n, -np.inf)
    for k, prod in enumerate(prods):
        if k > 0:
            anc = upsample(np.maximum(anc, prods[k - 1]), n, 2)
        hits = np.argwhere((prod > t) & (anc <= t))
        found.extend(Cube(grid, k, tuple(int(x) for x in idx)) for idx in hits)
    return sorted(found)


def cz_sparse_from_functions(gs: Sequence[CellFunction], grid: GridId,
                             a: float | None = None) -> SparseFamily:
    """Stages are the maximal cubes with ``prod_i avg_Q g_i > a**l`` for
    consecutive ``l``, starting from the root; verified before return."""
    cfg = same_config(*gs)
    grid = GridId(tuple(grid.shift))
    m = len(gs)
    if a is None:
        a = 2.0 ** (m * cfg.n + 1)
    if a <= 1:
        raise ConfigError(f"stopping ratio must exceed 1, got {a}")
    prods = product_averages(gs, grid)
    root_val = float(prods[0].ravel()[0])
    if root_val <= 0:
        return SparseFamily.empty(cfg, grid)
    l = math.floor(math.log(root_val, a))
    while a**l >= root_val:
        l -= 1
    while a ** (l + 1) < root_val:
        l += 1
    stages = []
    while True:
        st = stopping_cubes(prods, cfg, grid, a**l)
        if not st:
            break
        stages.append(tuple(st))
        l += 1
    fam = SparseFamily(cfg, grid, tuple(stages))
    violation = verify_sparse(fam)
    if violation is not None:
        raise SparsenessError(violation)
    return fam


def family_cells(fam: SparseFamily, per_cube: dict) -> np.ndarray:
    """Sum ``per_cube[Q] * 1_Q`` over the family in stage order (cell array)."""
    cfg = fam.cfg
    acc = np.zeros(cfg.shape)
    for st in fam.stages:
        layer = np.zeros((2**cfg.L,) * cfg.n)
        for q in st:
            layer[_fine_slices(cfg, q)] = per_cube[q]
        acc = acc + to_cells(layer, cfg, fam.grid, cfg.L)
    return acc
