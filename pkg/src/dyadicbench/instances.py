"""Seeded random inputs: weights, test functions, families and open sets.

Array-valued draws use numpy's PCG64 seeded with ``[seed, stream]``; sparse
families use :class:`XorShift64Star`. Every generator is a pure function of
its arguments.
"""
from __future__ import annotations

import numpy as np

from .dyadic import CellFunction, Cube, GridId, ModelConfig, cube_mask, subcubes
from .sparse import random_sparse

STREAMS = {
    "carleson": 1, "transform": 2, "weak_maximal": 3, "sparse": 4, "principal": 5,
    "corona": 6, "whitney": 7, "level_sets": 8, "lemma_l1": 9, "lemma_l2": 10,
    "testing": 11, "report": 12, "monotonicity": 13,
}


def instance_rng(seed: int, stream: str | int) -> np.random.Generator:
    code = STREAMS[stream] if isinstance(stream, str) else int(stream)
    return np.random.default_rng([int(seed), code])


def cascade(cfg: ModelConfig, rng: np.random.Generator, spread: float = 0.6) -> np.ndarray:
    """Multiplicative log-normal cascade on the standard grid, mean-normalized."""
    n = cfg.n
    vals = np.ones((1,) * n)
    for k in range(1, cfg.L + 1):
        for ax in range(n):
            vals = np.repeat(vals, 2, axis=ax)
        vals = vals * np.exp(rng.normal(0.0, spread * 0.8**k, size=vals.shape))
    for ax in range(n):
        vals = np.repeat(vals, 3, axis=ax)
    vals = vals * np.exp(rng.normal(0.0, 0.1, size=vals.shape))
    return vals / vals.mean()


def random_weight(cfg: ModelConfig, rng: np.random.Generator, spread: float = 0.6,
                  singular: bool = True) -> CellFunction:
    """Positive weight: a cascade times an optional power singularity ``|x - x0|**a``."""
    vals = cascade(cfg, rng, spread)
    if singular and rng.random() < 0.5:
        a = rng.uniform(-0.4, 0.6)
        x0 = rng.random(cfg.n)
        centres = (np.arange(cfg.N) + 0.5) / cfg.N
        d2 = np.zeros(cfg.shape)
        for ax in range(cfg.n):
            d = np.abs(centres - x0[ax])
            d = np.minimum(d, 1 - d)
            shape = [1] * cfg.n
            shape[ax] = cfg.N
            d2 = d2 + d.reshape(shape) ** 2
        vals = vals * np.maximum(np.sqrt(d2), 0.5 / cfg.N) ** a
    return CellFunction(cfg, vals)


def random_function(cfg: ModelConfig, rng: np.random.Generator, support: Cube | None = None) -> CellFunction:
    """Non-negative test function: a cascade, an indicator, or their product."""
    kind = rng.integers(3)
    if kind == 0:
        vals = cascade(cfg, rng, 0.8)
    else:
        grid = GridId(tuple(int(s) for s in rng.integers(3, size=cfg.n)))
        k = int(rng.integers(0, cfg.L + 1))
        q = Cube(grid, k, tuple(int(j) for j in rng.integers(2**k, size=cfg.n)))
        vals = cube_mask(cfg, q).astype(float) * (1.0 + 3.0 * rng.random())
        if kind == 2:
            vals = vals * cascade(cfg, rng, 0.8)
    if support is not None:
        vals = vals * cube_mask(cfg, support)
    if not vals.any():
        vals = np.ones(cfg.shape) if support is None else cube_mask(cfg, support).astype(float)
    return CellFunction(cfg, vals)


def random_exponents(rng: np.random.Generator, choices) -> tuple:
    return tuple(float(q) for q in choices[int(rng.integers(len(choices)))])


def random_grid(cfg: ModelConfig, rng: np.random.Generator) -> GridId:
    return GridId(tuple(int(s) for s in rng.integers(3, size=cfg.n)))


def random_cube(cfg: ModelConfig, grid: GridId, rng: np.random.Generator, max_level: int | None = None) -> Cube:
    k = int(rng.integers(0, (cfg.L if max_level is None else max_level) + 1))
    return Cube(grid, k, tuple(int(j) for j in rng.integers(2**k, size=cfg.n)))


def random_family(cfg: ModelConfig, rng: np.random.Generator, depth: int, grid: GridId | None = None,
                  root: Cube | None = None):
    grid = grid or random_grid(cfg, rng)
    seed = int(rng.integers(2**63))
    return random_sparse(cfg, grid, seed, min(depth, cfg.L), root=root)


def random_collection(cfg: ModelConfig, rng: np.random.Generator, root: Cube, density: float = 0.35) -> list:
    """The root plus a random selection of its subcubes."""
    out = [root]
    for k in range(root.level + 1, cfg.L + 1):
        for q in subcubes(cfg, root, k):
            if rng.random() < density:
                out.append(q)
    return out


def random_open_set(cfg: ModelConfig, rng: np.random.Generator) -> np.ndarray:
    """A proper non-empty cell set: a union of random boxes, optionally with holes."""
    N = cfg.N
    while True:
        mask = np.zeros(cfg.shape, dtype=bool)
        for _ in range(int(rng.integers(1, 4))):
            lo = rng.integers(0, N, size=cfg.n)
            hi = lo + rng.integers(1, N // 2 + 1, size=cfg.n)
            mask[tuple(slice(a, min(b, N)) for a, b in zip(lo, hi))] = True
        if rng.random() < 0.3:
            mask[tuple(rng.integers(0, N, size=cfg.n))] = False
        if mask.any():
            return mask
