"""A tour of the finite dyadic model: grids, a sparse family, the sparse
operator and its dyadic level sets.

Run: python demos/sparse_operator_tour.py
"""
import numpy as np

from dyadicbench import (
    CellFunction, GridId, ModelConfig, dyadic_maximal, level_set_decomposition, random_sparse,
    sparse_operator, verify_sparse,
)

cfg = ModelConfig(n=1, L=5)
print(f"model: n={cfg.n}, L={cfg.L}, {cfg.N} cells, {len(cfg.grids())} shifted grids")

grid = GridId((1,))
fam = random_sparse(cfg, grid, seed=7, depth=4)
print(f"\nsparse family on grid {grid.shift}: {len(fam)} cubes in {len(fam.stages)} stages")
for k, stage in enumerate(fam.stages):
    print(f"  stage {k}: " + ", ".join(f"(level {q.level}, index {q.index[0]})" for q in stage))
print("verify_sparse:", verify_sparse(fam) or "ok")

rng = np.random.default_rng(3)
g1 = CellFunction(cfg, rng.random(cfg.shape))
g2 = CellFunction(cfg, (rng.random(cfg.shape) < 0.3).astype(float))
A = sparse_operator(fam, [g1, g2])
M = dyadic_maximal([g1, g2], grid)
print(f"\nmax A = {A.values.max():.4f}, max M = {M.values.max():.4f}")

dec = level_set_decomposition(fam, [g1, g2])
print("\nlevel sets {A > 2^l} and their maximal cubes:")
for l in dec.levels:
    cubes = dec.cubes[l]
    inside = sum(dec.in_family[(l, q)] for q in cubes)
    print(f"  l={l:3d}: |Omega| = {dec.omega_at(l).mean():.3f}, {len(cubes)} maximal cubes, "
          f"{inside} of them in the family")
