"""Principal cubes, a corona decomposition and a Whitney decomposition on
small random inputs, with the properties each construction guarantees.

Run: python demos/decompositions_tour.py
"""
import numpy as np

from dyadicbench import CellFunction, Cube, GridId, ModelConfig
from dyadicbench.decompositions import build_corona, build_principal_cubes, whitney
from dyadicbench.instances import random_collection, random_open_set, random_weight

rng = np.random.default_rng(11)
cfg = ModelConfig(1, 6)
grid = GridId((0,))
root = Cube(grid, 0, (0,))

sigma = random_weight(cfg, rng)
f = CellFunction(cfg, np.exp(2 * rng.normal(size=cfg.shape)))
pc = build_principal_cubes(f, sigma, root)
print(f"principal cubes: {len(pc.cubes)} in {len(pc.generations)} generations")
for g, cubes in enumerate(pc.generations[:4]):
    print(f"  generation {g}: {len(cubes)} cubes, levels {sorted({q.level for q in cubes})}")

coll = random_collection(cfg, rng, root, density=0.3)
cd = build_corona(coll, random_weight(cfg, rng), random_weight(cfg, rng))
sizes = sorted((len(v) for v in cd.parts.values()), reverse=True)
print(f"\ncorona: {len(coll)} cubes split into {len(cd.tops)} parts, largest parts {sizes[:5]}")

for n, L in ((1, 5), (2, 3)):
    c = ModelConfig(n, L)
    omega = random_open_set(c, rng)
    wd = whitney(omega, c)
    sides, counts = np.unique(wd.sides, return_counts=True)
    print(f"\nWhitney in {n}D: |Omega| = {omega.mean():.3f}, {len(wd)} cubes, "
          f"residual fraction {wd.residual_fraction:.4f}, overlap of 1.2x dilates {wd.overlap}")
    print("  cubes per side (in units of 1/4 cell):", dict(zip(sides.tolist(), counts.tolist())))
