"""Suprema over the finite cube family: multilinear A_P, A_infinity, and the
weight-vector transform that swaps one slot for the dual of the product weight."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dyadic import (
    CellFunction, Cube, GridId, check_cube, cube_family, reduce_levels, upsample,
)
from .errors import ConfigError
from .weights import WeightVector, conjugate


@dataclass(frozen=True)
class ConstantReport:
    value: float
    argmax_cube: Cube
    family_size: int


class _Argmax:
    """Running maximum with lexicographic (grid, level, index) tie-breaking.

    Callers feed blocks in lexicographic order; only a strictly larger value
    replaces the incumbent, and ``np.argmax`` returns the first maximum in C
    order, so the earliest cube wins ties.
    """

    def __init__(self):
        self.value = -np.inf
        self.cube = None
        self.count = 0

    def feed(self, grid: GridId, k: int, arr: np.ndarray, keep: np.ndarray | None):
        if keep is not None:
            arr = np.where(keep, arr, -np.inf)
            self.count += int(keep.sum())
        else:
            self.count += arr.size
        if arr.size == 0:
            return
        flat = int(np.argmax(arr))
        val = float(arr.ravel()[flat])
        if val > self.value:
            self.value = val
            self.cube = Cube(grid, k, tuple(int(x) for x in np.unravel_index(flat, arr.shape)))

    def report(self) -> ConstantReport:
        return ConstantReport(self.value, self.cube, self.count)


def _apq_block(wv: WeightVector, grid: GridId, k: int) -> np.ndarray:
    p = wv.exps.p
    out = wv.v.averages(grid, k)
    for sigma, q in zip(wv.sigmas, wv.exps.ps):
        out = out * sigma.averages(grid, k) ** (p / conjugate(q))
    return out


def apq_per_cube(wv: WeightVector, cube: Cube) -> float:
    """``avg_Q(v) * prod_i avg_Q(sigma_i) ** (p / p_i')``."""
    check_cube(wv.cfg, cube)
    return float(_apq_block(wv, cube.grid, cube.level)[cube.index])


def multilinear_ap_constant(wv: WeightVector, grids: Sequence[GridId] | None = None,
                            periodic: bool = True) -> ConstantReport:
    """Supremum of :func:`apq_per_cube` over all levels of the given grids."""
    best = _Argmax()
    for grid, k, keep in cube_family(wv.cfg, grids, periodic):
        best.feed(grid, k, _apq_block(wv, grid, k), keep)
    return best.report()


def local_maximal_integrals(w: CellFunction, grid: GridId) -> list:
    """For each level k, the per-cube array of ``int_Q M^D(w 1_Q)`` in cell-sum units.

    ``M^D(w 1_Q)`` at a point of Q is the largest average of w over same-grid
    cubes between Q and the point; it is built top-down from Q's level.
    """
    cfg = w.cfg
    n, L = cfg.n, cfg.L
    avgs = [w.averages(grid, k) for k in range(L + 1)]
    cells_per_finest = 3**n
    out = []
    for k in range(L + 1):
        M = avgs[k]
        for j in range(k + 1, L + 1):
            M = np.maximum(upsample(M, n, 2), avgs[j])
        out.append(reduce_levels(M * cells_per_finest, n, L - k))
    return out


def ainfty_constant(w: CellFunction, grid: GridId | None = None,
                    periodic: bool = True) -> ConstantReport:
    """Grid-matched Fujii-Wilson constant ``sup_Q w(Q)^-1 int_Q M^D(w 1_Q)``.

    ``grid=None`` takes the maximum over every shifted grid.
    """
    grids = [grid] if grid is not None else w.cfg.grids()
    best = _Argmax()
    for g in grids:
        g = GridId(tuple(g.shift))
        integ = local_maximal_integrals(w, g)
        for gg, k, keep in cube_family(w.cfg, [g], periodic):
            best.feed(gg, k, integ[k] / w.sums(gg)[k], keep)
    return best.report()


def ainfty_per_cube(w: CellFunction, cube: Cube) -> float:
    check_cube(w.cfg, cube)
    integ = local_maximal_integrals(w, cube.grid)[cube.level]
    return float(integ[cube.index] / w.sums(cube.grid)[cube.level][cube.index])


def transform_vector(wv: WeightVector, i: int) -> WeightVector:
    """Replace slot ``i`` by ``v ** (1 - p')`` with exponent ``p'``."""
    if not 0 <= i < wv.m:
        raise ConfigError(f"slot {i} out of range for m = {wv.m}")
    if not wv.derived:
        raise ConfigError("transform needs a weight vector with derived dual and product weights")
    exps = wv.exps
    pp = exps.p_prime
    ws = list(wv.ws)
    ws[i] = CellFunction(wv.cfg, wv.v.values ** (1.0 - pp))
    return WeightVector(ws, exps.with_slot(i, pp), clamp=None)

