"""Dyadic and shifted-grid multilinear maximal functions, the sparse operator,
its dyadic level sets, and a certified lower quadrature for the two-linear
Riesz-type kernel used in the sharpness example."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dyadic import (
    CellFunction, Cube, GridId, ModelConfig, align, cube_mask, level_sums_aligned, reduce_levels,
    same_config, to_cells, upsample,
)
from .errors import ConsistencyError, DomainError
from .sparse import SparseFamily, _fine_slices, product_averages


def dyadic_maximal(gs: Sequence[CellFunction], grid: GridId) -> CellFunction:
    """``sup`` over same-grid cubes containing each cell of ``prod_i avg_Q g_i``."""
    cfg = same_config(*gs)
    grid = GridId(tuple(grid.shift))
    prods = product_averages(gs, grid)
    M = prods[0]
    for k in range(1, cfg.L + 1):
        M = np.maximum(upsample(M, cfg.n, 2), prods[k])
    return CellFunction(cfg, to_cells(M, cfg, grid, cfg.L))


def multi_grid_maximal(gs: Sequence[CellFunction], cfg: ModelConfig | None = None) -> CellFunction:
    """Cellwise maximum of :func:`dyadic_maximal` over all 3**n shifted grids."""
    cfg = cfg or same_config(*gs)
    out = None
    for grid in cfg.grids():
        M = dyadic_maximal(gs, grid).values
        out = M if out is None else np.maximum(out, M)
    return CellFunction(cfg, out)


def sparse_operator_values(fam: SparseFamily, arrays: Sequence[np.ndarray],
                           keep=None) -> np.ndarray:
    """Sparse operator on raw cell arrays; leading batch axes are carried through.

    Terms are accumulated stage by stage; cubes within a stage are disjoint, so
    each cell sees its terms in stage order. ``keep`` restricts the sum to a
    sub-collection while keeping the same accumulation order, which makes the
    result monotone in the sub-collection bit for bit.
    """
    cfg = fam.cfg
    n, L = cfg.n, cfg.L
    lead = np.broadcast_shapes(*(a.shape[: a.ndim - n] for a in arrays))
    acc = np.zeros(lead + cfg.shape)
    if len(fam) == 0:
        return acc
    sums = [level_sums_aligned(align(a, cfg, fam.grid), cfg) for a in arrays]
    for st in fam.stages:
        layer = np.zeros(lead + (2**L,) * n)
        for q in st:
            if keep is not None and q not in keep:
                continue
            term = None
            for s in sums:
                avg = s[q.level][(Ellipsis,) + q.index] / cfg.cube_cells(q.level)
                term = avg if term is None else term * avg
            sl = (Ellipsis,) + _fine_slices(cfg, q)
            layer[sl] = np.asarray(term)[(Ellipsis,) + (None,) * n]
        acc = acc + to_cells(layer, cfg, fam.grid, L)
    return acc


def sparse_operator(fam: SparseFamily, gs: Sequence[CellFunction]) -> CellFunction:
    """``sum_{Q in family} (prod_i avg_Q g_i) 1_Q``."""
    cfg = same_config(*gs)
    if cfg != fam.cfg:
        raise DomainError("family and functions live on different models")
    return CellFunction(cfg, sparse_operator_values(fam, [g.values for g in gs]))


# --- level sets ---------------------------------------------------------------

def _below_power(x: float) -> int:
    """Largest integer l with 2**l < x (x > 0)."""
    mant, e = math.frexp(x)
    return e - 2 if mant == 0.5 else e - 1


def _at_least_power(x: float) -> int:
    """Smallest integer l with 2**l >= x (x > 0)."""
    mant, e = math.frexp(x)
    return e - 1 if mant == 0.5 else e


def maximal_cubes_in(mask: np.ndarray, cfg: ModelConfig, grid: GridId) -> list:
    """Maximal same-grid cubes contained in a cell set."""
    counts = level_sums_aligned(align(mask.astype(np.int64), cfg, grid), cfg)
    found = []
    above = np.zeros((1,) * cfg.n, dtype=bool)
    for k, c in enumerate(counts):
        full = c == cfg.cube_cells(k)
        if k > 0:
            above = upsample(above | prev_full, cfg.n, 2)
        hits = np.argwhere(full & ~above)
        found.extend(Cube(grid, k, tuple(int(x) for x in idx)) for idx in hits)
        prev_full = full
    return sorted(found)


@dataclass
class LevelSetDecomposition:
    """Level sets ``Omega_l = {A > 2**l}`` with maximal cubes and ``E_l(Q)``.

    ``cubes[l]`` are the maximal same-grid cubes inside ``Omega_l``;
    ``in_family[(l, Q)]`` records whether such a cube belongs to the family.
    """

    values: np.ndarray
    levels: list
    omega: dict
    cubes: dict
    e_sets: dict = field(repr=False)
    in_family: dict = field(repr=False)

    def omega_at(self, l: int) -> np.ndarray:
        if l in self.omega:
            return self.omega[l]
        return self.values > 2.0**l


def level_set_decomposition(fam: SparseFamily, gs: Sequence[CellFunction],
                            rtol: float = 1e-12) -> LevelSetDecomposition:
    """Dyadic level sets of the sparse operator, with the localization check

    ``A(g 1_Q)(x) > 2**l`` for every ``x`` in ``E_l(Q) = Q cap Omega_{l+1} minus Omega_{l+2}``.
    """
    cfg = same_config(*gs)
    A = sparse_operator(fam, gs).values
    pos = A[A > 0]
    if pos.size == 0:
        return LevelSetDecomposition(A, [], {}, {}, {}, {})
    lo = _below_power(float(pos.min()))
    hi = _at_least_power(float(A.max()))
    levels = list(range(lo, hi + 1))
    omega = {l: A > 2.0**l for l in range(lo, hi + 3)}
    members = set(fam.cubes)
    cubes, e_sets, in_family = {}, {}, {}
    for l in levels:
        cubes[l] = maximal_cubes_in(omega[l], cfg, fam.grid)
        band = omega[l + 1] & ~omega[l + 2]
        for q in cubes[l]:
            e = cube_mask(cfg, q) & band
            e_sets[(l, q)] = e
            in_family[(l, q)] = q in members
            if e.any():
                local = sparse_operator(fam, [g.restrict(q) for g in gs]).values
                if np.any(local[e] <= 2.0**l * (1 - rtol)):
                    raise ConsistencyError(f"localization failed for level {l}, cube {q}")
    return LevelSetDecomposition(A, levels, omega, cubes, e_sets, in_family)


# --- two-linear Riesz-type kernel ---------------------------------------------

@dataclass(frozen=True)
class GradedMesh:
    """Breakpoints for the y-quadrature.

    Geometric toward 0 with ``per_octave`` panels per halving down to
    ``2**-octaves_below`` times the distance scale, geometric toward the
    closest point of [0, 1] to x, plus ``uniform`` equal panels.
    """

    per_octave: int = 8
    octaves_below: int = 14
    uniform: int = 16


def _kernel_lower(x: float, lo1, hi1, lo2, hi2):
    """Lower bound of |(2x - y1 - y2) / ((x-y1)^2 + (x-y2)^2)^{3/2}| on boxes."""
    if x > 1:
        num = 2 * x - hi1 - hi2
        den = (x - lo1) ** 2 + (x - lo2) ** 2
        return num / den**1.5
    num = lo1 + lo2 - 2 * x
    den = (hi1 - x) ** 2 + (hi2 - x) ** 2
    return num / den**1.5


def _breakpoints(x: float, mesh: GradedMesh) -> np.ndarray:
    d = x - 1.0 if x > 1 else -x
    scale = min(1.0, d)
    q = mesh.per_octave
    octaves = mesh.octaves_below + max(0, int(math.ceil(-math.log2(scale))))
    pts = [0.0, 1.0]
    pts.extend(2.0 ** (-np.arange(1, octaves * q + 1) / q))
    pts.extend(np.linspace(0.0, 1.0, mesh.uniform + 1))
    if x > 1:
        pts.extend(1.0 - scale * 2.0 ** (-np.arange(0, mesh.octaves_below * q + 1) / q))
    b = np.unique(np.clip(np.array(pts), 0.0, 1.0))
    return b


def _power_mass(lo, hi, eps: float):
    """Exact ``int_lo^hi y**(eps-1) dy``."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    out = np.empty_like(hi)
    z = lo == 0
    out[z] = hi[z] ** eps / eps
    nz = ~z
    llo, lhi = np.log(lo[nz]), np.log(hi[nz])
    out[nz] = np.exp(eps * llo) * np.expm1(eps * (lhi - llo)) / eps
    return out


def riesz_like_apply(eps: float, x: float, mesh: GradedMesh | None = None) -> float:
    """Certified lower estimate of ``|R_1(f, f)(x)|`` for ``f(y) = y**(eps-1) 1_(0,1]``.

    The kernel ``(2x - y1 - y2) / ((x-y1)^2 + (x-y2)^2)^{3/2}`` has one sign
    on (0, 1]^2 when x lies outside [0, 1], so no principal value is needed.
    On each product panel the kernel is bounded below by pairing its
    numerator and denominator at opposite corners, and the weight
    ``y**(eps-1)`` is integrated exactly.
    """
    if not 0 < eps <= 1:
        raise DomainError(f"eps must lie in (0, 1], got {eps}")
    if 0.0 <= x <= 1.0:
        raise DomainError(f"x = {x} lies in [0, 1], where the kernel is singular")
    mesh = mesh or GradedMesh()
    b = _breakpoints(x, mesh)
    lo, hi = b[:-1], b[1:]
    mass = _power_mass(lo, hi, eps)
    K = _kernel_lower(x, lo[:, None], hi[:, None], lo[None, :], hi[None, :])
    return float(math.fsum((K * mass[:, None] * mass[None, :]).ravel()))


def riesz_lower_functional(eps: float, p: float, v_exponent: float,
                           mesh: GradedMesh | None = None, t_octaves: int = 24,
                           per_octave: int = 4) -> float:
    """Lower estimate of ``(int_{-1}^{0} |R_1 f(x)|^p |x|**v_exponent dx)^{1/p}``.

    ``|R_1 f(-t)|`` decreases in t, so on a t-panel [a, b] it is bounded below
    by its value at b. Below ``t0 = 2**-t_octaves`` the scaling
    ``|R_1 f(-t)| >= (t/t0)**(2eps-2) |R_1 f(-t0)|`` (the truncated input only
    loses mass as the scale shrinks) reduces the remaining integral to a
    closed-form power integral.
    """
    if v_exponent <= -1:
        raise DomainError("weight exponent must exceed -1")
    t0 = 2.0**-t_octaves
    ts = 2.0 ** (-np.arange(t_octaves * per_octave, -1, -1) / per_octave)
    r = np.array([riesz_like_apply(eps, -t, mesh) for t in ts])
    s = v_exponent + 1.0
    a, bnd = ts[:-1], ts[1:]
    wmass = (bnd**s - a**s) / s
    body = r[1:] ** p * wmass
    expo = (2 * eps - 2) * p + v_exponent
    # int_0^t0 t**expo dt with expo > -1
    tail = r[0] ** p * t0 ** ((2 - 2 * eps) * p) * t0 ** (expo + 1) / (expo + 1)
    return float(math.fsum([tail, *body.tolist()])) ** (1.0 / p)
