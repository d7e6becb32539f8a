"""Stopping-time structures: principal cubes, the two-weight corona
decomposition, and a Whitney decomposition of a cell-union open set.

Each builder re-verifies the defining conditions of its output and raises
:class:`ConsistencyError` if one fails.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dyadic import CellFunction, Cube, ModelConfig, check_cube, same_config
from .errors import ConsistencyError, DegenerateMeasureError, DomainError

STOP_FACTOR = 4.0


# --- principal cubes ----------------------------------------------------------

def _sub_slices(root: Cube, k: int) -> tuple:
    d = k - root.level
    return tuple(slice(j << d, (j + 1) << d) for j in root.index)


@dataclass
class PrincipalCubes:
    """Principal cubes of ``|f|`` with respect to ``sigma`` inside ``root``.

    ``gamma_ids[d]`` holds, for every subcube of the root ``d`` levels down,
    the position in :attr:`cubes` of its minimal principal ancestor.
    """

    root: Cube
    generations: list
    cubes: list
    averages: dict
    gamma_ids: list = field(repr=False)
    sub_averages: list = field(repr=False)

    def gamma(self, q: Cube) -> Cube:
        if not self.root.contains(q):
            raise DomainError(f"{q} is not inside the root {self.root}")
        d = q.level - self.root.level
        local = tuple(j - (r << d) for j, r in zip(q.index, self.root.index))
        return self.cubes[int(self.gamma_ids[d][local])]

    def energy(self, p: float, sigma_mass: dict) -> float:
        """``sum_G (E^sigma_G |f|)**p sigma(G)``."""
        return math.fsum(self.averages[g] ** p * sigma_mass[g] for g in self.cubes)


def build_principal_cubes(f: CellFunction, sigma: CellFunction, root: Cube) -> PrincipalCubes:
    """Breadth-first stopping construction with factor 4 and strict inequality.

    A subcube Q of the root is principal when its sigma-average of ``|f|``
    exceeds 4 times that of the minimal principal cube strictly above it, which
    is the same as being a maximal such cube below that principal cube.
    """
    cfg = same_config(f, sigma)
    check_cube(cfg, root)
    grid = root.grid
    fs = (CellFunction(cfg, np.abs(f.values)) * sigma).sums(grid)
    ss = sigma.sums(grid)
    avgs = []
    for k in range(root.level, cfg.L + 1):
        sl = _sub_slices(root, k)
        s = ss[k][sl]
        if np.any(s <= 0):
            raise DegenerateMeasureError("sigma vanishes on a subcube of the root")
        avgs.append(fs[k][sl] / s)
    cubes = [root]
    generations = [[root]]
    gen_of = [0]
    ids = [np.zeros((1,) * cfg.n, dtype=np.int64)]
    for d in range(1, len(avgs)):
        inherited = ids[-1]
        for ax in range(cfg.n):
            inherited = np.repeat(inherited, 2, axis=ax)
        top_avg = np.array([avgs[cubes[i].level - root.level][_local(cubes[i], root)]
                            for i in range(len(cubes))])[inherited]
        new = avgs[d] > STOP_FACTOR * top_avg
        cur = inherited.copy()
        for local in map(tuple, np.argwhere(new)):
            parent_id = int(inherited[local])
            idx = tuple(int(j) + (r << d) for j, r in zip(local, root.index))
            q = Cube(grid, root.level + d, idx)
            cur[local] = len(cubes)
            cubes.append(q)
            g = gen_of[parent_id] + 1
            gen_of.append(g)
            if g == len(generations):
                generations.append([])
            generations[g].append(q)
        ids.append(cur)
    averages = {q: float(avgs[q.level - root.level][_local(q, root)]) for q in cubes}
    pc = PrincipalCubes(root, [sorted(g) for g in generations], cubes, averages, ids, avgs)
    _verify_principal(pc)
    return pc


def _local(q: Cube, root: Cube) -> tuple:
    d = q.level - root.level
    return tuple(j - (r << d) for j, r in zip(q.index, root.index))


def _verify_principal(pc: PrincipalCubes) -> None:
    root = pc.root
    if pc.generations[0] != [root]:
        raise ConsistencyError("generation 0 must be the root alone")
    for d, (a, ids) in enumerate(zip(pc.sub_averages, pc.gamma_ids)):
        g_avg = np.array([pc.averages[q] for q in pc.cubes])[ids]
        if np.any(a > STOP_FACTOR * g_avg):
            raise ConsistencyError(f"a subcube {d} levels down exceeds 4 times its principal average")
    for q in pc.cubes[1:]:
        par = pc.gamma(q.parent())
        if not pc.averages[q] > STOP_FACTOR * pc.averages[par]:
            raise ConsistencyError(f"principal cube {q} does not beat 4 times its parent {par}")
        # maximality: no cube strictly between q and par beats the threshold
        r = q.parent()
        while r != par:
            if pc.averages.get(r, pc.sub_averages[r.level - root.level][_local(r, root)]) \
                    > STOP_FACTOR * pc.averages[par]:
                raise ConsistencyError(f"principal cube {q} is not maximal below {par}")
            r = r.parent()


# --- corona decomposition -----------------------------------------------------

@dataclass
class CoronaDecomposition:
    tops: list
    lam: dict
    parts: dict
    density: dict = field(repr=False)


def _nearest_ancestor(q: Cube, members: set):
    r = q
    while r.level > 0:
        r = r.parent()
        if r in members:
            return r
    return None


def build_corona(cubes: Iterable[Cube], sigma1: CellFunction, sigma2: CellFunction) -> CoronaDecomposition:
    """Stopping construction on ``rho(Q) = sigma1(Q) sigma2(Q) / |Q|**2``.

    Tops are the maximal cubes of the collection, then recursively the maximal
    cubes with ``rho > 4 rho(current top)``; ``lam(Q)`` is the minimal top
    containing Q.
    """
    cfg = same_config(sigma1, sigma2)
    cubes = sorted(set(cubes), key=lambda c: (c.level, c))
    members = set(cubes)
    rho = {}
    for q in cubes:
        check_cube(cfg, q)
        s1 = float(sigma1.integrals(q.grid, q.level)[q.index])
        s2 = float(sigma2.integrals(q.grid, q.level)[q.index])
        rho[q] = s1 * s2 / q.measure**2
    lam, tops = {}, []
    for q in cubes:
        anc = _nearest_ancestor(q, members)
        if anc is None or rho[q] > STOP_FACTOR * rho[lam[anc]]:
            lam[q] = q
            tops.append(q)
        else:
            lam[q] = lam[anc]
    parts = {t: [] for t in tops}
    for q in cubes:
        parts[lam[q]].append(q)
    cd = CoronaDecomposition(sorted(tops), lam, {t: sorted(v) for t, v in parts.items()}, rho)
    _verify_corona(cd, cubes)
    return cd


def _verify_corona(cd: CoronaDecomposition, cubes: Sequence[Cube]) -> None:
    rho = cd.density
    for q in cubes:
        top = cd.lam[q]
        if not top.contains(q) or top not in cd.parts:
            raise ConsistencyError(f"lambda({q}) = {top} is not a containing top")
        if not STOP_FACTOR * rho[top] >= rho[q]:
            raise ConsistencyError(f"control condition fails at {q}")
    for a, b in itertools.permutations(cd.tops, 2):
        if a != b and b.contains(a) and not rho[a] > STOP_FACTOR * rho[b]:
            raise ConsistencyError(f"tops {a} inside {b} without strict growth")
    if sum(len(v) for v in cd.parts.values()) != len(cubes):
        raise ConsistencyError("corona parts do not partition the collection")


# --- Whitney decomposition ----------------------------------------------------

@dataclass
class WhitneyDecomposition:
    """Closed cubes ``lo + [0, side]**n`` in units of ``h`` = one cell / 2**extra.

    ``residual`` lists the finest-size cubes of Omega not covered because the
    construction stops at side ``h``; each lies within ``sqrt(n) h`` of the
    complement.
    """

    cfg: ModelConfig
    extra: int
    los: np.ndarray
    sides: np.ndarray
    residual: np.ndarray
    gamma: float
    overlap: int

    @property
    def unit(self) -> float:
        return 1.0 / (self.cfg.N * 2**self.extra)

    def __len__(self):
        return len(self.sides)

    def cubes(self) -> list:
        """``(left corner, side)`` pairs in the unit-cube coordinates."""
        u = self.unit
        return [(tuple(float(c) * u for c in lo), float(s) * u) for lo, s in zip(self.los, self.sides)]

    @property
    def residual_fraction(self) -> float:
        return len(self.residual) / (self.cfg.N * 2**self.extra) ** self.cfg.n


def _boundary_cells(omega: np.ndarray) -> np.ndarray:
    """Complement cells whose closure touches a cell of Omega."""
    n = omega.ndim
    pad = np.pad(omega, 1)
    near = np.zeros_like(omega)
    for off in itertools.product((-1, 0, 1), repeat=n):
        sl = tuple(slice(1 + o, 1 + o + s) for o, s in zip(off, omega.shape))
        near |= pad[sl]
    return np.argwhere(near & ~omega)


def _dist2(los: np.ndarray, side: int, comp_lo: np.ndarray, comp_side: int, box: int) -> np.ndarray:
    """Squared distance (integer units) from closed cubes to the complement."""
    hi = los + side
    if len(comp_lo):
        gap = np.maximum(0, np.maximum(comp_lo[None, :, :] - hi[:, None, :],
                                       los[:, None, :] - (comp_lo[None, :, :] + comp_side)))
        d2 = (gap**2).sum(axis=2).min(axis=1)
    else:
        d2 = np.full(len(los), np.iinfo(np.int64).max)
    edge = np.minimum(los, box - hi).min(axis=1)
    edge = np.maximum(edge, 0)
    return np.minimum(d2, edge**2)


def whitney(omega: np.ndarray, cfg: ModelConfig, extra: int = 2, gamma: float = 1.2) -> WhitneyDecomposition:
    """Whitney cubes of the open set given by a cell mask on the non-periodic model.

    The complement is the closure of the cells outside Omega together with the
    outside of the open unit cube. Selected cubes are the maximal dyadic cubes
    (side a power of two in cell units) with ``sqrt(n) l <= dist(Q, complement)``;
    maximality gives ``dist <= 4 sqrt(n) l``. All geometry is integer.
    """
    omega = np.asarray(omega, dtype=bool)
    if omega.shape != cfg.shape:
        raise DomainError(f"mask shape {omega.shape} != model shape {cfg.shape}")
    if not omega.any():
        raise DomainError("Omega is empty")
    if not 1.0 < gamma < 1.25:
        raise DomainError(f"gamma must lie in (1, 5/4), got {gamma}")
    n = cfg.n
    scale = 2**extra
    box = cfg.N * scale
    comp_lo = _boundary_cells(omega) * scale
    # aligned cubes of side 2**(L+1) cells always touch the outside of the box
    side = 2**cfg.L * scale
    cand = np.array(list(itertools.product(range(0, box, side), repeat=n)), dtype=np.int64).reshape(-1, n)
    los, sides, residual = [], [], []
    while True:
        d2 = _dist2(cand, side, comp_lo, scale, box)
        ok = n * side**2 <= d2
        los.extend(cand[ok].tolist())
        sides.extend([side] * int(ok.sum()))
        rest = cand[~ok]
        # keep only cubes meeting Omega
        if len(rest):
            rest = rest[(rest < box).all(axis=1)]
            blk = max(side // scale, 1)
            hit = _block_any(omega, blk)
            rest = rest[hit[tuple((rest // (blk * scale)).T)]]
        if side == 1:
            residual = rest
            break
        side //= 2
        offs = np.array(list(itertools.product((0, side), repeat=n)), dtype=np.int64)
        cand = (rest[:, None, :] + offs[None, :, :]).reshape(-1, n)
    wd = WhitneyDecomposition(cfg, extra, np.array(los, dtype=np.int64).reshape(-1, n),
                              np.array(sides, dtype=np.int64), np.asarray(residual, dtype=np.int64).reshape(-1, n),
                              gamma, 0)
    wd.overlap = verify_whitney(wd, omega, comp_lo)
    return wd


def _block_any(omega: np.ndarray, blk: int) -> np.ndarray:
    """Whether each aligned block of ``blk`` cells per axis meets Omega."""
    if blk == 1:
        return omega
    n = omega.ndim
    shape = []
    for s in omega.shape:
        shape += [s // blk, blk]
    return omega.reshape(shape).any(axis=tuple(range(1, 2 * n, 2)))


def _paint(paint: np.ndarray, los: np.ndarray, side: int) -> None:
    n = paint.ndim
    offs = np.array(list(itertools.product(range(side), repeat=n)), dtype=np.int64)
    idx = (los[:, None, :] + offs[None, :, :]).reshape(-1, n)
    np.add.at(paint, tuple(idx.T), 1)


def _fine_mask(omega: np.ndarray, scale: int) -> np.ndarray:
    out = omega
    for ax in range(omega.ndim):
        out = np.repeat(out, scale, axis=ax)
    return out


def verify_whitney(wd: WhitneyDecomposition, omega: np.ndarray, comp_lo: np.ndarray | None = None) -> int:
    """Check the four Whitney conditions; returns the overlap count of the dilates."""
    cfg, n = wd.cfg, wd.cfg.n
    scale = 2**wd.extra
    box = cfg.N * scale
    if comp_lo is None:
        comp_lo = _boundary_cells(omega) * scale
    # (1) cubes and residual tile Omega with disjoint interiors
    paint = np.zeros((box,) * n, dtype=np.int32)
    for side in np.unique(wd.sides):
        _paint(paint, wd.los[wd.sides == side], int(side))
    if len(wd.residual):
        _paint(paint, wd.residual, 1)
    if not np.array_equal(paint, _fine_mask(omega, scale).astype(np.int32)):
        raise ConsistencyError("Whitney cubes and residual do not tile Omega exactly once")
    # (2) distance band
    for s in np.unique(wd.sides):
        sel = wd.sides == s
        d2 = _dist2(wd.los[sel], int(s), comp_lo, scale, box)
        if np.any(n * s**2 > d2) or np.any(d2 > 16 * n * s**2):
            raise ConsistencyError(f"distance band fails for side {s}")
    if len(wd.residual):
        d2 = _dist2(wd.residual, 1, comp_lo, scale, box)
        if np.any(d2 >= n):
            raise ConsistencyError("residual cube far from the complement")
    # (3) touching cubes have comparable sides
    ids = np.full((box,) * n, -1, dtype=np.int64)
    for side in np.unique(wd.sides):
        sel = np.flatnonzero(wd.sides == side)
        offs = np.array(list(itertools.product(range(int(side)), repeat=n)), dtype=np.int64)
        idx = (wd.los[sel][:, None, :] + offs[None, :, :]).reshape(-1, n)
        ids[tuple(idx.T)] = np.repeat(sel, len(offs))
    pad = np.pad(ids, 1, constant_values=-1)
    a = ids.ravel()
    for off in itertools.product((-1, 0, 1), repeat=n):
        if not any(off):
            continue
        b = pad[tuple(slice(1 + o, 1 + o + box) for o in off)].ravel()
        ok = (a >= 0) & (b >= 0)
        r = wd.sides[b[ok]] / wd.sides[a[ok]]
        if np.any(r < 0.25) or np.any(r > 4):
            raise ConsistencyError("touching cubes with side ratio outside [1/4, 4]")
    # (4) bounded overlap of the dilates
    return dilate_overlap(wd.los, wd.sides, wd.gamma)


def dilate_overlap(los: np.ndarray, sides: np.ndarray, gamma: float) -> int:
    """Exact ``max_x sum_j 1_{gamma Q_j}(x)`` for closed cubes and rational gamma."""
    if len(sides) == 0:
        return 0
    from fractions import Fraction
    g = Fraction(gamma).limit_denominator(1000)
    c2 = 2 * los + sides[:, None]                  # twice the centre
    half = sides * g.numerator                      # den * gamma * side / 2
    lo = c2 * g.denominator - half[:, None]
    hi = c2 * g.denominator + half[:, None]
    n = los.shape[1]
    if n == 1:
        return _max_stab(lo[:, 0], hi[:, 0])
    best = 0
    for x in np.unique(np.concatenate([lo[:, 0], hi[:, 0]])):
        act = (lo[:, 0] <= x) & (x <= hi[:, 0])
        if act.any():
            best = max(best, _max_stab(lo[act, 1], hi[act, 1]))
    return best


def _max_stab(lo: np.ndarray, hi: np.ndarray) -> int:
    """Maximum number of closed intervals sharing a point."""
    x = np.concatenate([lo, hi])
    step = np.concatenate([np.ones(len(lo), dtype=np.int64), -np.ones(len(hi), dtype=np.int64)])
    order = np.lexsort((-step, x))                # openings before closings at equal x
    return int(np.cumsum(step[order]).max())
