"""Experiment harness: inequality reports for the mixed A_P-A_infinity bounds,
the testing constant, the sharpness sweep and the lemma suite.

The sparse operator stands in for a general multilinear Calderon-Zygmund
operator throughout, so the theorem checks are ratio recordings against a
stability budget, while the lemmas whose proofs are exact on the finite model
are asserted with tight tolerances.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import GROUPS, RunConfig
from .constants import (
    _apq_block, ainfty_constant, local_maximal_integrals, multilinear_ap_constant, transform_vector,
)
from .decompositions import build_corona, build_principal_cubes, whitney
from .dyadic import CellFunction, Cube, GridId, ModelConfig, cube_family, cube_mask, subcubes
from .errors import SparsenessError, UnsupportedExponentError
from .instances import (
    instance_rng, random_collection, random_cube, random_exponents, random_family, random_function,
    random_grid, random_open_set, random_weight,
)
from .norms import lp_norm, weak_lp_norm, weak_lp_values
from .operators import (
    dyadic_maximal, level_set_decomposition, riesz_lower_functional, sparse_operator,
    sparse_operator_values,
)
from .sparse import SparseFamily, cz_sparse_from_functions, restage, verify_sparse
from .weights import ExponentSystem, WeightVector

EXACT_RTOL = 1e-9


# --- parallel map -------------------------------------------------------------

def thread_count() -> int:
    raw = os.environ.get("WORKBENCH_THREADS", "0").strip() or "0"
    try:
        k = int(raw)
    except ValueError:
        k = 0
    return k if k > 0 else (os.cpu_count() or 1)


def ordered_map(fn: Callable, items: Sequence, threads: int | None = None) -> list:
    """``[fn(x) for x in items]``, possibly on worker threads; order is preserved."""
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# --- inequality reports ---------------------------------------------------------

@dataclass
class InequalityReport:
    kind: str
    lhs: float
    rhs_factors: dict
    rhs: float
    ratio: float
    metadata: dict = field(default_factory=dict)


def weight_factors(wv: WeightVector) -> dict:
    """[w]_{A_P}, [v]_{A_inf} and [sigma_i]_{A_inf}, each over all shifted grids."""
    out = {
        "apbar": multilinear_ap_constant(wv).value,
        "ainfty_v": ainfty_constant(wv.v).value,
    }
    for i, s in enumerate(wv.sigmas, 1):
        out[f"ainfty_sigma{i}"] = ainfty_constant(s).value
    return out


def assemble_rhs(kind: str, factors: dict, exps: ExponentSystem) -> float:
    """Right-hand side of the strong or weak mixed bound from named factors.

    strong: [w]^{1/p} (prod_i [sigma_i]^{1/p_i} + [v]^{1/p'} sum_{i'} prod_{i != i'} [sigma_i]^{1/p_i})
    weak:   [w]^{1/p} [v]^{1/p'} sum_{i'} prod_{i != i'} [sigma_i]^{1/p_i}
    both times prod_i norm_i.
    """
    p, pp, m = exps.p, exps.p_prime, exps.m
    s = [factors[f"ainfty_sigma{i}"] ** (1.0 / exps.ps[i - 1]) for i in range(1, m + 1)]
    mixed = math.fsum(math.prod(s[:j] + s[j + 1:]) for j in range(m))
    v_term = factors["ainfty_v"] ** (1.0 / pp)
    if kind == "strong":
        bracket = math.prod(s) + v_term * mixed
    elif kind == "weak":
        bracket = v_term * mixed
    else:
        raise ValueError(f"unknown report kind {kind!r}")
    norms = math.prod(factors[f"norm{i}"] for i in range(1, m + 1))
    return factors["apbar"] ** (1.0 / p) * bracket * norms


def _report(kind: str, wv: WeightVector, fs: Sequence[CellFunction], fam: SparseFamily,
            factors: dict | None, metadata: dict | None) -> InequalityReport:
    exps = wv.exps
    if exps.p <= 1:
        raise UnsupportedExponentError(f"the mixed bounds need p > 1, got {exps.p}")
    factors = dict(factors or weight_factors(wv))
    inputs = [f * s for f, s in zip(fs, wv.sigmas)]
    for i, (f, g, w, s, q) in enumerate(zip(fs, inputs, wv.ws, wv.sigmas, exps.ps), 1):
        factors[f"norm{i}"] = lp_norm(g, w, q)                 # ||f_i sigma_i||_{L^{p_i}(w_i)}
        factors[f"norm_sigma{i}"] = lp_norm(f, s, q)           # ||f_i||_{L^{p_i}(sigma_i)}
    A = sparse_operator(fam, inputs)
    lhs = lp_norm(A, wv.v, exps.p) if kind == "strong" else weak_lp_norm(A, wv.v, exps.p)
    rhs = assemble_rhs(kind, factors, exps)
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    return InequalityReport(kind, lhs, factors, rhs, ratio, dict(metadata or {}))


def strong_report(wv, fs, fam, factors=None, metadata=None) -> InequalityReport:
    """``||A(f_1 sigma_1, f_2 sigma_2)||_{L^p(v)}`` against the strong mixed bound."""
    return _report("strong", wv, fs, fam, factors, metadata)


def weak_report(wv, fs, fam, factors=None, metadata=None) -> InequalityReport:
    """Weak-type counterpart of :func:`strong_report`."""
    return _report("weak", wv, fs, fam, factors, metadata)


# --- testing constant -----------------------------------------------------------

@dataclass
class TestingReport:
    t_star: float
    W: float
    C: float
    easy_ratio: float      # max over pairs of T_pair / (p' W_pair)
    pairs: int
    apbar: float

    __test__ = False


def testing_dictionary(wv: WeightVector, cube: Cube, rng: np.random.Generator, pairs: int) -> list:
    """Pairs of functions supported in ``cube``, each normalized in L^{p_i}(sigma_i).

    The first pair is ``(1_Q, 1_Q)``; the rest mix indicators of random
    subcubes and random cascades restricted to the cube.
    """
    cfg = wv.cfg
    mask = cube_mask(cfg, cube).astype(float)
    out = []
    for k in range(pairs):
        pair = []
        for i in range(wv.m):
            if k == 0:
                vals = mask
            elif rng.random() < 0.5:
                cands = subcubes(cfg, cube, int(rng.integers(cube.level, cfg.L + 1)))
                sub = cands[int(rng.integers(len(cands)))]
                vals = cube_mask(cfg, sub).astype(float)
            else:
                vals = random_function(cfg, rng, support=cube).values
            pair.append(vals)
        out.append(pair)
    return out


def testing_from_pairs(wv: WeightVector, fam: SparseFamily, dictionary: dict) -> TestingReport:
    """Testing constant and weak operator ratio over a per-cube dictionary.

    ``dictionary[Q]`` is a list of m-tuples of cell arrays supported in Q. Each
    function is normalized in L^{p_i}(sigma_i) here, so scaling inputs has no
    effect. For every pair the localized integral obeys
    ``int_Q A v <= p' ||A||_{L^{p,inf}(v)} v(Q)^{1/p'}``, which is the easy
    direction checked pair by pair.
    """
    cfg, exps = wv.cfg, wv.exps
    p, pp = exps.p, exps.p_prime
    vol = cfg.cell_volume
    apbar = multilinear_ap_constant(wv).value
    t_star = W = 0.0
    easy = 0.0
    count = 0
    vvals = wv.v.values
    for q in fam.cubes:
        pairs = dictionary.get(q, [])
        if not pairs:
            continue
        mask = cube_mask(cfg, q)
        slots = []
        for i in range(wv.m):
            F = np.stack([np.asarray(pr[i], dtype=float) for pr in pairs])
            norms = np.array([lp_norm(CellFunction(cfg, f), wv.sigmas[i], exps.ps[i]) for f in F])
            norms[norms == 0] = 1.0
            F = F / norms.reshape((-1,) + (1,) * cfg.n)
            slots.append(F * wv.sigmas[i].values)
        A = sparse_operator_values(fam, slots)
        vq = math.fsum(vvals[mask].tolist()) * vol
        flat = A.reshape(len(pairs), -1)
        local = np.array([math.fsum((row[mask.ravel()] * vvals[mask]).tolist()) * vol for row in flat])
        T = local / vq ** (1.0 / pp)
        Wp = weak_lp_values(flat, vvals.ravel(), p, vol)
        t_star = max(t_star, float(T.max()))
        W = max(W, float(Wp.max()))
        pos = Wp > 0
        if pos.any():
            easy = max(easy, float((T[pos] / (pp * Wp[pos])).max()))
        if np.any(T[~pos] > 0):
            easy = math.inf
        count += len(pairs)
    denom = t_star + apbar ** (1.0 / p)
    return TestingReport(t_star, W, W / denom if denom > 0 else 0.0, easy, count, apbar)


def testing_constant(wv: WeightVector, fam: SparseFamily, rng: np.random.Generator,
                     pairs: int = 32) -> float:
    """Dictionary estimate of the testing constant T_* (a lower estimate of the sup)."""
    return testing_equiv_report(wv, fam, rng, pairs).t_star


def testing_equiv_report(wv: WeightVector, fam: SparseFamily, rng: np.random.Generator,
                         pairs: int = 32) -> TestingReport:
    dictionary = {q: testing_dictionary(wv, q, rng, pairs) for q in fam.cubes}
    return testing_from_pairs(wv, fam, dictionary)


# --- sharpness sweep --------------------------------------------------------------

SWEEP_COLUMNS = ("eps", "apbar", "ainf_sigma1", "ainf_sigma2", "ainf_v", "norm_f1", "norm_f2", "r1_lower")


@dataclass
class SweepRow:
    eps: float
    apbar: float
    ainf_sigma1: float
    ainf_sigma2: float
    ainf_v: float
    norm_f1: float
    norm_f2: float
    r1_lower: float
    seconds: float = field(default=0.0, compare=False)

    def values(self) -> list:
        return [getattr(self, c) for c in SWEEP_COLUMNS]


@dataclass
class SlopeFit:
    quantity: str
    slope: float
    target: float
    relation: str          # "approx", "at_least" or "at_most"
    max_residual: float
    passed: bool


def power_norm(eps: float, p_i: float) -> float:
    """``||x**(eps-1)||_{L^{p_i}(x**((1-eps)(p_i-1)))}`` on (0, 1]: the integrand is x**(eps-1)."""
    return eps ** (-1.0 / p_i)


def sweep_row(eps: float, exps: ExponentSystem, L: int = 12) -> SweepRow:
    """Constants, norms and the R_1 lower functional for one eps.

    Weight constants run over the segment model: cubes crossing the seam
    would join the singularity at 0 to the far end of the interval.
    """
    if not 2.0**-10 <= eps <= 2.0**-3:
        from .errors import LevelRangeError
        raise LevelRangeError(f"eps {eps} outside [2^-10, 2^-3]")
    t0 = time.perf_counter()
    cfg = ModelConfig(1, L)
    wv = WeightVector.power_law(cfg, exps, eps)
    apbar = multilinear_ap_constant(wv, periodic=False).value
    ainf_s = [ainfty_constant(s, periodic=False).value for s in wv.sigmas]
    ainf_v = ainfty_constant(wv.v, periodic=False).value
    norms = [power_norm(eps, q) for q in exps.ps]
    v_exp = (1 - eps) * (exps.m * exps.p - 1)
    r1 = riesz_lower_functional(eps, exps.p, v_exp)
    return SweepRow(eps, apbar, ainf_s[0], ainf_s[1], ainf_v, norms[0], norms[1], r1,
                    time.perf_counter() - t0)


def fit_slope(eps: Sequence[float], values: Sequence[float]) -> tuple:
    """Least-squares slope of log(value) against log(1/eps), and the max log-residual."""
    x = np.log(1.0 / np.asarray(eps, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    slope, icpt = np.polyfit(x, y, 1)
    res = float(np.max(np.abs(y - (slope * x + icpt))))
    return float(slope), res


def sharpness_slopes(rows: Sequence[SweepRow], exps: ExponentSystem, tol: float = 0.05) -> list:
    m, p = exps.m, exps.p
    eps = [r.eps for r in rows]
    specs = [
        ("apbar", [r.apbar for r in rows], m * p - 1, "approx"),
        ("norm_product", [r.norm_f1 * r.norm_f2 for r in rows], 1.0 / p, "approx"),
        ("r1_lower", [r.r1_lower for r in rows], m + 1.0 / p, "at_least"),
        ("ainf_sigma1", [r.ainf_sigma1 for r in rows], 1.0, "at_most"),
        ("ainf_sigma2", [r.ainf_sigma2 for r in rows], 1.0, "at_most"),
    ]
    fits = []
    for name, vals, target, rel in specs:
        slope, res = fit_slope(eps, vals)
        if rel == "approx":
            ok = abs(slope - target) <= tol * target
        elif rel == "at_least":
            ok = slope >= (1 - tol) * target
        else:
            ok = slope <= (1 + tol) * target
        fits.append(SlopeFit(name, slope, target, rel, res, bool(ok)))
    return fits


def sharpness_sweep(exps: ExponentSystem, eps_list: Sequence[float], L: int = 12,
                    tol: float = 0.05, threads: int | None = None) -> tuple:
    """Rows ordered by decreasing eps, plus the fitted slopes."""
    if exps.m != 2:
        raise UnsupportedExponentError("the sweep is two-linear")
    if exps.p <= 1:
        raise UnsupportedExponentError(f"the sweep needs p > 1, got {exps.p}")
    eps_list = sorted(eps_list, reverse=True)
    if len(eps_list) < 6:
        raise ValueError("slope fits need at least 6 eps values")
    rows = ordered_map(lambda e: sweep_row(e, exps, L), eps_list, threads)
    return rows, sharpness_slopes(rows, exps, tol)


# --- lemma suite -------------------------------------------------------------------

@dataclass
class CheckResult:
    check_name: str
    status: str          # "pass" or "fail"
    value: float         # worst measured ratio (or error)
    bound: float
    slack: float         # bound - value; negative means failure
    instances: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _check(name: str, values: Sequence[float], bound: float, rtol: float = 0.0) -> CheckResult:
    worst = max(values) if len(values) else 0.0
    ok = worst <= bound * (1 + rtol) if math.isfinite(worst) else False
    return CheckResult(name, "pass" if ok else "fail", float(worst), float(bound),
                       float(bound - worst), len(values))


def _derived_vector(cfg: ModelConfig, rng, choices) -> WeightVector:
    exps = ExponentSystem(random_exponents(rng, choices))
    return WeightVector([random_weight(cfg, rng) for _ in range(exps.m)], exps)


def _inst_carleson(seed: int, rc: RunConfig) -> tuple:
    cfg = ModelConfig(1, rc.L)
    rng = instance_rng(seed, "carleson")
    w = random_weight(cfg, rng)
    grid = random_grid(cfg, rng)
    S = random_cube(cfg, grid, rng, max_level=2)
    fam = random_family(cfg, rng, rc.depth, grid, root=S)
    total = math.fsum(float(w.integrals(grid, q.level)[q.index]) for q in fam.cubes)
    mid = 2 * float(local_maximal_integrals(w, grid)[S.level][S.index]) * cfg.cell_volume
    a_inf = ainfty_constant(w, grid).value
    rhs = 2 * a_inf * float(w.integrals(grid, S.level)[S.index])
    return total / mid, mid / rhs


def _inst_transform(seed: int, rc: RunConfig) -> tuple:
    rng = instance_rng(seed, "transform")
    cfg = ModelConfig(int(rng.integers(1, 3)), 3)
    wv = _derived_vector(cfg, rng, rc.exponent_choices)
    exps = wv.exps
    cube_err = sup_err = 0.0
    for i in range(wv.m):
        wi = transform_vector(wv, i)
        power = exps.conj(i) / exps.p
        for grid, k, _ in cube_family(cfg):
            a = _apq_block(wv, grid, k) ** power
            b = _apq_block(wi, grid, k)
            cube_err = max(cube_err, float(np.max(np.abs(b - a) / a)))
        s0 = multilinear_ap_constant(wv).value ** power
        s1 = multilinear_ap_constant(wi).value
        sup_err = max(sup_err, abs(s1 - s0) / s0)
    return cube_err, sup_err


def _inst_weak_maximal(seed: int, rc: RunConfig) -> float:
    cfg = ModelConfig(1, rc.L)
    rng = instance_rng(seed, "weak_maximal")
    wv = _derived_vector(cfg, rng, rc.exponent_choices)
    fs = [random_function(cfg, rng) for _ in range(wv.m)]
    grid = random_grid(cfg, rng)
    M = dyadic_maximal(fs, grid)
    lhs = weak_lp_norm(M, wv.v, wv.exps.p)
    apbar = multilinear_ap_constant(wv, [grid]).value
    rhs = apbar ** (1.0 / wv.exps.p) * math.prod(
        lp_norm(f, w, q) for f, w, q in zip(fs, wv.ws, wv.exps.ps))
    return lhs - rhs


def _e_set_check(fam: SparseFamily) -> bool:
    cfg = fam.cfg
    cover = np.zeros(cfg.shape, dtype=np.int64)
    for (k, q), e in fam.e_sets().items():
        if 2 * int(e.sum()) < cfg.cube_cells(q.level):
            return False
        cover += e
    return int(cover.max(initial=0)) <= 1


def _inst_sparse(seed: int, rc: RunConfig) -> tuple:
    """Violations among random, stopping-time and sub-families, and cz failures."""
    rng = instance_rng(seed, "sparse")
    n = int(rng.integers(1, 3))
    cfg = ModelConfig(n, 6 if n == 1 else 4)
    bad = 0
    fam = random_family(cfg, rng, int(rng.integers(0, cfg.L + 1)))
    families = [fam]
    cz_fail = 0
    fs = [random_function(cfg, rng) for _ in range(2)]
    try:
        families.append(cz_sparse_from_functions(fs, random_grid(cfg, rng), rc.cz_ratio))
    except SparsenessError:
        cz_fail = 1
    for base in list(families):
        cubes = base.cubes
        for _ in range(3):
            keep = [q for q in cubes if rng.random() < 0.6]
            families.append(restage(cfg, base.grid, keep))
    for f in families:
        if verify_sparse(f) is not None or not _e_set_check(f):
            bad += 1
    return bad, cz_fail, len(families)


def _inst_principal(seed: int, rc: RunConfig) -> float:
    rng = instance_rng(seed, "principal")
    n = int(rng.integers(1, 3))
    cfg = ModelConfig(n, rc.L if n == 1 else 4)
    sigma = random_weight(cfg, rng)
    f = random_function(cfg, rng)
    grid = random_grid(cfg, rng)
    root = random_cube(cfg, grid, rng, max_level=2)
    p1 = random_exponents(rng, rc.exponent_choices)[0]
    pc = build_principal_cubes(f, sigma, root)
    mass = {g: float(sigma.integrals(g.grid, g.level)[g.index]) for g in pc.cubes}
    energy = pc.energy(p1, mass)
    norm = lp_norm(f.restrict(root), sigma, p1) ** p1
    return energy / norm / (2 * 4.0**p1) if norm > 0 else 0.0


def _inst_corona(seed: int, rc: RunConfig) -> int:
    rng = instance_rng(seed, "corona")
    n = int(rng.integers(1, 3))
    cfg = ModelConfig(n, 6 if n == 1 else 3)
    grid = random_grid(cfg, rng)
    root = random_cube(cfg, grid, rng, max_level=1)
    coll = random_collection(cfg, rng, root, 0.3 if n == 1 else 0.15)
    cd = build_corona(coll, random_weight(cfg, rng), random_weight(cfg, rng))
    return abs(sum(len(v) for v in cd.parts.values()) - len(set(coll)))


def _inst_whitney(seed: int, rc: RunConfig) -> tuple:
    rng = instance_rng(seed, "whitney")
    out = []
    for n, L in ((1, 6), (2, 3)):
        cfg = ModelConfig(n, L)
        wd = whitney(random_open_set(cfg, rng), cfg)
        out.append(wd.overlap)
    return tuple(out)


def _inst_level_sets(seed: int, rc: RunConfig) -> int:
    rng = instance_rng(seed, "level_sets")
    cfg = ModelConfig(1, 6)
    fam = random_family(cfg, rng, rc.depth)
    fs = [random_function(cfg, rng) for _ in range(2)]
    dec = level_set_decomposition(fam, fs)
    if not dec.levels:
        return 0
    bad = 0
    cover = np.zeros(cfg.shape, dtype=np.int64)
    for parity in (0, 1):
        par = np.zeros(cfg.shape, dtype=np.int64)
        for (l, q), e in dec.e_sets.items():
            if l % 2 == parity:
                par += e
        bad += int(par.max(initial=0) > 1)
        cover += par
    target = dec.omega_at(dec.levels[0] + 1)
    bad += int(not np.array_equal(cover, target.astype(np.int64)))
    for l in dec.levels:
        seen = np.zeros(cfg.shape, dtype=np.int64)
        for q in dec.cubes[l]:
            seen += cube_mask(cfg, q)
        bad += int(not np.array_equal(seen, dec.omega_at(l).astype(np.int64)))
    return bad


def _inst_lemma_l1(seed: int, rc: RunConfig) -> float:
    cfg = ModelConfig(1, rc.L)
    rng = instance_rng(seed, "lemma_l1")
    wv = _derived_vector(cfg, rng, rc.exponent_choices)
    exps = wv.exps
    grid = random_grid(cfg, rng)
    S = random_cube(cfg, grid, rng, max_level=2)
    fam = random_family(cfg, rng, rc.depth, grid, root=S)
    mS = cube_mask(cfg, S)
    A = sparse_operator(fam, [CellFunction(cfg, s.values * mS) for s in wv.sigmas])
    lhs = lp_norm(A, wv.v, exps.p)
    sums = [math.fsum(float(s.integrals(grid, q.level)[q.index]) for q in fam.cubes) for s in wv.sigmas]
    rhs = multilinear_ap_constant(wv).value ** (1 / exps.p) * math.prod(
        t ** (1 / q) for t, q in zip(sums, exps.ps))
    return lhs / rhs


def _inst_lemma_l2(seed: int, rc: RunConfig) -> float:
    cfg = ModelConfig(1, rc.L)
    rng = instance_rng(seed, "lemma_l2")
    wv = _derived_vector(cfg, rng, rc.exponent_choices)
    exps = wv.exps
    grid = random_grid(cfg, rng)
    fam = random_family(cfg, rng, rc.depth, grid)
    S = random_cube(cfg, grid, rng, max_level=3)
    mS = cube_mask(cfg, S)
    f1 = random_function(cfg, rng, support=S)
    A = sparse_operator(fam, [f1 * wv.sigmas[0], CellFunction(cfg, wv.sigmas[1].values * mS)])
    lhs = lp_norm(CellFunction(cfg, A.values * mS), wv.v, exps.p)
    fac = weight_factors(wv)
    p1, p2 = exps.ps
    rhs = (fac["apbar"] ** (1 / exps.p) * fac["ainfty_sigma2"] ** (1 / p2)
           * (fac["ainfty_v"] ** (1 / exps.p_prime) + fac["ainfty_sigma1"] ** (1 / p1))
           * lp_norm(f1, wv.sigmas[0], p1)
           * float(wv.sigmas[1].integrals(grid, S.level)[S.index]) ** (1 / p2))
    return lhs / rhs


def report_instance(seed: int, rc: RunConfig) -> tuple:
    """Strong, weak and testing reports for one seeded instance."""
    cfg = rc.model
    rng = instance_rng(seed, "report")
    wv = _derived_vector(cfg, rng, rc.exponent_choices)
    fs = [random_function(cfg, rng) for _ in range(wv.m)]
    grid = random_grid(cfg, rng)
    if rc.cz_ratio is not None:
        try:
            fam = cz_sparse_from_functions([f * s for f, s in zip(fs, wv.sigmas)], grid, rc.cz_ratio)
        except SparsenessError:
            fam = random_family(cfg, rng, rc.depth, grid)
    else:
        fam = random_family(cfg, rng, rc.depth, grid)
    meta = {"seed": seed, "n": cfg.n, "L": cfg.L, "family_size": len(fam),
            "p1": wv.exps.ps[0], "p2": wv.exps.ps[1]}
    factors = weight_factors(wv)
    strong = strong_report(wv, fs, fam, factors, meta)
    weak = weak_report(wv, fs, fam, factors, meta)
    testing = testing_equiv_report(wv, fam, rng, rc.dictionary_pairs)
    return strong, weak, testing


def _inst_testing(seed: int, rc: RunConfig) -> tuple:
    cfg = ModelConfig(1, min(rc.L, 6))
    rng = instance_rng(seed, "testing")
    wv = _derived_vector(cfg, rng, rc.exponent_choices)
    fam = random_family(cfg, rng, rc.depth)
    rep = testing_equiv_report(wv, fam, rng, rc.dictionary_pairs)
    return rep.easy_ratio, rep.C


def _inst_monotonicity(seed: int, rc: RunConfig) -> int:
    cfg = ModelConfig(1, rc.L)
    rng = instance_rng(seed, "monotonicity")
    wv = _derived_vector(cfg, rng, rc.exponent_choices)
    fs = [random_function(cfg, rng) for _ in range(wv.m)]
    fam = random_family(cfg, rng, rc.depth)
    arrays = [(f * s).values for f, s in zip(fs, wv.sigmas)]
    keep = set()
    prev_s = prev_w = -1.0
    bad = 0
    for q in fam.cubes:
        keep.add(q)
        A = CellFunction(cfg, sparse_operator_values(fam, arrays, keep))
        s = lp_norm(A, wv.v, wv.exps.p)
        w = weak_lp_norm(A, wv.v, wv.exps.p)
        bad += int(s < prev_s) + int(w < prev_w)
        prev_s, prev_w = s, w
    return bad


def _group(name: str, rc: RunConfig, threads: int | None) -> list:
    count = rc.instances(name)
    seeds = [rc.seed + k for k in range(count)]
    fn = globals()[f"_inst_{name}"]
    res = ordered_map(lambda s: fn(s, rc), seeds, threads)
    if name == "carleson":
        return [_check("carleson_sparse_sum", [r[0] for r in res], 1.0, EXACT_RTOL),
                _check("carleson_ainfty", [r[1] for r in res], 1.0, EXACT_RTOL)]
    if name == "transform":
        return [_check("transform_per_cube", [r[0] for r in res], 1e-10),
                _check("transform_supremum", [r[1] for r in res], 1e-10)]
    if name == "weak_maximal":
        return [_check("weak_maximal_excess", res, 1e-9)]
    if name == "sparse":
        return [_check("sparse_violations", [float(r[0]) for r in res], 0.0),
                CheckResult("cz_sparse_failures", "pass", float(sum(r[1] for r in res)), math.inf,
                            math.inf, len(res))]
    if name == "principal":
        return [_check("principal_energy", res, 1.0)]
    if name == "corona":
        return [_check("corona_partition", [float(r) for r in res], 0.0)]
    if name == "whitney":
        return [_check("whitney_overlap_1d", [float(r[0]) for r in res], 4.0),
                _check("whitney_overlap_2d", [float(r[1]) for r in res], 16.0)]
    if name == "level_sets":
        return [_check("level_set_structure", [float(r) for r in res], 0.0)]
    if name == "lemma_l1":
        return [_check("lemma_l1_ratio", res, rc.ratio_cap)]
    if name == "lemma_l2":
        return [_check("lemma_l2_ratio", res, rc.ratio_cap)]
    if name == "testing":
        return [_check("testing_easy_direction", [r[0] for r in res], 1.0, EXACT_RTOL),
                _check("testing_constant_C", [r[1] for r in res], rc.ratio_cap)]
    if name == "monotonicity":
        return [_check("monotone_in_family", [float(r) for r in res], 0.0)]
    raise KeyError(name)


def lemma_suite(rc: RunConfig, groups: Sequence[str] | None = None, threads: int | None = None) -> list:
    """Run the selected check groups (all by default); results in a fixed order."""
    groups = groups or rc.groups or GROUPS
    out = []
    for g in GROUPS:
        if g in groups and rc.instances(g) > 0:
            out.extend(_group(g, rc, threads))
    return out
