from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dyadicbench.dyadic import CellFunction, Cube, GridId, ModelConfig, cube_mask, cubes_at_level
from dyadicbench.errors import DomainError
from dyadicbench.operators import (
    GradedMesh, dyadic_maximal, level_set_decomposition, maximal_cubes_in, multi_grid_maximal,
    riesz_like_apply, riesz_lower_functional, sparse_operator,
)
from dyadicbench.sparse import SparseFamily, random_sparse

G0 = GridId((0,))


def test_maximal_of_constants_is_one():
    cfg = ModelConfig(2, 2)
    one = CellFunction.constant(cfg, 1.0)
    for g in cfg.grids():
        assert np.all(dyadic_maximal([one, one], g).values == 1.0)
    assert np.all(multi_grid_maximal([one, one]).values == 1.0)


def _brute_maximal(vals, cfg, grid):
    """Exact rational maximal function by enumerating every cube containing each cell."""
    fr = [[Fraction(x) for x in v.ravel()] for v in vals]
    out = [Fraction(0)] * cfg.N**cfg.n
    for k in range(cfg.L + 1):
        for q in cubes_at_level(cfg, grid, k):
            idx = np.flatnonzero(cube_mask(cfg, q).ravel())
            prod = Fraction(1)
            for f in fr:
                prod *= sum(f[i] for i in idx) / len(idx)
            for i in idx:
                out[i] = max(out[i], prod)
    return np.array([float(x) for x in out]).reshape(cfg.shape)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 2))
def test_dyadic_maximal_against_rational_brute_force(seed, n):
    cfg = ModelConfig(n, 2 if n == 1 else 1)
    rng = np.random.default_rng(seed)
    vals = [rng.integers(0, 9, size=cfg.shape).astype(float) for _ in range(2)]
    g = cfg.grids()[int(rng.integers(3**n))]
    got = dyadic_maximal([CellFunction(cfg, v) for v in vals], g).values
    assert np.allclose(got, _brute_maximal(vals, cfg, g), rtol=1e-14, atol=0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_maximal_dominates_averages(seed):
    cfg = ModelConfig(1, 4)
    rng = np.random.default_rng(seed)
    gs = [CellFunction(cfg, rng.random(cfg.shape)) for _ in range(2)]
    for g in cfg.grids():
        M = dyadic_maximal(gs, g).values
        for k in range(cfg.L + 1):
            prod = gs[0].averages(g, k) * gs[1].averages(g, k)
            for q in cubes_at_level(cfg, g, k):
                assert np.all(M[cube_mask(cfg, q)] >= prod[q.index])


def test_sparse_operator_examples():
    cfg = ModelConfig(1, 1)
    root, half = Cube(G0, 0, (0,)), Cube(G0, 1, (0,))
    one = CellFunction.constant(cfg, 1.0)
    fam = SparseFamily(cfg, G0, ((root,), (half,)))
    A = sparse_operator(fam, [one, one]).values
    assert np.array_equal(A, np.r_[[2.0] * 3, [1.0] * 3])
    g1 = CellFunction.from_halves(cfg, 4.0, 0.0)
    A = sparse_operator(fam, [g1, one]).values
    assert np.array_equal(A, np.r_[[6.0] * 3, [2.0] * 3])
    A = sparse_operator(SparseFamily.single(root, cfg), [g1, g1]).values
    assert np.allclose(A, 4.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_sparse_operator_is_multilinear(seed, c):
    cfg = ModelConfig(1, 4)
    rng = np.random.default_rng(seed)
    fam = random_sparse(cfg, GridId((1,)), seed, 4)
    a, b, h = (CellFunction(cfg, rng.random(cfg.shape)) for _ in range(3))
    base = sparse_operator(fam, [a, h]).values
    assert np.allclose(sparse_operator(fam, [a * c, h]).values, c * base, rtol=1e-12, atol=0)
    assert np.allclose(sparse_operator(fam, [a + b, h]).values,
                       base + sparse_operator(fam, [b, h]).values, rtol=1e-12, atol=0)


def test_maximal_cubes_in():
    cfg = ModelConfig(1, 2)
    mask = np.zeros(cfg.shape, dtype=bool)
    mask[:6] = True          # [0, 1/2)
    mask[9:12] = True        # [3/4, 1)
    assert maximal_cubes_in(mask, cfg, G0) == [Cube(G0, 1, (0,)), Cube(G0, 2, (3,))]
    assert maximal_cubes_in(np.ones(cfg.shape, bool), cfg, G0) == [Cube(G0, 0, (0,))]
    assert maximal_cubes_in(np.zeros(cfg.shape, bool), cfg, G0) == []


def test_level_sets_hand_example():
    # A = (6, 2): thresholds are strict, so Omega_1 = Omega_2 = [0, 1/2) and Omega_3 is empty
    cfg = ModelConfig(1, 1)
    root, half = Cube(G0, 0, (0,)), Cube(G0, 1, (0,))
    fam = SparseFamily(cfg, G0, ((root,), (half,)))
    dec = level_set_decomposition(fam, [CellFunction.from_halves(cfg, 4.0, 0.0), CellFunction.constant(cfg, 1.0)])
    assert dec.cubes[0] == [root]
    assert dec.cubes[1] == [half]
    assert dec.cubes[2] == [half]
    assert not dec.omega_at(3).any()
    assert dec.in_family[(1, half)] and dec.in_family[(0, root)]


def test_level_sets_empty_family():
    cfg = ModelConfig(1, 2)
    dec = level_set_decomposition(SparseFamily.empty(cfg), [CellFunction.constant(cfg, 1.0)] * 2)
    assert dec.levels == [] and not dec.omega_at(0).any()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_level_set_e_sets_by_parity(seed):
    cfg = ModelConfig(1, 5)
    rng = np.random.default_rng(seed)
    fam = random_sparse(cfg, G0, seed, 4)
    gs = [CellFunction(cfg, rng.random(cfg.shape) * (rng.random(cfg.shape) < 0.5)) for _ in range(2)]
    dec = level_set_decomposition(fam, gs)
    if not dec.levels:
        return
    total = np.zeros(cfg.shape, dtype=int)
    for parity in (0, 1):
        cover = sum((e.astype(int) for (l, q), e in dec.e_sets.items() if l % 2 == parity),
                    np.zeros(cfg.shape, dtype=int))
        assert cover.max() <= 1
        total += cover
    assert np.array_equal(total > 0, dec.omega_at(dec.levels[0] + 1))


# --- Riesz-type kernel ------------------------------------------------------

def _oracle(eps, x):
    from scipy.integrate import dblquad

    def k(y2, y1):
        return (2 * x - y1 - y2) / ((x - y1) ** 2 + (x - y2) ** 2) ** 1.5 * (y1 * y2) ** (eps - 1)

    return abs(dblquad(k, 0, 1, 0, 1, epsabs=0, epsrel=1e-10)[0])


@pytest.mark.parametrize("eps,x", [(1.0, 2.0), (0.5, 2.0), (0.5, -0.5), (0.25, 3.0)])
def test_riesz_lower_estimate_against_quadrature(eps, x):
    ref = _oracle(eps, x)
    coarse = riesz_like_apply(eps, x)
    fine = riesz_like_apply(eps, x, GradedMesh(per_octave=64, octaves_below=20, uniform=256))
    assert coarse <= fine <= ref
    assert coarse >= 0.95 * ref
    assert fine == pytest.approx(ref, rel=5e-3)


def test_riesz_epsilon_one_value():
    # f = 1 on (0, 1]; adaptive quadrature reference
    assert _oracle(1.0, 2.0) == pytest.approx(0.32420025239865546, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.floats(2.0**-10, 1.0), st.one_of(st.floats(1.01, 50.0), st.floats(-50.0, -0.01)))
def test_riesz_positive(eps, x):
    assert riesz_like_apply(eps, x) > 0


def test_riesz_domain():
    with pytest.raises(DomainError):
        riesz_like_apply(0.5, 0.5)
    with pytest.raises(DomainError):
        riesz_like_apply(0.0, 2.0)
    with pytest.raises(DomainError):
        riesz_lower_functional(0.5, 1.1, -1.0)


def test_riesz_decreasing_away_from_support():
    vals = [riesz_like_apply(0.5, -t) for t in (0.01, 0.1, 0.5, 1.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_lower_functional_below_direct_quadrature():
    from scipy.integrate import quad
    eps, p, ve = 0.5, 1.1, 0.5 * (2 * 1.1 - 1)
    est = riesz_lower_functional(eps, p, ve)
    ref = quad(lambda t: _oracle(eps, -t) ** p * t**ve, 2.0**-6, 1.0, limit=40, epsrel=1e-4)[0]
    assert est ** p >= 0.9 * ref
    assert est ** p <= ref * 2.0
