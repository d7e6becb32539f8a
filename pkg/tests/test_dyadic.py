from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dyadicbench.dyadic import (
    CellFunction, Cube, GridId, ModelConfig, cell_extent, children, cube_average, cube_integral,
    cube_mask, cubes_at_level, subcubes,
)
from dyadicbench.errors import ConfigError, DepthError, LevelRangeError


def test_level_one_standard_grid_halves():
    cfg = ModelConfig(1, 2)
    cubes = cubes_at_level(cfg, GridId((0,)), 1)
    assert [q.left_endpoints(cfg) for q in cubes] == [(Fraction(0),), (Fraction(1, 2),)]


def test_level_zero_is_root():
    cfg = ModelConfig(1, 2)
    assert cubes_at_level(cfg, GridId((0,)), 0) == [Cube(GridId((0,)), 0, (0,))]


def test_shifted_grid_level_one():
    # level-independent shift: every cube of grid s starts at 2^-k j + s/3 (mod 1)
    cfg = ModelConfig(1, 2)
    ends = sorted(q.left_endpoints(cfg)[0] for q in cubes_at_level(cfg, GridId((1,)), 1))
    assert ends == [Fraction(1, 3), Fraction(5, 6)]
    assert all(q.measure == 0.5 for q in cubes_at_level(cfg, GridId((1,)), 1))


def test_children_of_root_and_half():
    cfg = ModelConfig(1, 2)
    g = GridId((0,))
    root = Cube(g, 0, (0,))
    assert children(cfg, root) == [Cube(g, 1, (0,)), Cube(g, 1, (1,))]
    assert children(cfg, Cube(g, 1, (1,))) == [Cube(g, 2, (2,)), Cube(g, 2, (3,))]


def test_children_of_shifted_root():
    cfg = ModelConfig(1, 2)
    kids = children(cfg, Cube(GridId((1,)), 0, (0,)))
    assert [q.left_endpoints(cfg)[0] for q in kids] == [Fraction(1, 3), Fraction(5, 6)]


def test_children_at_max_depth_raise():
    cfg = ModelConfig(1, 2)
    with pytest.raises(DepthError):
        children(cfg, Cube(GridId((0,)), 2, (0,)))


def test_level_out_of_range():
    cfg = ModelConfig(1, 2)
    with pytest.raises(LevelRangeError):
        cubes_at_level(cfg, GridId((0,)), 3)


@pytest.mark.parametrize("n,L", [(0, 2), (3, 2), (1, 0), (1, 13)])
def test_model_validation(n, L):
    with pytest.raises(ConfigError):
        ModelConfig(n, L)


def test_cube_integral_examples():
    cfg = ModelConfig(1, 1)
    one = CellFunction.constant(cfg, 1.0)
    for k in range(2):
        for q in cubes_at_level(cfg, GridId((0,)), k):
            assert cube_integral(one, q) == 2.0**-k
    zero = CellFunction.constant(cfg, 0.0)
    assert cube_integral(zero, Cube(GridId((0,)), 0, (0,))) == 0.0
    f = CellFunction.from_halves(cfg, 4.0, 0.0)
    assert cube_integral(f, Cube(GridId((0,)), 0, (0,))) == 2.0


def test_mismatched_configs():
    a = CellFunction.constant(ModelConfig(1, 1), 1.0)
    b = CellFunction.constant(ModelConfig(1, 2), 1.0)
    with pytest.raises(ConfigError):
        a * b


@pytest.mark.parametrize("n,L", [(1, 3), (2, 2)])
def test_partition_every_grid_and_level(n, L):
    cfg = ModelConfig(n, L)
    for g in cfg.grids():
        for k in range(L + 1):
            cubes = cubes_at_level(cfg, g, k)
            cover = sum(cube_mask(cfg, q).astype(int) for q in cubes)
            assert np.all(cover == 1)
            assert sum(q.exact_measure for q in cubes) == 1


def _cells(cfg, q):
    return set(map(tuple, np.argwhere(cube_mask(cfg, q))))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2), st.integers(0, 3), st.integers(0, 7), st.integers(0, 3), st.integers(0, 7))
def test_nesting_trichotomy(s, k1, j1, k2, j2):
    cfg = ModelConfig(1, 3)
    g = GridId((s,))
    a = Cube(g, k1, (j1 % 2**k1,))
    b = Cube(g, k2, (j2 % 2**k2,))
    ca, cb = _cells(cfg, a), _cells(cfg, b)
    assert ca == cb or ca <= cb or cb <= ca or not (ca & cb)
    assert (ca <= cb) == b.contains(a)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 2))
def test_additivity_over_children(seed, n):
    cfg = ModelConfig(n, 3 if n == 1 else 2)
    rng = np.random.default_rng(seed)
    f = CellFunction(cfg, rng.random(cfg.shape))
    g = cfg.grids()[int(rng.integers(len(cfg.grids())))]
    for k in range(cfg.L):
        for q in cubes_at_level(cfg, g, k):
            kids = sum(cube_integral(f, c) for c in children(cfg, q))
            assert cube_integral(f, q) == pytest.approx(kids, rel=1e-14)
            # exact against an independent cell sum
            assert cube_integral(f, q) == pytest.approx(f.values[cube_mask(cfg, q)].sum() / cfg.N**n,
                                                        rel=1e-13)


def test_cell_sums_are_deterministic():
    cfg = ModelConfig(2, 3)
    vals = np.random.default_rng(1).random(cfg.shape)
    a = CellFunction(cfg, vals)
    b = CellFunction(cfg, vals.copy())
    for g in cfg.grids():
        for x, y in zip(a.sums(g), b.sums(g)):
            assert np.array_equal(x, y)


def test_subcubes_and_extent():
    cfg = ModelConfig(1, 3)
    q = Cube(GridId((2,)), 1, (1,))
    subs = subcubes(cfg, q, 3)
    assert len(subs) == 4 and all(q.contains(s) for s in subs)
    assert cube_average(CellFunction.constant(cfg, 3.0), q) == 3.0
    assert cell_extent(cfg, q) is not None
