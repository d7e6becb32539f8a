import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dyadicbench.analysis import (
    assemble_rhs, fit_slope, lemma_suite, ordered_map, power_norm, report_instance,
    sharpness_slopes, strong_report, sweep_row, testing_equiv_report, testing_from_pairs,
    thread_count, weak_report,
)
from dyadicbench.config import GROUPS, RunConfig, config_from_dict, load_config
from dyadicbench.dyadic import CellFunction, Cube, GridId, ModelConfig
from dyadicbench.errors import ConfigError, LevelRangeError, UnsupportedExponentError
from dyadicbench.sparse import SparseFamily, random_sparse
from dyadicbench.weights import ExponentSystem, WeightVector

G0 = GridId((0,))


def _ones(L=3, ps=(4.0, 4.0)):
    cfg = ModelConfig(1, L)
    one = CellFunction.constant(cfg, 1.0)
    return cfg, one, WeightVector([one, one], ExponentSystem(ps))


def test_all_ones_reports():
    cfg, one, wv = _ones()
    fam = SparseFamily.single(Cube(G0, 0, (0,)), cfg)
    s = strong_report(wv, [one, one], fam)
    w = weak_report(wv, [one, one], fam)
    assert s.lhs == pytest.approx(1.0) and s.rhs == pytest.approx(3.0) and s.ratio == pytest.approx(1 / 3)
    assert w.lhs == pytest.approx(1.0) and w.rhs == pytest.approx(2.0)


def test_zero_functions():
    cfg, one, wv = _ones()
    zero = CellFunction.constant(cfg, 0.0)
    fam = random_sparse(cfg, G0, 3, 3)
    assert strong_report(wv, [zero, one], fam).ratio == 0.0
    assert weak_report(wv, [zero, one], fam).lhs == 0.0


def test_p_at_most_one_rejected():
    cfg = ModelConfig(1, 2)
    one = CellFunction.constant(cfg, 1.0)
    wv = WeightVector([one, one], ExponentSystem((1.5, 1.5)))
    with pytest.raises(UnsupportedExponentError):
        strong_report(wv, [one, one], SparseFamily.single(Cube(G0, 0, (0,)), cfg))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_reports_reassemble_and_order(seed):
    rc = RunConfig(L=5, depth=3, dictionary_pairs=4)
    strong, weak, testing = report_instance(seed, rc)
    exps = ExponentSystem((strong.metadata["p1"], strong.metadata["p2"]))
    for rep in (strong, weak):
        assert assemble_rhs(rep.kind, rep.rhs_factors, exps) == pytest.approx(rep.rhs, rel=1e-12)
    assert weak.lhs <= strong.lhs * (1 + 1e-12)
    assert testing.easy_ratio <= 1 + 1e-9


def test_testing_all_ones():
    cfg, one, wv = _ones()
    fam = SparseFamily.single(Cube(G0, 0, (0,)), cfg)
    rep = testing_equiv_report(wv, fam, np.random.default_rng(0), pairs=1)
    assert rep.t_star == pytest.approx(1.0) and rep.W == pytest.approx(1.0)
    assert rep.C <= 1.0 and rep.easy_ratio <= 1.0


def test_testing_empty_dictionary():
    cfg, one, wv = _ones()
    fam = SparseFamily.single(Cube(G0, 0, (0,)), cfg)
    rep = testing_from_pairs(wv, fam, {})
    assert rep.t_star == 0.0 and rep.pairs == 0


def test_testing_scaling_invariance():
    cfg = ModelConfig(1, 4)
    rng = np.random.default_rng(5)
    ws = [CellFunction(cfg, np.exp(rng.normal(size=cfg.shape))) for _ in range(2)]
    wv = WeightVector(ws, ExponentSystem((3.0, 6.0)))
    fam = random_sparse(cfg, G0, 11, 3)
    base = {q: [(rng.random(cfg.shape), rng.random(cfg.shape))] for q in fam.cubes}
    scaled = {q: [(10.0 * a, b) for a, b in v] for q, v in base.items()}
    a = testing_from_pairs(wv, fam, base)
    b = testing_from_pairs(wv, fam, scaled)
    assert b.t_star == pytest.approx(a.t_star, rel=1e-12)
    assert b.W == pytest.approx(a.W, rel=1e-12)


def test_power_norm_against_quadrature():
    from scipy.integrate import quad
    for eps in (2.0**-3, 2.0**-6):
        for q in (2.2, 3.0):
            a = (1 - eps) * (q - 1)
            # x = exp(-t): |f|^q w dx becomes a decaying exponential in t
            integrand = lambda t: math.exp(-t * ((eps - 1) * q + a + 1))
            ref = quad(integrand, 0, math.inf, epsrel=1e-12)[0] ** (1 / q)
            assert power_norm(eps, q) == pytest.approx(ref, rel=1e-6)


def test_fit_slope_exact_power():
    eps = [2.0**-k for k in range(3, 11)]
    slope, res = fit_slope(eps, [7.0 * e**-1.2 for e in eps])
    assert slope == pytest.approx(1.2, rel=1e-12) and res < 1e-12


def test_sweep_row_range_and_power_law_checks():
    exps = ExponentSystem((2.2, 2.2))
    with pytest.raises(LevelRangeError):
        sweep_row(0.5, exps, 6)
    row = sweep_row(2.0**-3, exps, 8)
    assert row.apbar >= 1.0 and row.ainf_sigma1 >= 1.0 and row.r1_lower > 0
    assert row.norm_f1 == row.norm_f2 == pytest.approx(8 ** (1 / 2.2))


def test_slope_relations():
    from dyadicbench.analysis import SweepRow
    exps = ExponentSystem((2.2, 2.2))
    eps = [2.0**-k for k in range(3, 11)]
    rows = [SweepRow(e, e**-1.2, e**-0.5, e**-0.5, 1.0, e**-0.5, e**-0.5, e**-3.0) for e in eps]
    fits = {f.quantity: f for f in sharpness_slopes(rows, exps)}
    assert all(f.passed for f in fits.values()) is False   # norm product slope 1.0 != 1/p
    assert fits["apbar"].passed and fits["r1_lower"].passed and fits["ainf_sigma1"].passed
    assert not fits["norm_product"].passed


def test_ordered_map_preserves_order(monkeypatch):
    assert ordered_map(lambda x: x * x, list(range(50)), threads=8) == [x * x for x in range(50)]
    monkeypatch.setenv("WORKBENCH_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("WORKBENCH_THREADS", "0")
    assert thread_count() >= 1


def test_lemma_suite_small_run_passes():
    rc = RunConfig(suite={g: 3 for g in GROUPS})
    res = lemma_suite(rc)
    assert [r.check_name for r in res][0] == "carleson_sparse_sum"
    assert all(r.status == "pass" for r in res), [r for r in res if r.status != "pass"]


def test_lemma_suite_thread_independent():
    rc = RunConfig(suite={g: 4 for g in GROUPS})
    a = [r.to_dict() for r in lemma_suite(rc, threads=1)]
    b = [r.to_dict() for r in lemma_suite(rc, threads=8)]
    assert json.dumps(a) == json.dumps(b)


# --- config -------------------------------------------------------------------------

def test_default_config_matches_dataclass():
    assert load_config(None) == RunConfig()


@pytest.mark.parametrize("data", [
    {"L": 0}, {"n": 3}, {"seeds": 0}, {"eps_exponents": [3, 4, 5]}, {"eps_exponents": [1, 2, 3, 4, 5, 6]},
    {"exponent_choices": [[1.0, 2.0]]}, {"cz_ratio": 1.0}, {"bogus": 1}, {"suite": {"nope": 1}},
    {"groups": ["nope"]}, [],
])
def test_config_validation(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    ok = tmp_path / "ok.json"
    ok.write_text(json.dumps({"L": 5, "suite": {"carleson": 7}}))
    rc = load_config(str(ok))
    assert rc.L == 5 and rc.instances("carleson") == 7 and rc.instances("whitney") == 100
