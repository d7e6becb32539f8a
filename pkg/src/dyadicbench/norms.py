"""Weighted strong and weak Lebesgue functionals of cell functions."""
from __future__ import annotations

import math

import numpy as np

from .dyadic import CellFunction, same_config
from .errors import UnsupportedExponentError


def _check_p(p: float) -> None:
    if p < 1:
        raise UnsupportedExponentError(f"norm exponent must be at least 1, got {p}")


def lp_norm(g: CellFunction, w: CellFunction, p: float) -> float:
    """``(sum_cells |g|**p w * cell_volume) ** (1/p)`` with an exactly rounded sum."""
    _check_p(p)
    cfg = same_config(g, w)
    terms = np.abs(g.values) ** p * w.values
    return (math.fsum(terms.ravel().tolist()) * cfg.cell_volume) ** (1.0 / p)


def weak_lp_values(g: np.ndarray, w: np.ndarray, p: float, cell_volume: float) -> np.ndarray:
    """Weak quasi-norm over the last axis (flattened cells); other axes are batch axes.

    For a step function the supremum over alpha of ``alpha * w({|g| > alpha})**(1/p)``
    is approached as alpha rises to an attained value t, giving
    ``max_t t * w({|g| >= t})**(1/p)``. Cells are sorted by decreasing |g|
    (stable), so the prefix masses are the tail masses; ties take the mass of
    the last tied cell.
    """
    _check_p(p)
    g = np.abs(np.asarray(g, dtype=float))
    w = np.broadcast_to(np.asarray(w, dtype=float), g.shape)
    order = np.argsort(-g, axis=-1, kind="stable")
    gs = np.take_along_axis(g, order, axis=-1)
    ws = np.take_along_axis(w, order, axis=-1)
    mass = np.cumsum(ws, axis=-1) * cell_volume
    # last index of each run of equal values
    last = np.ones(gs.shape, dtype=bool)
    last[..., :-1] = gs[..., 1:] != gs[..., :-1]
    cand = np.where(last & (gs > 0), gs * mass ** (1.0 / p), 0.0)
    return cand.max(axis=-1)


def _exact_prefix_sums(x: np.ndarray) -> np.ndarray:
    """Prefix sums of non-negative floats, each correctly rounded from the exact sum."""
    mant, expo = np.frexp(x)
    ints = (mant * 2.0**53).astype(np.int64)
    expo = expo.astype(np.int64) - 53
    nz = ints != 0
    if not nz.any():
        return np.zeros_like(x)
    emin = int(expo[nz].min())
    acc = 0
    out = np.empty(len(x))
    for k, (a, b) in enumerate(zip(ints.tolist(), expo.tolist())):
        if a:
            acc += a << (b - emin)
        out[k] = math.ldexp(float(acc), emin)
    return out


def weak_lp_norm(g: CellFunction, w: CellFunction, p: float) -> float:
    """``sup_alpha alpha * w({|g| > alpha}) ** (1/p)``, exact for step functions.

    Tail masses are exact sums rounded once, so the result is monotone in
    ``|g|`` bit for bit.
    """
    _check_p(p)
    cfg = same_config(g, w)
    gv = np.abs(g.values.ravel())
    order = np.argsort(-gv, kind="stable")
    gs = gv[order]
    mass = _exact_prefix_sums(w.values.ravel()[order]) * cfg.cell_volume
    last = np.ones(gs.shape, dtype=bool)
    last[:-1] = gs[1:] != gs[:-1]
    cand = np.where(last & (gs > 0), gs * mass ** (1.0 / p), 0.0)
    return float(cand.max())
