"""Weight vectors, dual weights, the product weight and power-law builders."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dyadic import CellFunction, ModelConfig, same_config
from .errors import ConfigError, IntegrabilityError, PositivityError, UnsupportedExponentError

DEFAULT_CLAMP = 1e-12


def conjugate(q: float) -> float:
    """Hölder conjugate ``q / (q - 1)``."""
    if q <= 1:
        raise UnsupportedExponentError(f"exponent must exceed 1, got {q}")
    return q / (q - 1.0)


@dataclass(frozen=True)
class ExponentSystem:
    ps: tuple

    def __post_init__(self):
        ps = tuple(float(q) for q in self.ps)
        if not ps:
            raise ConfigError("need at least one exponent")
        for q in ps:
            if not (1.0 < q < math.inf):
                raise UnsupportedExponentError(
                    f"exponents must lie in (1, inf); endpoint p_i = 1 is not supported (got {q})"
                )
        object.__setattr__(self, "ps", ps)

    @property
    def m(self) -> int:
        return len(self.ps)

    @property
    def p(self) -> float:
        return 1.0 / math.fsum(1.0 / q for q in self.ps)

    @property
    def p_prime(self) -> float:
        return conjugate(self.p)

    def conj(self, i: int) -> float:
        return conjugate(self.ps[i])

    def with_slot(self, i: int, q: float) -> "ExponentSystem":
        ps = list(self.ps)
        ps[i] = q
        return ExponentSystem(tuple(ps))


def dual_weight(w: CellFunction, p_i: float) -> CellFunction:
    """``w ** (1 - p_i')`` cellwise."""
    if p_i <= 1:
        raise UnsupportedExponentError(f"dual weight needs p_i > 1, got {p_i}")
    if np.any(w.values <= 0):
        raise PositivityError("dual weight of a weight with a zero cell")
    return CellFunction(w.cfg, w.values ** (1.0 - conjugate(p_i)))


def clamp_weight(w: CellFunction, floor: float = DEFAULT_CLAMP) -> CellFunction:
    return CellFunction(w.cfg, np.maximum(w.values, floor))


class WeightVector:
    """A vector of weights with its dual weights and product weight.

    By default ``sigmas`` and ``v`` are derived cellwise from ``ws``. They may
    be supplied explicitly when each is known as an exact cell average of a
    continuous weight (see :meth:`power_law`); the cellwise identities then
    hold for the underlying functions but not for the cell values.
    """

    def __init__(self, ws: Sequence[CellFunction], exps: ExponentSystem,
                 sigmas: Sequence[CellFunction] | None = None,
                 v: CellFunction | None = None, clamp: float | None = DEFAULT_CLAMP):
        ws = tuple(ws)
        if len(ws) != exps.m:
            raise ConfigError(f"{len(ws)} weights for {exps.m} exponents")
        cfg = same_config(*ws)
        if clamp is not None:
            ws = tuple(clamp_weight(w, clamp) for w in ws)
        for w in ws:
            if np.any(w.values <= 0):
                raise PositivityError("weights must be strictly positive")
        self.cfg = cfg
        self.ws = ws
        self.exps = exps
        self.derived = sigmas is None and v is None
        if sigmas is None:
            sigmas = tuple(dual_weight(w, q) for w, q in zip(ws, exps.ps))
        if v is None:
            v = combined_weight_from(ws, exps)
        self.sigmas = tuple(sigmas)
        self.v = v
        same_config(*ws, *self.sigmas, self.v)

    @property
    def m(self) -> int:
        return self.exps.m

    def __repr__(self):
        return f"WeightVector(m={self.m}, ps={self.exps.ps}, cfg={self.cfg})"

    @classmethod
    def power_law(cls, cfg: ModelConfig, exps: ExponentSystem, eps: float) -> "WeightVector":
        """The weights ``w_i = x**((1-eps)(p_i-1))`` on the segment [0, 1).

        Every cell value of ``w_i``, ``sigma_i = x**(eps-1)`` and
        ``v = x**((1-eps)(mp-1))`` is an exact cell average, so dyadic cube
        integrals of all three are exact.
        """
        ws = [power_weight_cells(cfg, (1 - eps) * (q - 1)) for q in exps.ps]
        sigmas = [power_weight_cells(cfg, eps - 1) for _ in exps.ps]
        v = power_weight_cells(cfg, (1 - eps) * (exps.m * exps.p - 1))
        return cls(ws, exps, sigmas=sigmas, v=v, clamp=None)


def combined_weight_from(ws: Sequence[CellFunction], exps: ExponentSystem) -> CellFunction:
    p = exps.p
    vals = np.ones(ws[0].cfg.shape)
    for w, q in zip(ws, exps.ps):
        vals = vals * w.values ** (p / q)
    return CellFunction(ws[0].cfg, vals)


def combined_weight(wv: WeightVector) -> CellFunction:
    """The product weight ``prod_i w_i ** (p / p_i)``."""
    return wv.v


def power_weight_cells(cfg: ModelConfig, a: float, center: float = 0.0) -> CellFunction:
    """Exact cell averages of ``x**a`` on the segment [0, 1) (no wraparound).

    Uses the antiderivative ``(v**(a+1) - u**(a+1)) / (a+1)`` written through
    ``expm1`` so that exponents with ``a + 1`` close to zero keep full accuracy.
    """
    if cfg.n != 1:
        raise ConfigError("power weights are built on the 1D segment model")
    if center != 0.0:
        raise ConfigError("only center 0 is supported")
    if a <= -1:
        raise IntegrabilityError(f"x**{a} is not integrable at 0")
    N = cfg.N
    s = a + 1.0
    u = np.arange(N, dtype=np.float64) / N
    v = np.arange(1, N + 1, dtype=np.float64) / N
    vals = np.empty(N)
    # first cell: v**s / s
    vals[0] = v[0] ** s / s
    lu, lv = np.log(u[1:]), np.log(v[1:])
    vals[1:] = np.exp(s * lu) * np.expm1(s * (lv - lu)) / s
    return CellFunction(cfg, vals * N)
