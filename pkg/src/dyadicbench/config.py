"""Run configuration: JSON schema, defaults and validation."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from importlib import resources

from .dyadic import ModelConfig
from .errors import ConfigError
from .weights import ExponentSystem

GROUPS = (
    "carleson", "transform", "weak_maximal", "sparse", "principal", "corona", "whitney",
    "level_sets", "lemma_l1", "lemma_l2", "testing", "monotonicity",
)


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on. Unknown keys in the JSON file are rejected."""

    n: int = 1
    L: int = 8
    seed: int = 0
    seeds: int = 200
    exponent_choices: tuple = ((4.0, 4.0), (3.0, 6.0), (2.5, 5.0), (3.0, 3.0), (2.2, 2.2))
    depth: int = 4
    cz_ratio: float | None = None
    dictionary_pairs: int = 32
    sweep_L: int = 12
    sweep_exponents: tuple = (2.2, 2.2)
    eps_exponents: tuple = (3, 4, 5, 6, 7, 8, 9, 10)
    slope_tolerance: float = 0.05
    ratio_cap: float = 10.0
    suite: dict = field(default_factory=lambda: {
        "carleson": 200, "transform": 50, "weak_maximal": 200, "sparse": 200, "principal": 200,
        "corona": 100, "whitney": 100, "level_sets": 50, "lemma_l1": 100, "lemma_l2": 100,
        "testing": 50, "monotonicity": 50,
    })
    groups: tuple | None = None

    def __post_init__(self):
        ModelConfig(self.n, self.L)
        ModelConfig(1, self.sweep_L)
        if self.seeds < 1:
            raise ConfigError("seeds must be at least 1")
        for ps in self.exponent_choices:
            if len(ps) != 2:
                raise ConfigError("experiments use two exponents")
            if ExponentSystem(tuple(ps)).p <= 1:
                raise ConfigError(f"exponents {ps} give p <= 1")
        if len(self.sweep_exponents) != 2 or ExponentSystem(tuple(self.sweep_exponents)).p <= 1:
            raise ConfigError("sweep needs two exponents with p > 1")
        if len(self.eps_exponents) < 6:
            raise ConfigError("slope fits need at least 6 eps values")
        if any(not 3 <= int(k) <= 10 for k in self.eps_exponents):
            raise ConfigError("eps must lie in {2^-3, ..., 2^-10}")
        if self.cz_ratio is not None and self.cz_ratio <= 1:
            raise ConfigError("cz_ratio must exceed 1")
        if self.dictionary_pairs < 0 or self.depth < 0:
            raise ConfigError("dictionary_pairs and depth must be non-negative")
        unknown = set(self.suite) - set(GROUPS)
        if unknown:
            raise ConfigError(f"unknown suite groups {sorted(unknown)}")
        if self.groups is not None:
            bad = set(self.groups) - set(GROUPS)
            if bad:
                raise ConfigError(f"unknown check groups {sorted(bad)}")

    @property
    def model(self) -> ModelConfig:
        return ModelConfig(self.n, self.L)

    @property
    def eps_list(self) -> list:
        return [2.0 ** -int(k) for k in self.eps_exponents]

    def instances(self, group: str) -> int:
        return int(self.suite.get(group, 0))

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _freeze(key: str, value):
    if key in ("exponent_choices",):
        return tuple(tuple(float(x) for x in ps) for ps in value)
    if key in ("sweep_exponents",):
        return tuple(float(x) for x in value)
    if key in ("eps_exponents", "groups") and value is not None:
        return tuple(value)
    if key == "suite":
        return {**RunConfig().suite, **{str(k): int(v) for k, v in value.items()}}
    return value


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    names = {f.name for f in fields(RunConfig)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    try:
        return RunConfig(**{k: _freeze(k, v) for k, v in data.items()})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path: str | None) -> RunConfig:
    """Load a JSON config; ``None`` gives the bundled default."""
    try:
        if path is None:
            text = resources.files("dyadicbench").joinpath("default_config.json").read_text()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        data = json.loads(text)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON config: {exc}") from exc
    return config_from_dict(data)
