"""Scenario files: JSON descriptions of a contest and of the sweeps to run on it.

Example::

    {
      "n": 2,
      "nu_grid": {"lo": 0.5, "hi": 5.0, "step": 0.5},
      "distribution": {"kind": "uniform", "a": 1.0, "b": 2.0},
      "technology": {"kind": "power", "alpha": 0.5},
      "seed": 20150426,
      "benchmark": {"V0_lo": 0.01, "V0_hi": 5.0, "V0_step": 0.01, "m": 100}
    }

Either ``nu`` (a number) or ``nu_grid`` must be present.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .core import ContestConfig, CostDistribution, EffortTechnology, power_technology, uniform
from .errors import ValidationError
from .fixed_prize import DEFAULT_M, DEFAULT_V0_HI, DEFAULT_V0_LO, DEFAULT_V0_STEP

__all__ = ["Scenario", "load_scenario", "parse_scenario", "builtin_scenario", "BUILTIN"]

BUILTIN = ("reference", "population2", "fey")


@dataclass(frozen=True, eq=False)
class Scenario:
    n: int
    nus: tuple
    dist: CostDistribution
    tech: EffortTechnology
    seed: int = 0
    V0_lo: float = DEFAULT_V0_LO
    V0_hi: float = DEFAULT_V0_HI
    V0_step: float = DEFAULT_V0_STEP
    m: int = DEFAULT_M
    raw: dict = field(default_factory=dict, repr=False)

    def config(self, nu: float, n: int | None = None) -> ContestConfig:
        return ContestConfig(self.n if n is None else n, float(nu), self.dist, self.tech, self.seed)

    def configs(self):
        return [self.config(nu) for nu in self.nus]


def _number(obj, key, where):
    if key not in obj:
        raise ValidationError(f"scenario: missing '{key}' in {where}")
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ValidationError(f"scenario: '{key}' in {where} must be a number, got {val!r}")
    return val


def _distribution(spec) -> CostDistribution:
    if not isinstance(spec, dict):
        raise ValidationError("scenario: 'distribution' must be an object")
    kind = spec.get("kind")
    if kind == "uniform":
        return uniform(_number(spec, "a", "distribution"), _number(spec, "b", "distribution"))
    raise ValidationError(f"scenario: unsupported distribution kind {kind!r} (supported: 'uniform')")


def _technology(spec) -> EffortTechnology:
    if not isinstance(spec, dict):
        raise ValidationError("scenario: 'technology' must be an object")
    kind = spec.get("kind")
    if kind == "power":
        return power_technology(_number(spec, "alpha", "technology"))
    raise ValidationError(f"scenario: unsupported technology kind {kind!r} (supported: 'power')")


def _nu_values(data) -> tuple:
    if "nu" in data and "nu_grid" in data:
        raise ValidationError("scenario: give either 'nu' or 'nu_grid', not both")
    if "nu" in data:
        return (float(_number(data, "nu", "scenario")),)
    if "nu_grid" in data:
        g = data["nu_grid"]
        if not isinstance(g, dict):
            raise ValidationError("scenario: 'nu_grid' must be an object")
        lo, hi, step = (_number(g, k, "nu_grid") for k in ("lo", "hi", "step"))
        if not (0 < lo <= hi and step > 0):
            raise ValidationError("scenario: nu_grid needs 0 < lo <= hi and step > 0")
        count = int(np.floor((hi - lo) / step + 1e-9)) + 1
        return tuple(round(lo + k * step, 12) for k in range(count))
    raise ValidationError("scenario: one of 'nu' or 'nu_grid' is required")


def parse_scenario(data: dict) -> Scenario:
    """Validate a decoded scenario mapping and build a :class:`Scenario`."""
    if not isinstance(data, dict):
        raise ValidationError("scenario: top level must be a JSON object")
    n = _number(data, "n", "scenario")
    if int(n) != n:
        raise ValidationError(f"scenario: n must be an integer, got {n}")
    nus = _nu_values(data)
    if any(nu <= 0 for nu in nus):
        raise ValidationError("scenario: nu must be positive")
    dist = _distribution(data.get("distribution"))
    tech = _technology(data.get("technology"))
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ValidationError(f"scenario: seed must be a nonnegative integer, got {seed!r}")
    bench = data.get("benchmark", {})
    if not isinstance(bench, dict):
        raise ValidationError("scenario: 'benchmark' must be an object")
    kw = {}
    for key in ("V0_lo", "V0_hi", "V0_step"):
        if key in bench:
            kw[key] = float(_number(bench, key, "benchmark"))
    if "m" in bench:
        m = _number(bench, "m", "benchmark")
        if int(m) != m or m < 2:
            raise ValidationError("scenario: benchmark.m must be an integer >= 2")
        kw["m"] = int(m)
    scenario = Scenario(int(n), nus, dist, tech, seed, raw=data, **kw)
    scenario.configs()  # validates n and every nu
    return scenario


def load_scenario(path) -> Scenario:
    """Read a scenario from a JSON file, or a built-in one by name (``reference``, ``population2``, ``fey``)."""
    if str(path) in BUILTIN:
        return builtin_scenario(str(path))
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read scenario {p}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"scenario {p} is not valid JSON: {exc}") from exc
    return parse_scenario(data)


def builtin_scenario(name: str) -> Scenario:
    text = resources.files("tullock").joinpath("scenarios", f"{name}.json").read_text()
    return parse_scenario(json.loads(text))
