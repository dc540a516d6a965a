"""Problem-instance model for symmetric Tullock contests.

A contest is described by a :class:`ContestConfig`: the number of players,
the crowdsourcer's value per unit of contribution, the common cost prior
(:class:`CostDistribution`) and the effort technology
(:class:`EffortTechnology`). Prizes, fixed or contribution dependent, are
:class:`PrizeSchedule` objects.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, ValidationError

__all__ = [
    "PROBE_POINTS",
    "CostDistribution",
    "EffortTechnology",
    "ContestConfig",
    "PrizeSchedule",
    "uniform",
    "power_technology",
    "virtual_cost",
    "csf_win_prob",
    "ex_post_payoff",
]

PROBE_POINTS = 512


@dataclass(frozen=True, eq=False)
class CostDistribution:
    """Common prior over marginal effort costs on ``[c_lo, c_hi]``.

    ``cdf``, ``pdf`` and ``ppf`` (inverse cdf, needed only for simulation)
    must accept numpy arrays. The instance is validated on construction.
    """

    c_lo: float
    c_hi: float
    cdf: Callable
    pdf: Callable
    name: str = "custom"
    ppf: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = float(self.c_lo), float(self.c_hi)
        if not (0 < lo < hi and np.isfinite(hi)):
            raise ValidationError(f"{self.name}: need 0 < c_lo < c_hi < inf, got [{lo}, {hi}]")
        probe = np.linspace(lo, hi, PROBE_POINTS)
        F = np.asarray(self.cdf(probe), dtype=float)
        dens = np.asarray(self.pdf(probe), dtype=float)
        if abs(F[0]) > 1e-12 or abs(F[-1] - 1.0) > 1e-12:
            raise ValidationError(f"{self.name}: cdf must be 0 at c_lo and 1 at c_hi")
        if np.any(np.diff(F) < -1e-15):
            raise ValidationError(f"{self.name}: cdf is not nondecreasing")
        if not np.all(dens > 0):
            raise ValidationError(f"{self.name}: pdf must be strictly positive on the support")
        h = 1e-5 * (hi - lo)
        inner = probe[1:-1]
        fd = (np.asarray(self.cdf(inner + h)) - np.asarray(self.cdf(inner - h))) / (2 * h)
        if np.max(np.abs(fd - dens[1:-1])) > 1e-6 * max(1.0, float(np.max(dens))):
            raise ValidationError(f"{self.name}: pdf inconsistent with finite differences of cdf")

    def virtual_cost(self, c):
        """``c + F(c)/f(c)``, vectorized, without a support check."""
        c = np.asarray(c, dtype=float)
        return c + self.cdf(c) / self.pdf(c)

    def hazard_ratio(self, c):
        """``F(c)/f(c)``."""
        c = np.asarray(c, dtype=float)
        return self.cdf(c) / self.pdf(c)

    def check_support(self, c):
        c_arr = np.asarray(c, dtype=float)
        slack = 1e-12 * (self.c_hi - self.c_lo)
        if np.any(c_arr < self.c_lo - slack) or np.any(c_arr > self.c_hi + slack):
            raise DomainError(f"cost {c} outside support [{self.c_lo}, {self.c_hi}]")

    def is_regular(self, points: int = PROBE_POINTS) -> bool:
        """True when the virtual cost is strictly increasing on a probe grid."""
        probe = np.linspace(self.c_lo, self.c_hi, points)
        return bool(np.all(np.diff(self.virtual_cost(probe)) > 0))

    def to_dict(self) -> dict:
        return {"kind": self.name, **self.params}


def uniform(a: float, b: float) -> CostDistribution:
    """Uniform cost prior on ``[a, b]``."""
    a, b = float(a), float(b)
    width = b - a

    def cdf(c):
        return np.clip((np.asarray(c, dtype=float) - a) / width, 0.0, 1.0)

    def pdf(c):
        return np.full(np.shape(c), 1.0 / width) if np.ndim(c) else 1.0 / width

    def ppf(u):
        return a + width * np.asarray(u, dtype=float)

    return CostDistribution(a, b, cdf, pdf, name="uniform", ppf=ppf, params={"a": a, "b": b})


@dataclass(frozen=True, eq=False)
class EffortTechnology:
    """Effort-to-contribution map ``g`` with inverse ``h`` and derivative ``h'``.

    ``h_prime_inv`` is an optional closed-form inverse of ``h'``; strategies
    fall back to root finding without it.
    """

    g: Callable
    h: Callable
    h_prime: Callable
    name: str = "custom"
    h_prime_inv: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if abs(float(self.g(0.0))) > 1e-15:
            raise ValidationError(f"{self.name}: g(0) must be 0")
        b = np.linspace(0.0, 10.0, PROBE_POINTS)
        gb = np.asarray(self.g(b), dtype=float)
        if not np.all(np.diff(gb) > 0):
            raise ValidationError(f"{self.name}: g must be strictly increasing")
        if np.any(np.diff(gb, 2) > 1e-12 * np.max(np.abs(gb))):
            raise ValidationError(f"{self.name}: g must be concave")
        back = np.asarray(self.h(gb), dtype=float)
        if np.max(np.abs(back - b) / np.maximum(1.0, b)) > 1e-9:
            raise ValidationError(f"{self.name}: h is not the inverse of g")
        xi = np.linspace(0.05, 5.0, PROBE_POINTS)
        step = 1e-6 * xi
        fd = (np.asarray(self.h(xi + step)) - np.asarray(self.h(xi - step))) / (2 * step)
        hp = np.asarray(self.h_prime(xi), dtype=float)
        if np.max(np.abs(fd - hp) / np.maximum(1.0, np.abs(hp))) > 1e-6:
            raise ValidationError(f"{self.name}: h_prime inconsistent with finite differences of h")

    def to_dict(self) -> dict:
        return {"kind": self.name, **self.params}


def power_technology(alpha: float) -> EffortTechnology:
    """``g(b) = b**alpha`` for ``alpha`` in (0, 1]; ``alpha = 1/2`` gives ``h(xi) = xi**2``."""
    alpha = float(alpha)
    if not 0 < alpha <= 1:
        raise ValidationError(f"power technology needs alpha in (0, 1], got {alpha}")
    k = 1.0 / alpha

    if alpha == 0.5:
        def h(xi):
            xi = np.asarray(xi, dtype=float)
            return xi * xi

        def h_prime(xi):
            return 2.0 * np.asarray(xi, dtype=float)
    else:
        def h(xi):
            return np.asarray(xi, dtype=float) ** k

        def h_prime(xi):
            return k * np.asarray(xi, dtype=float) ** (k - 1.0)

    h_prime_inv = None
    if alpha < 1:
        def h_prime_inv(y):
            return (alpha * np.asarray(y, dtype=float)) ** (1.0 / (k - 1.0))

    def g(b):
        return np.asarray(b, dtype=float) ** alpha

    return EffortTechnology(g, h, h_prime, name="power", h_prime_inv=h_prime_inv,
                            params={"alpha": alpha})


@dataclass(frozen=True, eq=False)
class ContestConfig:
    """A full problem instance: ``n`` players, value ``nu`` per unit contribution."""

    n: int
    nu: float
    dist: CostDistribution
    tech: EffortTechnology
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValidationError(f"need an integer n >= 2, got {self.n}")
        if not (self.nu > 0 and np.isfinite(self.nu)):
            raise ValidationError(f"need nu > 0, got {self.nu}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValidationError(f"seed must be a nonnegative integer, got {self.seed}")

    def replace(self, **changes) -> "ContestConfig":
        kw = dict(n=self.n, nu=self.nu, dist=self.dist, tech=self.tech, seed=self.seed)
        kw.update(changes)
        return ContestConfig(**kw)


@dataclass(frozen=True, eq=False)
class PrizeSchedule:
    """Winner's prize as a function of the winner's contribution.

    Evaluation outside ``[lo, hi]`` raises :class:`DomainError`; no
    extrapolation is attempted.
    """

    lo: float
    hi: float
    value: Callable
    kind: str = "function"

    @classmethod
    def constant(cls, V0: float) -> "PrizeSchedule":
        V0 = float(V0)
        if not V0 > 0:
            raise ValidationError(f"fixed prize must be positive, got {V0}")
        return cls(0.0, np.inf, lambda xi: np.full(np.shape(xi), V0) if np.ndim(xi) else V0,
                   kind="constant")

    @property
    def domain(self) -> tuple:
        return (self.lo, self.hi)

    def contains(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        slack = 1e-12 * max(1.0, abs(self.hi) if np.isfinite(self.hi) else 1.0)
        return (xi >= self.lo - slack) & (xi <= self.hi + slack)

    def __call__(self, xi):
        if not np.all(self.contains(xi)):
            raise DomainError(
                f"contribution {xi} outside prize domain [{self.lo}, {self.hi}]")
        return self.value(xi)


def virtual_cost(dist: CostDistribution, c: float) -> float:
    """``c + F(c)/f(c)`` for ``c`` in the support."""
    dist.check_support(c)
    return float(dist.virtual_cost(c))


def csf_win_prob(contributions, i: int) -> float:
    """Lottery winning probability ``xi_i / sum(xi)``; zero for everyone if all bids are zero."""
    xi = np.asarray(contributions, dtype=float)
    if np.any(xi < 0):
        raise ValidationError("contributions must be nonnegative")
    total = float(np.sum(xi))
    if total == 0.0:
        return 0.0
    return float(xi[i] / total)


def ex_post_payoff(config: ContestConfig, c_i: float, contributions, i: int,
                   prize: PrizeSchedule) -> float:
    """Lottery-averaged ex-post payoff ``Pr_i * V(xi_i) - h(xi_i) * c_i``."""
    xi = np.asarray(contributions, dtype=float)
    p = csf_win_prob(xi, i)
    effort_cost = float(config.tech.h(xi[i])) * c_i
    if xi[i] == 0.0:
        return -effort_cost
    return p * float(prize(xi[i])) - effort_cost
