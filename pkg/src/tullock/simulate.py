"""Seeded Monte-Carlo contest simulator and best-response oracle.

Types are drawn by inverse-cdf sampling from counter-based streams keyed by
``(seed, stream, trial, player)``, so results are reproducible and do not
depend on chunking.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import kernels, rng
from .core import ContestConfig, PrizeSchedule
from .errors import DomainError, ValidationError

__all__ = [
    "SimulationReport",
    "run",
    "validate_strategy",
    "deviation_utilities",
    "best_response_gap",
    "best_response_gaps",
    "empirical_utility_curve",
]

UTILITY_SAMPLES = 1000


@dataclass
class SimulationReport:
    """Empirical means (and standard errors) of one simulated contest."""

    trials: int
    nu: float
    mean_total_contribution: float
    mean_revenue: float
    mean_prize_paid: float
    mean_profit: float
    mean_welfare: float
    std_err: dict
    per_type_utility: list = field(repr=False)

    def accounting_gap(self) -> float:
        """``|mean_profit - (nu * mean_total_contribution - mean_prize_paid)|``."""
        return abs(self.mean_profit - (self.nu * self.mean_total_contribution - self.mean_prize_paid))

    def to_dict(self) -> dict:
        return asdict(self)


def _sampler(config: ContestConfig):
    if config.dist.ppf is None:
        raise ValidationError("cost distribution needs an inverse cdf for simulation")
    return config.dist.ppf


def validate_strategy(config: ContestConfig, strategy: Callable, points: int = 64):
    """Reject strategies that are negative, non-finite or identically zero on the support."""
    d = config.dist
    probe = np.asarray(strategy(np.linspace(d.c_lo, d.c_hi, points)), dtype=float)
    if not np.all(np.isfinite(probe)) or np.any(probe < 0):
        raise ValidationError("strategy must map the support to finite nonnegative contributions")
    if not np.any(probe > 0):
        raise ValidationError(
            "all-zero strategy is not an equilibrium: any player gains by a tiny positive bid")


def run(config: ContestConfig, strategy: Callable, prize: PrizeSchedule, trials: int,
        seed: int | None = None) -> SimulationReport:
    """Play ``trials`` independent contests and aggregate the crowdsourcer's and players' outcomes.

    Each trial draws ``n`` types, maps them through ``strategy`` (vectorized),
    picks a winner with probability proportional to contribution (nobody wins
    if all contributions are zero) and pays ``prize`` at the winner's
    contribution.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    validate_strategy(config, strategy)
    seed = config.seed if seed is None else seed
    n, nu = config.n, config.nu
    ppf = _sampler(config)
    h = config.tech.h
    totals, paid, welfare = [], [], []
    samples = []
    for start, count in rng.chunks(trials):
        types = ppf(rng.uniforms(seed, rng.TYPES, start, count, n))
        contrib = np.ascontiguousarray(strategy(types), dtype=float)
        if not np.all(prize.contains(contrib)):
            raise DomainError("strategy output falls outside the prize domain")
        u = np.ascontiguousarray(rng.uniforms(seed, rng.LOTTERY, start, count, 1)[:, 0])
        winners = kernels.lottery_winners(contrib, u)
        has_winner = winners >= 0
        rows = np.nonzero(has_winner)[0]
        pay = np.zeros(count)
        if rows.size:
            pay[rows] = prize.value(contrib[rows, winners[rows]])
        effort_cost = np.asarray(h(contrib), dtype=float) * types
        totals.append(contrib.sum(axis=1))
        paid.append(pay)
        welfare.append(pay - effort_cost.sum(axis=1))
        if len(samples) < UTILITY_SAMPLES:
            won = (winners == 0)
            player0 = np.where(won, pay, 0.0) - effort_cost[:, 0]
            take = UTILITY_SAMPLES - len(samples)
            samples.extend(zip(types[:take, 0].tolist(), player0[:take].tolist()))
    total = np.concatenate(totals)
    pay = np.concatenate(paid)
    wel = np.concatenate(welfare)
    revenue = nu * total
    profit = revenue - pay

    def mean(x):
        # exactly rounded sum, so the result does not depend on summation order
        return math.fsum(x) / x.size

    def se(x):
        return float(np.std(x, ddof=1) / np.sqrt(x.size)) if x.size > 1 else float("nan")

    return SimulationReport(
        trials=trials,
        nu=nu,
        mean_total_contribution=mean(total),
        mean_revenue=mean(revenue),
        mean_prize_paid=mean(pay),
        mean_profit=mean(profit),
        mean_welfare=mean(wel),
        std_err={"revenue": se(revenue), "prize_paid": se(pay), "profit": se(profit),
                 "welfare": se(wel)},
        per_type_utility=samples,
    )


def _opponent_sums(config: ContestConfig, strategy: Callable, trials: int, seed: int) -> np.ndarray:
    ppf = _sampler(config)
    parts = []
    for start, count in rng.chunks(trials):
        types = ppf(rng.uniforms(seed, rng.OPPONENTS, start, count, config.n - 1))
        parts.append(np.asarray(strategy(types), dtype=float).sum(axis=1))
    return np.ascontiguousarray(np.concatenate(parts))


def deviation_utilities(config: ContestConfig, prize: PrizeSchedule, c: float, xi, S: np.ndarray):
    """Estimated interim utility of type ``c`` playing each ``xi`` against opponent totals ``S``.

    Returns ``(utility, std_err)`` arrays. The lottery is integrated out
    exactly given the opponents' contributions.
    """
    xi = np.ascontiguousarray(np.atleast_1d(np.asarray(xi, dtype=float)))
    if not np.all(prize.contains(xi)):
        raise DomainError("deviation outside the prize domain; the prize is undefined there")
    mean, mean_sq = kernels.mean_win_prob(xi, S)
    V = np.asarray(prize.value(xi), dtype=float)
    util = mean * V - np.asarray(config.tech.h(xi), dtype=float) * c
    se = np.sqrt(np.maximum(mean_sq - mean * mean, 0.0) / S.size) * V
    return util, se


def best_response_gaps(config: ContestConfig, strategy: Callable, prize: PrizeSchedule, cs,
                       deviation_grid, trials: int, seed: int | None = None) -> np.ndarray:
    """:func:`best_response_gap` for several types, sharing one opponent sample."""
    validate_strategy(config, strategy)
    seed = config.seed if seed is None else seed
    S = _opponent_sums(config, strategy, trials, seed)
    grid = np.asarray(deviation_grid, dtype=float)
    cs = np.atleast_1d(np.asarray(cs, dtype=float))
    own = np.asarray(strategy(cs), dtype=float)
    xi = np.concatenate([own, grid])
    if not np.all(prize.contains(xi)):
        raise DomainError("deviation outside the prize domain; the prize is undefined there")
    p, _ = kernels.mean_win_prob(np.ascontiguousarray(xi), S)
    V = np.asarray(prize.value(xi), dtype=float)
    h = np.asarray(config.tech.h(xi), dtype=float)
    k = cs.size
    gaps = np.empty(k)
    for i, c in enumerate(cs):
        u_eq = p[i] * V[i] - h[i] * c
        u_dev = p[k:] * V[k:] - h[k:] * c
        gaps[i] = float(np.max(u_dev)) - u_eq
    return gaps


def best_response_gap(config: ContestConfig, strategy: Callable, prize: PrizeSchedule, c: float,
                      deviation_grid, trials: int, seed: int | None = None) -> float:
    """Largest Monte-Carlo utility gain of type ``c`` from deviating to a point of ``deviation_grid``.

    All deviations are scored against the same opponent draws, so the gap
    is a difference of positively correlated estimates.
    """
    return float(best_response_gaps(config, strategy, prize, [c], deviation_grid, trials, seed)[0])


def empirical_utility_curve(config: ContestConfig, strategy: Callable, prize: PrizeSchedule,
                            c_grid, trials: int, seed: int | None = None):
    """Monte-Carlo interim utility at each type in ``c_grid``.

    Returns a list of ``(c, utility, std_err)`` tuples.
    """
    validate_strategy(config, strategy)
    seed = config.seed if seed is None else seed
    S = _opponent_sums(config, strategy, trials, seed)
    c_grid = np.atleast_1d(np.asarray(c_grid, dtype=float))
    xi = np.asarray(strategy(c_grid), dtype=float)
    out = []
    for c, x in zip(c_grid, xi):
        u, se = deviation_utilities(config, prize, c, [x], S)
        out.append((float(c), float(u[0]), float(se[0])))
    return out
