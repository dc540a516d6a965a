"""Optimal prize-function (OPF) mechanism.

With a contribution-dependent prize chosen optimally, the symmetric
equilibrium contribution solves ``h'(xi) = nu / phi(c)`` pointwise, where
``phi(c) = c + F(c)/f(c)`` is the virtual cost. Everything else (winning
probability, prize schedule, profit, welfare) follows from that strategy
by one-dimensional quadrature, except the winning probability for more than
two players, which is estimated by quasi-Monte Carlo.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.stats import qmc

from . import kernels
from .core import ContestConfig, PrizeSchedule
from .errors import DomainError, NumericalError, RootBracketError, ValidationError
from .numerics import find_root, integrate_1d

__all__ = [
    "ConsistencyError",
    "OpfStrategy",
    "OpfSolution",
    "opf_strategy",
    "win_prob",
    "opf_prize",
    "prize_schedule",
    "opf_profit",
    "opf_welfare",
    "realized_profit",
    "expected_prize_paid",
    "expected_utility",
    "envelope_utility",
    "solve_opf",
    "prize_linearity",
]

ROOT_TOL = 1e-15
QUAD_TOL = 1e-12
QUAD_RTOL = 1e-12
# the finite-difference derivative carries ~1e-9 relative noise
STIELTJES_TOL = 1e-10
STIELTJES_RTOL = 1e-8
QMC_LOG2_SAMPLES = 20  # 1_048_576 opponent profiles


class ConsistencyError(NumericalError):
    """The two sides of the envelope identity disagree."""


def _invert_h_prime(h_prime: Callable, y: float) -> float:
    """Solve ``h'(xi) = y`` for ``xi >= 0`` by bracket expansion and Brent."""
    def fn(xi):
        return float(h_prime(xi)) - y

    lo, hi = 0.0, 1.0
    for _ in range(200):
        if fn(hi) >= 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise RootBracketError(f"h' never reaches {y:.6g}; h' is not invertible there")
    if fn(lo) > 0:
        raise RootBracketError(f"h'(0) already exceeds {y:.6g}")
    return find_root(fn, lo, hi, tol=ROOT_TOL)


@dataclass(eq=False)
class OpfStrategy:
    """Equilibrium contribution ``beta(c)`` under the optimal prize function.

    ``beta`` is strictly decreasing for a regular prior; its range is
    ``[xi_lo, xi_hi] = [beta(c_hi), beta(c_lo)]``. Treat instances as
    immutable; the private cache only memoizes derived samples.
    """

    config: ContestConfig
    method: str = "rootfind"
    dbeta_inv_override: Optional[Callable] = None
    xi_lo: float = field(init=False)
    xi_hi: float = field(init=False)
    _cache: dict = field(init=False, default_factory=dict, repr=False)

    def __post_init__(self):
        if self.method not in ("rootfind", "closed"):
            raise ValidationError(f"unknown strategy method {self.method!r}")
        if self.method == "closed" and self.config.tech.h_prime_inv is None:
            raise ValidationError("technology has no closed-form inverse of h'")
        d = self.config.dist
        self.xi_lo = float(self.beta(d.c_hi))
        self.xi_hi = float(self.beta(d.c_lo))

    @property
    def nu(self) -> float:
        return self.config.nu

    def _beta_scalar(self, c: float) -> float:
        y = self.nu / float(self.config.dist.virtual_cost(c))
        if self.method == "closed":
            return float(self.config.tech.h_prime_inv(y))
        return _invert_h_prime(self.config.tech.h_prime, y)

    def beta(self, c):
        """Equilibrium contribution of type ``c`` (scalar or array)."""
        self.config.dist.check_support(c)
        if self.method == "closed":
            y = self.nu / self.config.dist.virtual_cost(c)
            out = np.asarray(self.config.tech.h_prime_inv(y), dtype=float)
            return float(out) if out.ndim == 0 else out
        if np.ndim(c) == 0:
            return self._beta_scalar(float(c))
        c = np.asarray(c, dtype=float)
        return np.array([self._beta_scalar(ci) for ci in c.ravel()]).reshape(c.shape)

    __call__ = beta

    def beta_inv(self, xi):
        """Type that contributes ``xi``, by root finding on ``beta`` over the support."""
        if np.ndim(xi) != 0:
            xi = np.asarray(xi, dtype=float)
            return np.array([self.beta_inv(x) for x in xi.ravel()]).reshape(xi.shape)
        xi = float(xi)
        d = self.config.dist
        slack = 1e-12 * self.xi_hi
        if xi < self.xi_lo - slack or xi > self.xi_hi + slack:
            raise DomainError(f"contribution {xi} outside [{self.xi_lo}, {self.xi_hi}]")
        if xi <= self.xi_lo:
            return float(d.c_hi)
        if xi >= self.xi_hi:
            return float(d.c_lo)
        return find_root(lambda c: self._beta_scalar(c) - xi, d.c_lo, d.c_hi, tol=ROOT_TOL)

    def dbeta_inv(self, xi: float) -> float:
        """``d beta^{-1} / d xi`` by central differences (step ``1e-6 * xi``), one-sided at the ends."""
        if self.dbeta_inv_override is not None:
            return float(self.dbeta_inv_override(xi))
        step = 1e-6 * xi
        lo = max(xi - step, self.xi_lo)
        hi = min(xi + step, self.xi_hi)
        return (self.beta_inv(hi) - self.beta_inv(lo)) / (hi - lo)

    def surrogate(self, degree: int = 96) -> Callable:
        """Vectorized Chebyshev interpolant of ``beta``; accuracy is checked before returning."""
        key = ("surrogate", degree)
        if key not in self._cache:
            d = self.config.dist
            cheb = Chebyshev.interpolate(self.beta, degree, domain=[d.c_lo, d.c_hi])
            probe = np.linspace(d.c_lo, d.c_hi, 257)
            err = np.max(np.abs(cheb(probe) - self.beta(probe)))
            if err > 1e-12 * self.xi_hi:
                raise NumericalError(f"strategy surrogate error {err:.2e} too large")
            self._cache[key] = cheb
        return self._cache[key]

    def vectorized(self) -> Callable:
        """Fast array evaluation: closed form when available, otherwise the surrogate."""
        if self.method == "closed":
            return self.beta
        return self.surrogate()

    def opponent_sums(self, n: int, seed: int, log2_samples: int = QMC_LOG2_SAMPLES) -> np.ndarray:
        """Scrambled-Sobol sample of the total contribution of ``n - 1`` opponents."""
        key = ("opponents", n, seed, log2_samples)
        if key not in self._cache:
            d = self.config.dist
            if d.ppf is None:
                raise ValidationError("cost distribution needs an inverse cdf for sampling")
            u = qmc.Sobol(d=n - 1, scramble=True, seed=seed).random_base2(log2_samples)
            types = d.ppf(u)
            beta = self.vectorized()
            self._cache[key] = np.ascontiguousarray(beta(types).sum(axis=1))
        return self._cache[key]


def opf_strategy(config: ContestConfig, method: str = "auto") -> OpfStrategy:
    """Equilibrium strategy of the OPF mechanism.

    ``method="auto"`` uses a closed-form inverse of ``h'`` when the
    technology has one and root finding otherwise. The result never depends
    on ``config.n``.
    """
    if not config.dist.is_regular():
        raise ValidationError(
            "virtual cost c + F(c)/f(c) is not strictly increasing on the support; "
            "the OPF strategy would not be monotone")
    if method == "auto":
        method = "closed" if config.tech.h_prime_inv is not None else "rootfind"
    strategy = OpfStrategy(config, method=method)
    if not strategy.xi_hi > strategy.xi_lo > 0:
        raise ValidationError("OPF strategy is not strictly decreasing and positive")
    return strategy


def win_prob(config: ContestConfig, strategy: OpfStrategy, xi: float, *, return_error: bool = False):
    """Probability that contribution ``xi`` beats ``n - 1`` opponents playing ``strategy``.

    Two players: adaptive quadrature over the opponent's type (error reported
    as 0). More players: scrambled-Sobol estimate over ``2**20`` opponent
    profiles seeded by ``config.seed``, with the sample standard error.
    """
    if not xi > 0:
        raise ValidationError(f"win_prob needs xi > 0, got {xi}")
    d = config.dist
    if config.n == 2:
        beta = strategy.beta

        def integrand(c):
            return xi / (xi + beta(c)) * d.pdf(c)

        p = integrate_1d(integrand, d.c_lo, d.c_hi, tol=QUAD_TOL, rel_tol=QUAD_RTOL, vectorized=True)
        return (p, 0.0) if return_error else p
    S = strategy.opponent_sums(config.n, config.seed)
    mean, mean_sq = kernels.mean_win_prob(np.array([float(xi)]), S)
    p = float(mean[0])
    if return_error:
        var = max(float(mean_sq[0]) - p * p, 0.0)
        return p, float(np.sqrt(var / S.size))
    return p


def _stieltjes_term(config, strategy, xi_w):
    """``int_{xi_lo}^{xi_w} h(t) d beta^{-1}(t)`` with the derivative taken numerically."""
    h = config.tech.h

    def integrand(t):
        return float(h(t)) * strategy.dbeta_inv(t)

    return integrate_1d(integrand, strategy.xi_lo, xi_w, tol=STIELTJES_TOL, rel_tol=STIELTJES_RTOL)


def opf_prize(config: ContestConfig, strategy: OpfStrategy, xi_w: float) -> float:
    """Optimal prize paid to a winner who contributed ``xi_w``.

    Raises :class:`DomainError` outside ``[xi_lo, xi_hi]``.
    """
    xi_w = float(xi_w)
    slack = 1e-12 * strategy.xi_hi
    if xi_w < strategy.xi_lo - slack or xi_w > strategy.xi_hi + slack:
        raise DomainError(
            f"prize undefined at xi={xi_w}: outside [{strategy.xi_lo}, {strategy.xi_hi}]")
    xi_w = min(max(xi_w, strategy.xi_lo), strategy.xi_hi)
    numerator = strategy.beta_inv(xi_w) * float(config.tech.h(xi_w)) \
        - _stieltjes_term(config, strategy, xi_w)
    return numerator / win_prob(config, strategy, xi_w)


def prize_schedule(config: ContestConfig, strategy: OpfStrategy, degree: int = 64) -> PrizeSchedule:
    """The OPF prize as a :class:`PrizeSchedule`, tabulated by a Chebyshev interpolant.

    The interpolant is checked against direct evaluation at off-node points.
    """
    def exact(xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        return np.array([opf_prize(config, strategy, x) for x in xi])

    cheb = Chebyshev.interpolate(exact, degree, domain=[strategy.xi_lo, strategy.xi_hi])
    probe = np.linspace(strategy.xi_lo, strategy.xi_hi, 7)[1:-1]
    err = np.max(np.abs(cheb(probe) - exact(probe)))
    if err > 1e-9 * max(1.0, float(np.max(np.abs(cheb(probe))))):
        raise NumericalError(f"prize interpolant error {err:.2e} too large")

    def value(xi):
        out = cheb(np.asarray(xi, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    return PrizeSchedule(strategy.xi_lo, strategy.xi_hi, value, kind="function")


def opf_profit(config: ContestConfig, strategy: OpfStrategy | None = None) -> float:
    """Crowdsourcer's maximum expected profit under the optimal prize function."""
    strategy = strategy or opf_strategy(config)
    d, h, nu = config.dist, config.tech.h, config.nu
    beta = strategy.beta
    h_floor = float(h(strategy.xi_lo))

    def integrand(c):
        b = beta(c)
        hb = h(b)
        return (nu * b - hb * c + d.hazard_ratio(c) * (h_floor - hb)) * d.pdf(c)

    return config.n * integrate_1d(integrand, d.c_lo, d.c_hi, tol=QUAD_TOL, rel_tol=QUAD_RTOL, vectorized=True)


def realized_profit(config: ContestConfig, strategy: OpfStrategy | None = None) -> float:
    """Expected revenue minus expected prize actually paid under the optimal prize schedule.

    Uses the envelope form of the players' utilities, so the integrand is
    ``nu beta(c) - h(beta(c)) (c + F(c)/f(c))``. It differs from
    :func:`opf_profit` by ``n h(xi_lo) int F(c) dc``, the value the latter
    credits for the lowest contribution's effort.
    """
    strategy = strategy or opf_strategy(config)
    d, h, nu = config.dist, config.tech.h, config.nu

    def integrand(c):
        b = strategy.beta(c)
        return (nu * b - h(b) * d.virtual_cost(c)) * d.pdf(c)

    return config.n * integrate_1d(integrand, d.c_lo, d.c_hi, tol=QUAD_TOL, rel_tol=QUAD_RTOL, vectorized=True)


def expected_prize_paid(config: ContestConfig, strategy: OpfStrategy, prize: PrizeSchedule) -> float:
    """``n E[p(beta(c)) V(beta(c))]``: the expected prize, straight from the schedule."""
    d = config.dist

    def integrand(c):
        xi = float(strategy.beta(c))
        return win_prob(config, strategy, xi) * float(prize(xi)) * float(d.pdf(c))

    return config.n * integrate_1d(integrand, d.c_lo, d.c_hi, tol=1e-10)


def envelope_utility(config: ContestConfig, strategy: OpfStrategy, c: float) -> float:
    """Equilibrium expected utility of type ``c`` as ``int_c^{c_hi} h(beta(t)) dt``."""
    d = config.dist
    beta = strategy.beta
    return integrate_1d(lambda t: config.tech.h(beta(t)), float(c), d.c_hi,
                        tol=QUAD_TOL, rel_tol=QUAD_RTOL, vectorized=True)


def opf_welfare(config: ContestConfig, strategy: OpfStrategy | None = None) -> float:
    """Expected total player surplus, as a nested double integral over types."""
    strategy = strategy or opf_strategy(config)
    d = config.dist

    def outer(c):
        return envelope_utility(config, strategy, c) * float(d.pdf(c))

    return config.n * integrate_1d(outer, d.c_lo, d.c_hi, tol=QUAD_TOL, rel_tol=QUAD_RTOL)


def expected_utility(config: ContestConfig, strategy: OpfStrategy, c: float,
                     rel_tol: float = 1e-3) -> float:
    """Expected equilibrium utility of type ``c``, computed two ways.

    The direct form ``p(xi) V*(xi) - h(xi) c`` at ``xi = beta(c)`` is compared
    with the envelope integral; :class:`ConsistencyError` is raised if they
    differ by more than ``rel_tol * (1 + |u|)``. Returns the envelope value.
    """
    config.dist.check_support(c)
    xi = float(strategy.beta(c))
    direct = win_prob(config, strategy, xi) * opf_prize(config, strategy, xi) \
        - float(config.tech.h(xi)) * c
    envelope = envelope_utility(config, strategy, c)
    if abs(direct - envelope) > rel_tol * (1.0 + abs(envelope)):
        raise ConsistencyError(
            f"utility at c={c}: direct {direct:.10g} vs envelope {envelope:.10g}")
    return envelope


@dataclass(eq=False)
class OpfSolution:
    """Strategy, prize schedule, profit and welfare of the OPF mechanism for one config."""

    config: ContestConfig
    strategy: OpfStrategy
    prize: PrizeSchedule
    profit: float
    welfare: float
    profit_realized: float


def solve_opf(config: ContestConfig, method: str = "auto") -> OpfSolution:
    strategy = opf_strategy(config, method=method)
    prize = prize_schedule(config, strategy)
    profit = opf_profit(config, strategy)
    welfare = opf_welfare(config, strategy)
    if not (np.isfinite(profit) and np.isfinite(welfare)):
        raise NumericalError("non-finite profit or welfare")
    return OpfSolution(config, strategy, prize, profit, welfare, realized_profit(config, strategy))


def prize_linearity(solution: OpfSolution, points: int = 50) -> dict:
    """Least-squares line through the prize schedule and its R^2 (diagnostic only)."""
    s = solution.strategy
    xi = np.linspace(s.xi_lo, s.xi_hi, points)
    v = solution.prize(xi)
    slope, intercept = np.polyfit(xi, v, 1)
    fit = slope * xi + intercept
    ss_res = float(np.sum((v - fit) ** 2))
    ss_tot = float(np.sum((v - v.mean()) ** 2))
    return {"slope": float(slope), "intercept": float(intercept),
            "r_squared": 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0}
