"""Conventional fixed-prize Tullock contest, solved and optimized numerically.

For a fixed prize ``V0`` the two-player equilibrium condition is an integral
equation in the strategy ``beta0``. Replacing the integral by a uniform
quadrature sum over the cost grid and collocating at the same points turns
it into ``m`` nonlinear equations, solved by damped Newton. ``optimize``
then sweeps ``V0`` over a grid and keeps the profit-maximizing prize.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import ContestConfig
from .errors import ConvergenceError, NumericalError, ValidationError
from .numerics import QuadratureGrid, SolverSettings, solve_system

__all__ = [
    "FixedPrizeError",
    "FixedPrizeEquilibrium",
    "FixedPrizeSolution",
    "residuals",
    "solve_equilibrium",
    "profit_estimate",
    "welfare_estimate",
    "welfare_direct",
    "optimize",
    "discrete_best_response_gap",
    "initial_guess",
]

log = logging.getLogger(__name__)

DEFAULT_V0_LO = 0.01
DEFAULT_V0_HI = 5.0
DEFAULT_V0_STEP = 0.01
DEFAULT_M = 100
EARLY_STOP = 5
WIDENINGS = 3


class FixedPrizeError(NumericalError):
    """Equilibrium or optimizer failure, tagged with the prize and grid size."""

    def __init__(self, message, V0=None, m=None, nu=None):
        super().__init__(message)
        self.V0 = V0
        self.m = m
        self.nu = nu


@dataclass(eq=False)
class FixedPrizeEquilibrium:
    """Grid strategy ``xi[i] = beta0(grid.points[i])`` for prize ``V0``."""

    config: ContestConfig
    grid: QuadratureGrid
    xi: np.ndarray
    V0: float
    residual: float
    pdf: np.ndarray = field(repr=False)

    @property
    def c(self) -> np.ndarray:
        return self.grid.points

    def strategy(self):
        """Piecewise-linear interpolant of the grid strategy, for simulation."""
        c, xi = self.grid.points, self.xi
        last = self.grid.hi

        def beta0(x):
            # beyond the last collocation point extend linearly to c_hi
            slope = (xi[-1] - xi[-2]) / (c[-1] - c[-2])
            x = np.asarray(x, dtype=float)
            out = np.interp(x, c, xi)
            tail = x > c[-1]
            if np.any(tail):
                out = np.where(tail, xi[-1] + slope * (np.minimum(x, last) - c[-1]), out)
            return float(out) if out.ndim == 0 else out

        return beta0


@dataclass(eq=False)
class FixedPrizeSolution:
    """Optimizer output for one value of ``nu``."""

    nu: float
    V0_star: float
    pi0_star: float
    equilibrium: FixedPrizeEquilibrium
    trajectory: list
    welfare: float


def _check_two_player(config: ContestConfig):
    if config.n != 2:
        raise ValidationError(
            f"the fixed-prize benchmark is solved for two players only (got n={config.n}); "
            "n-player quadrature grows as m**(n-1)")


def _pdf_on(grid: QuadratureGrid, config: ContestConfig) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(config.dist.pdf(grid.points), dtype=float))


def residuals(grid: QuadratureGrid, xi, V0: float, config: ContestConfig) -> np.ndarray:
    """Residuals of the collocated equilibrium condition at every grid point.

    ``r_i = delta * sum_j xi_j f(c_j) / (xi_i + xi_j)**2 - h'(xi_i) c_i / V0``
    """
    _check_two_player(config)
    xi = np.ascontiguousarray(xi, dtype=float)
    if not np.all(xi > 0):
        raise ValidationError("contributions must be strictly positive")
    hp = np.ascontiguousarray(config.tech.h_prime(xi), dtype=float)
    return kernels.collocation_residuals(xi, np.ascontiguousarray(grid.points), _pdf_on(grid, config),
                                  grid.weight, float(V0), hp)


def initial_guess(V0: float, m: int) -> np.ndarray:
    """Constant start ``sqrt(V0)/4``, the order of magnitude that balances the equation for h(xi)=xi**2."""
    return np.full(m, np.sqrt(V0) / 4.0)


def solve_equilibrium(config: ContestConfig, V0: float, m: int = DEFAULT_M, x0=None,
                      settings: SolverSettings | None = None) -> FixedPrizeEquilibrium:
    """Solve the discretized equilibrium for prize ``V0`` on an ``m``-point grid."""
    _check_two_player(config)
    if not V0 > 0:
        raise ValidationError(f"V0 must be positive, got {V0}")
    settings = settings or SolverSettings()
    d = config.dist
    grid = QuadratureGrid(d.c_lo, d.c_hi, m)
    c = np.ascontiguousarray(grid.points)
    f = _pdf_on(grid, config)
    delta = grid.weight
    h_prime = config.tech.h_prime

    def F(x):
        x = np.ascontiguousarray(x)
        return kernels.collocation_residuals(x, c, f, delta, V0, np.ascontiguousarray(h_prime(x), dtype=float))

    def jac(x, fx):
        x = np.ascontiguousarray(x)
        xs = x + settings.fd_step * np.maximum(np.abs(x), 1e-12)
        steps = xs - x
        return kernels.collocation_fd_jacobian(
            x, c, f, delta, V0,
            np.ascontiguousarray(h_prime(x), dtype=float),
            np.ascontiguousarray(h_prime(xs), dtype=float),
            np.ascontiguousarray(steps), np.ascontiguousarray(fx, dtype=float))

    warm = x0 is not None
    x0 = np.asarray(x0, dtype=float) if warm else initial_guess(V0, m)
    try:
        xi = solve_system(F, x0, settings, jac=jac)
    except ConvergenceError as exc:
        if warm:
            # warm start failed; retry from the cold start before giving up
            try:
                xi = solve_system(F, initial_guess(V0, m), settings, jac=jac)
            except ConvergenceError:
                raise FixedPrizeError(f"equilibrium solve failed at V0={V0}, m={m}: {exc}",
                                      V0=V0, m=m) from exc
        else:
            raise FixedPrizeError(f"equilibrium solve failed at V0={V0}, m={m}: {exc}",
                                  V0=V0, m=m) from exc
    res = float(np.max(np.abs(F(xi))))
    return FixedPrizeEquilibrium(config, grid, xi, float(V0), res, f)


def profit_estimate(equilibrium: FixedPrizeEquilibrium, nu: float) -> float:
    """Quadrature estimate ``n nu delta sum_j xi_j f(c_j) - V0``."""
    eq = equilibrium
    n = eq.config.n
    return n * nu * eq.grid.weight * float(np.sum(eq.xi * eq.pdf)) - eq.V0


def welfare_estimate(equilibrium: FixedPrizeEquilibrium) -> float:
    """Double-sum estimate ``n delta sum_i f(c_i) (delta sum_{j>=i} h(xi_j))`` of total player surplus."""
    eq = equilibrium
    delta = eq.grid.weight
    h = np.asarray(eq.config.tech.h(eq.xi), dtype=float)
    tail = np.cumsum(h[::-1])[::-1]
    return eq.config.n * delta * float(np.sum(eq.pdf * delta * tail))


def _grid_win_prob(eq: FixedPrizeEquilibrium) -> np.ndarray:
    # p[k] = delta * sum_j f(c_j) xi_k / (xi_k + xi_j)
    w = eq.grid.weight * eq.pdf
    return np.sum(w[None, :] * eq.xi[:, None] / (eq.xi[:, None] + eq.xi[None, :]), axis=1)


def welfare_direct(equilibrium: FixedPrizeEquilibrium) -> float:
    """Total player surplus from the utilities themselves, ``n delta sum_i f(c_i) (V0 p_i - h(xi_i) c_i)``.

    Unlike :func:`welfare_estimate` this does not assume the highest type
    earns nothing, which a fixed prize does not guarantee.
    """
    eq = equilibrium
    h = np.asarray(eq.config.tech.h(eq.xi), dtype=float)
    u = eq.V0 * _grid_win_prob(eq) - h * eq.c
    return eq.config.n * eq.grid.weight * float(np.sum(eq.pdf * u))


def _v0_grid(lo, hi, step, start_index=0):
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 12) for k in range(start_index, count)]


def optimize(config: ContestConfig, V0_lo: float = DEFAULT_V0_LO, V0_hi: float = DEFAULT_V0_HI,
             step_V0: float = DEFAULT_V0_STEP, m: int = DEFAULT_M,
             early_stop: int = EARLY_STOP, widenings: int = WIDENINGS,
             settings: SolverSettings | None = None) -> FixedPrizeSolution:
    """Grid search over the fixed prize for the profit-maximizing ``V0``.

    The sweep is warm-started from the previous equilibrium and stops once
    profit has fallen ``early_stop`` times in a row. If the best prize sits on
    the upper end of the range, ``V0_hi`` is doubled (at most ``widenings``
    times) and the sweep continues.

    Returns
    -------
    FixedPrizeSolution
        ``trajectory`` holds every evaluated ``(V0, profit)`` pair.
    """
    _check_two_player(config)
    if not 0 < V0_lo < V0_hi:
        raise ValidationError(f"need 0 < V0_lo < V0_hi, got {V0_lo}, {V0_hi}")
    if not step_V0 > 0:
        raise ValidationError("step_V0 must be positive")
    nu = config.nu
    trajectory = []
    best = None
    best_eq = None
    x_prev = None
    decreasing = 0
    hi = V0_hi
    index = 0
    for attempt in range(widenings + 1):
        stopped = False
        for V0 in _v0_grid(V0_lo, hi, step_V0, index):
            index += 1
            eq = solve_equilibrium(config, V0, m, x0=x_prev, settings=settings)
            x_prev = eq.xi
            profit = profit_estimate(eq, nu)
            if trajectory and profit < trajectory[-1][1]:
                decreasing += 1
            else:
                decreasing = 0
            trajectory.append((V0, profit))
            if best is None or profit > best[1]:
                best = (V0, profit)
                best_eq = eq
            if decreasing >= early_stop:
                stopped = True
                break
        peak = max(range(len(trajectory)), key=lambda k: trajectory[k][1])
        if peak == 0:
            raise FixedPrizeError(
                f"profit peak at the lower end V0={V0_lo}; lower V0_lo", V0=V0_lo, m=m, nu=nu)
        if stopped or peak < len(trajectory) - 1:
            break
        if attempt == widenings:
            raise FixedPrizeError(
                f"profit peak still at the upper end V0={hi} after {widenings} widenings",
                V0=hi, m=m, nu=nu)
        log.info("nu=%g: peak at upper end %g, widening range", nu, hi)
        hi *= 2.0
    return FixedPrizeSolution(nu, best[0], best[1], best_eq, trajectory, welfare_estimate(best_eq))


def discrete_best_response_gap(equilibrium: FixedPrizeEquilibrium) -> float:
    """Largest gain any grid type gets by switching to another grid contribution.

    Opponent types are the grid points with weights ``delta * f(c_j)``, which
    is the discrete game the collocated system describes.
    """
    eq = equilibrium
    h = np.asarray(eq.config.tech.h(eq.xi), dtype=float)
    p = _grid_win_prob(eq)
    # u[i, k] = utility of type i contributing xi_k
    u = eq.V0 * p[None, :] - h[None, :] * eq.c[:, None]
    return float(np.max(u.max(axis=1) - np.diag(u)))
