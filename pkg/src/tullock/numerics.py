"""Numerical kernels: adaptive quadrature, bracketed root finding and a
damped Newton solver for square nonlinear systems.

All functions are pure; nothing here keeps module-level mutable state.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import ConvergenceError, IntegrationError, RootBracketError, ValidationError

__all__ = [
    "QuadratureGrid",
    "SolverSettings",
    "integrate_1d",
    "find_root",
    "solve_system",
    "fd_jacobian",
]

# Gauss-Kronrod 7/15 abscissae on [0, 1] (symmetric), Kronrod weights, and the
# Gauss weights attached to the odd-indexed Kronrod abscissae.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
# Full 15-point node set as offsets in [-1, 1].
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[[9, 11, 13]] = _WG[2::-1]
_GW[7] = _WG[3]


@dataclass(frozen=True)
class QuadratureGrid:
    """Uniform left-endpoint grid ``lo + j * weight`` for ``j = 0..m-1``."""

    lo: float
    hi: float
    m: int
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValidationError(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if int(self.m) < 2:
            raise ValidationError(f"grid needs m >= 2, got {self.m}")
        pts = self.lo + self.weight * np.arange(self.m)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def weight(self) -> float:
        return (self.hi - self.lo) / self.m


@dataclass(frozen=True)
class SolverSettings:
    """Knobs for :func:`solve_system`."""

    residual_tol: float = 1e-9
    max_iter: int = 200
    damping: float = 1.0
    fd_step: float = 1e-7
    max_halvings: int = 40

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise ValidationError("residual_tol must be positive")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")
        if not 0 < self.damping <= 1:
            raise ValidationError("damping must lie in (0, 1]")
        if not self.fd_step > 0:
            raise ValidationError("fd_step must be positive")


def _gk15(f, a, b, vectorized):
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = center + half * _NODES
    if vectorized:
        y = np.asarray(f(x), dtype=float)
    else:
        y = np.array([f(float(xi)) for xi in x], dtype=float)
    if not np.all(np.isfinite(y)):
        raise IntegrationError(f"non-finite integrand on [{a}, {b}]", np.nan, np.inf)
    kronrod = half * float(_KW @ y)
    gauss = half * float(_GW @ y)
    return kronrod, abs(kronrod - gauss)


def integrate_1d(
    f: Callable,
    lo: float,
    hi: float,
    tol: float = 1e-10,
    *,
    rel_tol: float = 0.0,
    vectorized: bool = False,
    max_intervals: int = 4000,
    return_error: bool = False,
):
    """Integrate ``f`` over ``[lo, hi]`` by globally adaptive Gauss-Kronrod (7/15).

    The interval with the largest local error is bisected until the summed
    error estimate is at most ``max(tol, rel_tol * |estimate|)``. Subdivision order is deterministic, so
    a run with a smaller ``tol`` extends the run with a larger one; the
    returned error is the smallest total seen along the way and therefore
    never grows when ``tol`` shrinks.

    Parameters
    ----------
    f : callable
        Integrand. With ``vectorized=True`` it must accept a 1-D array.
    lo, hi : float
        Limits, ``lo <= hi``.
    tol : float
        Absolute error target.
    rel_tol : float
        Relative error target; whichever of the two is looser applies.
    max_intervals : int
        Subdivision budget.
    return_error : bool
        Also return the error estimate.

    Raises
    ------
    IntegrationError
        If the budget is exhausted; carries the best estimate and its bound.
    """
    if hi < lo:
        raise ValidationError(f"integrate_1d needs lo <= hi, got [{lo}, {hi}]")
    if hi == lo:
        return (0.0, 0.0) if return_error else 0.0

    value, err = _gk15(f, lo, hi, vectorized)
    # heap entries: (-err, tiebreak, a, b, value, err)
    heap = [(-err, 0, lo, hi, value, err)]
    total, total_err = value, err
    best = (total, total_err)
    counter = 1
    while total_err > max(tol, rel_tol * abs(total)):
        if len(heap) >= max_intervals:
            raise IntegrationError(
                f"integrate_1d: {max_intervals} subintervals exhausted with error {best[1]:.3e} > {max(tol, rel_tol * abs(total)):.3e}",
                best[0], best[1])
        _, _, a, b, v, e = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        if not (a < mid < b):
            raise IntegrationError(
                "integrate_1d: interval cannot be bisected further", best[0], best[1])
        v1, e1 = _gk15(f, a, mid, vectorized)
        v2, e2 = _gk15(f, mid, b, vectorized)
        heapq.heappush(heap, (-e1, counter, a, mid, v1, e1))
        heapq.heappush(heap, (-e2, counter + 1, mid, b, v2, e2))
        counter += 2
        # re-sum instead of updating incrementally to avoid drift
        total = math.fsum(item[4] for item in heap)
        total_err = math.fsum(item[5] for item in heap)
        if total_err < best[1]:
            best = (total, total_err)
    value, err = best
    return (value, err) if return_error else value


def find_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    """Root of ``f`` inside ``[lo, hi]`` by Brent's bisection/secant/inverse-quadratic hybrid.

    Raises :class:`RootBracketError` when ``f(lo)`` and ``f(hi)`` share a sign.
    """
    if hi < lo:
        lo, hi = hi, lo
    flo = f(lo)
    if flo == 0.0:
        return float(lo)
    fhi = f(hi)
    if fhi == 0.0:
        return float(hi)
    if not (np.isfinite(flo) and np.isfinite(fhi)):
        raise RootBracketError(f"non-finite endpoint values f({lo})={flo}, f({hi})={fhi}")
    if np.sign(flo) == np.sign(fhi):
        raise RootBracketError(
            f"no sign change on [{lo}, {hi}]: f(lo)={flo:.6g}, f(hi)={fhi:.6g}")
    return float(optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500))


def fd_jacobian(F: Callable, x: np.ndarray, fx: np.ndarray | None = None, rel_step: float = 1e-7) -> np.ndarray:
    """Forward-difference Jacobian with per-component step ``rel_step * max(|x_j|, 1e-12)``."""
    x = np.asarray(x, dtype=float)
    if fx is None:
        fx = np.asarray(F(x), dtype=float)
    J = np.empty((fx.size, x.size))
    for j in range(x.size):
        h = rel_step * max(abs(x[j]), 1e-12)
        xp = x.copy()
        xp[j] += h
        J[:, j] = (np.asarray(F(xp), dtype=float) - fx) / (xp[j] - x[j])
    return J


def solve_system(
    F: Callable[[np.ndarray], np.ndarray],
    x0,
    settings: SolverSettings | None = None,
    jac: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Damped Newton iteration for ``F(x) = 0`` on the positive orthant.

    Each Newton step is scaled by ``settings.damping`` and then halved (up to
    ``settings.max_halvings`` times) until the trial point is strictly
    positive and the residual 2-norm decreases.

    Parameters
    ----------
    F : callable
        Residual map ``R^m -> R^m``.
    x0 : array_like
        Strictly positive starting point.
    settings : SolverSettings
        Tolerances and limits; defaults are ``residual_tol=1e-9``, ``max_iter=200``.
    jac : callable, optional
        ``jac(x, F(x))`` returning the Jacobian. Forward differences by default.

    Returns
    -------
    numpy.ndarray
        A point whose max-norm residual is at most ``settings.residual_tol``.

    Raises
    ------
    ConvergenceError
        On iteration budget exhaustion, a singular Jacobian, or a step that
        cannot be made positive and descending by backtracking.
    """
    s = settings or SolverSettings()
    x = np.array(x0, dtype=float, copy=True).ravel()
    if not np.all(x > 0):
        raise ValidationError("solve_system: x0 must be strictly positive componentwise")
    fx = np.asarray(F(x), dtype=float)
    for _ in range(s.max_iter):
        res = float(np.max(np.abs(fx)))
        if res <= s.residual_tol:
            return x
        J = jac(x, fx) if jac is not None else fd_jacobian(F, x, fx, s.fd_step)
        try:
            step = np.linalg.solve(J, -fx)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Jacobian (residual {res:.3e})", x, res) from exc
        norm = float(np.linalg.norm(fx))
        t = s.damping
        for _ in range(s.max_halvings + 1):
            trial = x + t * step
            if np.all(trial > 0):
                ft = np.asarray(F(trial), dtype=float)
                if np.all(np.isfinite(ft)) and np.linalg.norm(ft) < norm:
                    break
            t *= 0.5
        else:
            if not np.all(trial > 0):
                raise ConvergenceError(
                    f"step leaves the positive orthant after {s.max_halvings} halvings "
                    f"(residual {res:.3e})", x, res)
            raise ConvergenceError(
                f"no residual decrease after {s.max_halvings} halvings (residual {res:.3e})", x, res)
        x, fx = trial, ft
    res = float(np.max(np.abs(fx)))
    if res <= s.residual_tol:
        return x
    raise ConvergenceError(f"max_iter={s.max_iter} reached with residual {res:.3e}", x, res)
