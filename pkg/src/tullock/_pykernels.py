"""Pure numpy implementations of the hot kernels.

Signatures match the compiled ``_ckernels`` module exactly.
"""
import numpy as np


def collocation_residuals(x, c, f, delta, V0, hp):
    """Residuals of the discretized two-player fixed-prize equilibrium condition."""
    x = np.asarray(x, dtype=float)
    S = x[:, None] + x[None, :]
    return delta * np.sum((x * f)[None, :] / (S * S), axis=1) - hp * c / V0


def collocation_fd_jacobian(x, c, f, delta, V0, hp, hp_step, steps, r):
    """Forward-difference Jacobian of :func:`collocation_residuals`.

    Column ``j`` is ``(F(x + steps[j] e_j) - F(x)) / steps[j]``, assembled
    incrementally: off-diagonal rows only see the changed ``j`` term.
    """
    x = np.asarray(x, dtype=float)
    xs = x + steps
    S = x[:, None] + x[None, :]
    Sp = x[:, None] + xs[None, :]
    xf = x * f
    J = delta * (xs * f)[None, :] / (Sp * Sp) - delta * xf[None, :] / (S * S)
    # diagonal: full re-evaluation of row j with x_j moved
    Sd = xs[:, None] + x[None, :]
    terms = xf[None, :] / (Sd * Sd)
    idx = np.arange(x.size)
    terms[idx, idx] = xs * f / (4.0 * xs * xs)
    row = delta * terms.sum(axis=1) - hp_step * c / V0
    J[idx, idx] = row - r
    return J / steps[None, :]


def mean_win_prob(xi, S):
    """For each ``xi[k]``: mean and mean square of ``xi[k] / (xi[k] + S)`` over the sample ``S``."""
    xi = np.asarray(xi, dtype=float)
    S = np.asarray(S, dtype=float)
    mean = np.empty(xi.size)
    mean_sq = np.empty(xi.size)
    for k, x in enumerate(xi):
        tot = x + S
        q = np.divide(x, tot, out=np.zeros_like(S), where=tot > 0)
        mean[k] = q.mean()
        mean_sq[k] = np.mean(q * q)
    return mean, mean_sq


def lottery_winners(contrib, u):
    """Winner index per row drawn with probability proportional to contribution; -1 if all zero."""
    contrib = np.asarray(contrib, dtype=float)
    cum = np.cumsum(contrib, axis=1)
    total = cum[:, -1]
    target = np.asarray(u, dtype=float) * total
    winners = np.sum(cum <= target[:, None], axis=1)
    winners = np.minimum(winners, contrib.shape[1] - 1)
    # guard against landing on a zero-contribution slot through rounding at the top end
    while True:
        bad = (contrib[np.arange(len(winners)), winners] == 0) & (total > 0)
        if not np.any(bad):
            break
        winners[bad] -= 1
    winners[total == 0] = -1
    return winners.astype(np.int64)
