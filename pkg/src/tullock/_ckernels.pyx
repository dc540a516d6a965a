# cython: language_level=3
"""Compiled versions of the hot kernels in ``_pykernels``."""
import numpy as np


def collocation_residuals(const double[::1] x, const double[::1] c, const double[::1] f,
                   double delta, double V0, const double[::1] hp):
    cdef Py_ssize_t m = x.shape[0], i, j
    cdef double acc, s
    out = np.empty(m)
    cdef double[::1] r = out
    for i in range(m):
        acc = 0.0
        for j in range(m):
            s = x[i] + x[j]
            acc += x[j] * f[j] / (s * s)
        r[i] = delta * acc - hp[i] * c[i] / V0
    return out


def collocation_fd_jacobian(const double[::1] x, const double[::1] c, const double[::1] f,
                     double delta, double V0, const double[::1] hp,
                     const double[::1] hp_step, const double[::1] steps,
                     const double[::1] r):
    cdef Py_ssize_t m = x.shape[0], i, j, k
    cdef double xj, xsj, h, s, sp, acc
    out = np.empty((m, m))
    cdef double[:, ::1] J = out
    for j in range(m):
        xj = x[j]
        h = steps[j]
        xsj = xj + h
        for i in range(m):
            if i == j:
                continue
            s = x[i] + xj
            sp = x[i] + xsj
            J[i, j] = delta * f[j] * (xsj / (sp * sp) - xj / (s * s)) / h
        acc = 0.0
        for k in range(m):
            if k == j:
                acc += xsj * f[j] / (4.0 * xsj * xsj)
            else:
                s = xsj + x[k]
                acc += x[k] * f[k] / (s * s)
        J[j, j] = (delta * acc - hp_step[j] * c[j] / V0 - r[j]) / h
    return out


def mean_win_prob(const double[::1] xi, const double[::1] S):
    cdef Py_ssize_t K = xi.shape[0], N = S.shape[0], k, t
    cdef double x, q, tot, acc, acc2
    mean = np.empty(K)
    mean_sq = np.empty(K)
    cdef double[::1] mv = mean, msq = mean_sq
    for k in range(K):
        x = xi[k]
        acc = 0.0
        acc2 = 0.0
        for t in range(N):
            tot = x + S[t]
            if tot > 0:
                q = x / tot
                acc += q
                acc2 += q * q
        mv[k] = acc / N
        msq[k] = acc2 / N
    return mean, mean_sq


def lottery_winners(const double[:, ::1] contrib, const double[::1] u):
    cdef Py_ssize_t T = contrib.shape[0], n = contrib.shape[1], t, i, last
    cdef double total, target, cum
    out = np.empty(T, dtype=np.int64)
    cdef long long[::1] w = out
    for t in range(T):
        total = 0.0
        for i in range(n):
            total += contrib[t, i]
        if total == 0.0:
            w[t] = -1
            continue
        target = u[t] * total
        cum = 0.0
        last = -1
        w[t] = -1
        for i in range(n):
            if contrib[t, i] > 0:
                last = i
            cum += contrib[t, i]
            if cum > target and contrib[t, i] > 0:
                w[t] = i
                break
        if w[t] < 0:
            w[t] = last
    return out
