"""Numba iteration kernels for the three iterative solvers.

The kernels run the literal per-iteration recurrences in measurement space
(compute ``B c``, then accumulate ``B^T r`` row by row) so that the three
solvers are structurally identical and their per-iteration costs comparable.
Each iteration also evaluates the solver's objective in the same pass; the
loss sequence feeds the divergence guard, the best-iterate bookkeeping, and
the returned loss trace.

All kernels are single-threaded, allocation-local, and release the GIL, so a
batch may fan spectra out across threads with bitwise-identical results.

``fastmath`` is restricted to contraction/reassociation: the divergence guard
compares against sentinel values and must keep IEEE inf/nan semantics.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["snnls_kernel", "ista_kernel", "snpr_kernel"]

_FASTMATH = {"contract", "reassoc", "arcp"}

#: Finite stand-in for +inf in guard comparisons (see module docstring).
_HUGE = 1e300

#: Consecutive loss increases tolerated before the divergence guard trips.
GUARD_LIMIT = 50


@njit(cache=True, nogil=True, fastmath=_FASTMATH)
def snnls_kernel(B, s, c0, lam, mu, eps, max_iters, step_c0, descent_signs, trace):
    """Heavy-ball projected gradient on (1/2)||s - Bc||^2 + lam * sum(c).

    Momentum update x <- mu*x + g with g = B^T(Bc - s) + lam (descent form)
    or g = lam + B^T(s - Bc) when ``descent_signs`` is false, then
    c <- max(c - (step_c0/sqrt(t)) * x, 0), t = 1, 2, ...

    Returns (c, iterations, converged, last_step, n_trace). Non-converged
    exits return the lowest-loss iterate seen.
    """
    m, k = B.shape
    c = c0.copy()
    x = np.zeros(k)
    g = np.empty(k)
    d = np.empty(m)
    best_c = c.copy()
    best_loss = _HUGE
    prev_loss = _HUGE
    bad = 0
    sign = 1.0 if descent_signs else -1.0
    last_step = _HUGE
    t_done = 0
    for t in range(1, max_iters + 1):
        t_done = t
        for i in range(m):
            acc = 0.0
            for j in range(k):
                acc += B[i, j] * c[j]
            d[i] = acc
        fl = 0.0
        for j in range(k):
            g[j] = 0.0
        for i in range(m):
            r = d[i] - s[i]
            fl += r * r
            for j in range(k):
                g[j] += B[i, j] * r
        csum = 0.0
        for j in range(k):
            csum += c[j]
        loss = 0.5 * fl + lam * csum
        trace[t - 1] = loss
        if loss < best_loss:
            best_loss = loss
            best_c[:] = c
        if loss > prev_loss:
            bad += 1
        else:
            bad = 0
        prev_loss = loss
        if bad >= GUARD_LIMIT:
            return best_c, t, False, last_step, t
        eta = step_c0 / np.sqrt(t)
        step_sq = 0.0
        for j in range(k):
            x[j] = mu * x[j] + sign * g[j] + lam
            cn = c[j] - eta * x[j]
            if cn < 0.0:
                cn = 0.0
            diff = cn - c[j]
            step_sq += diff * diff
            c[j] = cn
        last_step = np.sqrt(step_sq)
        if last_step <= eps:
            return c, t, True, last_step, t
    return best_c, t_done, False, last_step, t_done


@njit(cache=True, nogil=True, fastmath=_FASTMATH)
def ista_kernel(B, s, c0, lam, mu, eps, max_iters, step_c0, descent_signs, trace):
    """Iterative soft-thresholding with the lambda term in both the gradient
    step and the threshold.

    x <- c - 2*eta*(B^T(Bc - s) + lam), c <- sign(x)*max(|x| - lam*eta, 0),
    eta = step_c0/sqrt(t). Iterates may be transiently negative; callers
    project the returned vector. ``mu`` and ``descent_signs`` are unused
    (kept for a uniform kernel signature).

    Returns (c, iterations, converged, last_step, n_trace). The guard
    objective uses lam * sum(|c|) so it is defined for signed iterates.
    """
    m, k = B.shape
    c = c0.copy()
    g = np.empty(k)
    d = np.empty(m)
    prev_loss = _HUGE
    bad = 0
    last_step = _HUGE
    t_done = 0
    for t in range(1, max_iters + 1):
        t_done = t
        for i in range(m):
            acc = 0.0
            for j in range(k):
                acc += B[i, j] * c[j]
            d[i] = acc
        fl = 0.0
        for j in range(k):
            g[j] = 0.0
        for i in range(m):
            r = d[i] - s[i]
            fl += r * r
            for j in range(k):
                g[j] += B[i, j] * r
        asum = 0.0
        for j in range(k):
            asum += abs(c[j])
        loss = 0.5 * fl + lam * asum
        trace[t - 1] = loss
        if loss > prev_loss:
            bad += 1
        else:
            bad = 0
        prev_loss = loss
        if bad >= GUARD_LIMIT:
            return c, t, False, last_step, t
        eta = step_c0 / np.sqrt(t)
        thresh = lam * eta
        step_sq = 0.0
        for j in range(k):
            xj = c[j] - 2.0 * eta * (g[j] + lam)
            mag = abs(xj) - thresh
            if mag < 0.0:
                mag = 0.0
            cn = mag if xj >= 0.0 else -mag
            diff = cn - c[j]
            step_sq += diff * diff
            c[j] = cn
        last_step = np.sqrt(step_sq)
        if last_step <= eps:
            return c, t, True, last_step, t
    return c, t_done, False, last_step, t_done


@njit(cache=True, nogil=True, fastmath=_FASTMATH)
def snpr_kernel(B, s, c0, lam, mu, eps, max_iters, step_c0, log_floor, trace):
    """Heavy-ball projected gradient on the Poisson objective
    sum(Bc) - s . log(Bc) + lam * sum(c), with (Bc)_i floored at ``log_floor``.

    Gradient g_j = sum_i B_ij * (1 - s_i/(Bc)_i) + lam; same momentum, step
    schedule, and guard as ``snnls_kernel``.

    Returns (c, iterations, converged, last_step, n_trace). Non-converged
    exits return the lowest-loss iterate seen.
    """
    m, k = B.shape
    c = c0.copy()
    x = np.zeros(k)
    g = np.empty(k)
    best_c = c.copy()
    best_loss = _HUGE
    prev_loss = _HUGE
    bad = 0
    last_step = _HUGE
    t_done = 0
    for t in range(1, max_iters + 1):
        t_done = t
        fl = 0.0
        for j in range(k):
            g[j] = 0.0
        for i in range(m):
            acc = 0.0
            for j in range(k):
                acc += B[i, j] * c[j]
            if acc < log_floor:
                acc = log_floor
            rho = s[i] / acc
            if s[i] > 0.0:
                fl += acc - s[i] * np.log(acc)
            else:
                fl += acc
            for j in range(k):
                g[j] += B[i, j] * (1.0 - rho)
        csum = 0.0
        for j in range(k):
            csum += c[j]
        loss = fl + lam * csum
        trace[t - 1] = loss
        if loss < best_loss:
            best_loss = loss
            best_c[:] = c
        if loss > prev_loss:
            bad += 1
        else:
            bad = 0
        prev_loss = loss
        if bad >= GUARD_LIMIT:
            return best_c, t, False, last_step, t
        eta = step_c0 / np.sqrt(t)
        step_sq = 0.0
        for j in range(k):
            x[j] = mu * x[j] + g[j] + lam
            cn = c[j] - eta * x[j]
            if cn < 0.0:
                cn = 0.0
            diff = cn - c[j]
            step_sq += diff * diff
            c[j] = cn
        last_step = np.sqrt(step_sq)
        if last_step <= eps:
            return c, t, True, last_step, t
    return best_c, t_done, False, last_step, t_done
