"""The four unmixing solvers plus shared initialization and batch driver.

All solvers estimate a nonnegative abundance vector ``c`` for the linear
mixing model ``s = B c``:

* ``nnls`` — exact nonnegative least squares via the Lawson–Hanson active-set
  method (no regularization, global optimum of the least-squares objective);
* ``snnls`` — heavy-ball projected gradient on the L1-regularized
  least-squares objective;
* ``ista`` — iterative soft-thresholding on the same objective, implemented
  as the literal recurrence with the regularizer both in the gradient step
  and in the threshold (this deliberately differs from textbook proximal
  gradient; see ``ista``'s docstring);
* ``snpr`` — heavy-ball projected gradient on the Poisson negative
  log-likelihood with L1 penalty, for photon-count data.

The iterative solvers share one step schedule (eta = step_c0/sqrt(t), t from
1), one convergence rule (||c_t - c_{t-1}|| <= epsilon), one iteration cap,
and one divergence guard (50 consecutive objective increases aborts with
``converged=False``). Each solver call is single-threaded and deterministic;
``unmix_batch`` may distribute spectra across threads without changing any
result bitwise.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import (
    LOG_FLOOR,
    EndmemberLibrary,
    Spectrum,
    ls_lasso_loss,
    ls_loss,
    poisson_nll,
    project_nonneg,
)
from .errors import GridMismatchError, LibraryConditionError, ValidationError

__all__ = [
    "SolverConfig",
    "UnmixResult",
    "ALGORITHMS",
    "init_projected_ls",
    "nnls",
    "snnls",
    "ista",
    "snpr",
    "unmix_batch",
    "solve",
]

log = logging.getLogger(__name__)

#: Internal peak value the Poisson solver rescales spectra to before
#: iterating. The objective is exactly reparameterized by the rescale (the
#: minimizer maps back by division), but the iteration dynamics are not scale
#: invariant under the fixed eta = step_c0/sqrt(t) schedule; peaking the data
#: at 2 keeps the momentum iteration stable and fast across count scales.
SNPR_INTERNAL_PEAK = 2.0

_NNLS_DUAL_TOL = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters shared by the iterative solvers.

    Attributes
    ----------
    lam:
        Regularization weight (lambda >= 0) on sum(c).
    mu:
        Heavy-ball momentum in [0, 1). Ignored by ``ista``.
    epsilon:
        Convergence tolerance on ||c_t - c_{t-1}||_2.
    max_iters:
        Iteration cap.
    step_c0:
        Step-size numerator: eta_t = step_c0 / sqrt(t).
    log_floor:
        Floor applied to (B c)_i inside the Poisson objective and gradient.
    paper_faithful_signs:
        Affects ``snnls`` only. True (default) uses the descent gradient
        B^T(Bc - s) + lam. False uses the alternative sign convention
        lam + B^T(s - Bc) for the momentum update — a direction that ascends
        the data-fit term; it is exposed for comparison runs and generally
        trips the divergence guard.
    """

    lam: float = 0.0
    mu: float = 0.9
    epsilon: float = 1e-6
    max_iters: int = 5000
    step_c0: float = 0.01
    log_floor: float = LOG_FLOOR
    paper_faithful_signs: bool = True

    def __post_init__(self):
        if self.lam < 0:
            raise ValidationError("lam must be nonnegative")
        if not 0.0 <= self.mu < 1.0:
            raise ValidationError("mu must lie in [0, 1)")
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be a positive integer")
        if self.step_c0 <= 0:
            raise ValidationError("step_c0 must be positive")
        if self.log_floor <= 0:
            raise ValidationError("log_floor must be positive")


@dataclass
class UnmixResult:
    """Output of one solver call.

    ``c`` is elementwise nonnegative; ``converged`` implies the last step norm
    was <= epsilon. ``last_step_norm`` and ``loss_trace`` (objective value per
    iteration, in the solver's reported-loss units) are diagnostics.
    """

    c: np.ndarray
    iterations: int
    converged: bool
    final_loss: float
    runtime_ms: float
    last_step_norm: float = float("nan")
    loss_trace: np.ndarray | None = None


def _matrix_of(B) -> np.ndarray:
    if isinstance(B, EndmemberLibrary):
        return B.matrix
    arr = np.asarray(B, dtype=float)
    if arr.ndim != 2:
        raise ValidationError("B must be an m x k matrix")
    return arr


def _vector_of(s, B, check_grid) -> np.ndarray:
    if isinstance(s, Spectrum):
        if isinstance(check_grid, EndmemberLibrary) and not s.grid.isclose(
            check_grid.grid
        ):
            raise GridMismatchError("spectrum and library are on different grids")
        arr = s.values
    else:
        arr = np.asarray(s, dtype=float)
    if arr.ndim != 1 or arr.size != _matrix_of(B).shape[0]:
        raise ValidationError("spectrum length must match library rows")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("spectrum values must be finite")
    return arr


def init_projected_ls(B, s) -> np.ndarray:
    """Unconstrained least-squares solution with negatives clamped to 0.

    Solves the normal equations (B^T B) c = B^T s and projects onto c >= 0.
    This is the shared starting point of all iterative solvers.
    """
    Bm = _matrix_of(B)
    sv = _vector_of(s, B, B)
    G = Bm.T @ Bm
    try:
        c = np.linalg.solve(G, Bm.T @ sv)
    except np.linalg.LinAlgError as exc:
        raise LibraryConditionError(
            "B^T B is singular; repair or regenerate the endmember library "
            "(two columns are linearly dependent)"
        ) from exc
    return np.maximum(c, 0.0)


def nnls(B, s, config: SolverConfig | None = None) -> UnmixResult:
    """Exact nonnegative least squares (Lawson–Hanson active set).

    Returns the global minimizer of (1/2)||s - Bc||^2 over c >= 0. The result
    satisfies the KKT conditions: the gradient component is ~0 on the active
    set (c_i > 0) and >= 0 on the inactive set. ``config`` is accepted for
    interface uniformity; only its presence/absence matters (nnls has no
    hyperparameters beyond the dual tolerance).
    """
    t0 = time.perf_counter()
    Bm = _matrix_of(B)
    sv = _vector_of(s, B, B)
    m, k = Bm.shape
    G = Bm.T @ Bm
    h = Bm.T @ sv
    passive = np.zeros(k, dtype=bool)
    c = np.zeros(k)
    outer = 0
    max_outer = 30 * k
    for _ in range(max_outer):
        w = h - G @ c
        w_masked = np.where(passive, -np.inf, w)
        j = int(np.argmax(w_masked))
        if w_masked[j] <= _NNLS_DUAL_TOL:
            break
        outer += 1
        passive[j] = True
        for _ in range(max_outer):
            idx = np.flatnonzero(passive)
            z = np.zeros(k)
            try:
                z[idx] = np.linalg.solve(G[np.ix_(idx, idx)], h[idx])
            except np.linalg.LinAlgError as exc:
                raise LibraryConditionError(
                    "singular passive-set system; repair the endmember library"
                ) from exc
            if np.all(z[idx] > 0):
                c = z
                break
            neg = idx[z[idx] <= 0]
            alpha = np.min(c[neg] / (c[neg] - z[neg]))
            c = c + alpha * (z - c)
            passive[np.abs(c) < 1e-14] = False
            c[~passive] = 0.0
    runtime_ms = (time.perf_counter() - t0) * 1e3
    return UnmixResult(
        c=c,
        iterations=outer,
        converged=True,
        final_loss=ls_loss(c, Bm, sv),
        runtime_ms=runtime_ms,
        last_step_norm=0.0,
    )


def snnls(B, s, config: SolverConfig | None = None) -> UnmixResult:
    """Heavy-ball projected gradient on (1/2)||s - Bc||^2 + lam * sum(c).

    Starts from the projected least-squares initializer with zero initial
    momentum; runs eta_t = step_c0/sqrt(t) steps until the iterate moves less
    than epsilon. Non-converged exits (guard or cap) return the lowest-loss
    iterate seen.
    """
    config = config or SolverConfig()
    t0 = time.perf_counter()
    Bm = np.asfortranarray(_matrix_of(B))
    sv = _vector_of(s, B, B)
    c0 = init_projected_ls(Bm, sv)
    trace = np.empty(config.max_iters)
    c, iters, converged, last_step, n_trace = _kernels.snnls_kernel(
        Bm,
        sv,
        c0,
        config.lam,
        config.mu,
        config.epsilon,
        config.max_iters,
        config.step_c0,
        config.paper_faithful_signs,
        trace,
    )
    runtime_ms = (time.perf_counter() - t0) * 1e3
    return UnmixResult(
        c=c,
        iterations=int(iters),
        converged=bool(converged),
        final_loss=ls_lasso_loss(c, Bm, sv, config.lam),
        runtime_ms=runtime_ms,
        last_step_norm=float(last_step),
        loss_trace=trace[:n_trace].copy(),
    )


def ista(B, s, config: SolverConfig | None = None) -> UnmixResult:
    """Iterative soft-thresholding with lam in both the step and the threshold.

    The recurrence is x = c - 2*eta*(B^T(Bc - s) + lam);
    c <- sign(x) * max(|x| - lam*eta, 0). Note the regularizer enters twice —
    once inside the gradient step and once as the threshold — so the fixed
    point is more strongly shrunk than the textbook proximal-gradient
    iteration at the same lam. Iterates may be transiently negative; the
    returned vector is projected onto c >= 0.
    """
    config = config or SolverConfig()
    t0 = time.perf_counter()
    Bm = np.asfortranarray(_matrix_of(B))
    sv = _vector_of(s, B, B)
    c0 = init_projected_ls(Bm, sv)
    trace = np.empty(config.max_iters)
    c, iters, converged, last_step, n_trace = _kernels.ista_kernel(
        Bm,
        sv,
        c0,
        config.lam,
        config.mu,
        config.epsilon,
        config.max_iters,
        config.step_c0,
        config.paper_faithful_signs,
        trace,
    )
    c = project_nonneg(c)
    runtime_ms = (time.perf_counter() - t0) * 1e3
    return UnmixResult(
        c=c,
        iterations=int(iters),
        converged=bool(converged),
        final_loss=ls_lasso_loss(c, Bm, sv, config.lam),
        runtime_ms=runtime_ms,
        last_step_norm=float(last_step),
        loss_trace=trace[:n_trace].copy(),
    )


def snpr(B, s, config: SolverConfig | None = None) -> UnmixResult:
    """Heavy-ball projected gradient on the L1-penalized Poisson objective.

    Negative measurement entries are clamped to 0 on entry (count logged). An
    all-zero spectrum returns c = 0 immediately (with lam >= 0 that is the
    optimum). Internally the spectrum is rescaled to peak
    ``SNPR_INTERNAL_PEAK`` — an exact reparameterization of the objective
    (same lam; the minimizer maps back by division) that keeps the fixed step
    schedule stable across count scales. The convergence test and the
    returned ``final_loss`` are in original units.
    """
    config = config or SolverConfig()
    t0 = time.perf_counter()
    Bm = np.asfortranarray(_matrix_of(B))
    sv = _vector_of(s, B, B)
    n_neg = int(np.count_nonzero(sv < 0))
    if n_neg:
        log.warning("snpr: clamped %d negative spectrum entries to 0", n_neg)
        sv = np.maximum(sv, 0.0)
    smax = float(sv.max()) if sv.size else 0.0
    k = Bm.shape[1]
    if smax <= 0.0:
        runtime_ms = (time.perf_counter() - t0) * 1e3
        return UnmixResult(
            c=np.zeros(k),
            iterations=0,
            converged=True,
            final_loss=poisson_nll(np.zeros(k), Bm, sv, config.lam),
            runtime_ms=runtime_ms,
            last_step_norm=0.0,
            loss_trace=np.empty(0),
        )
    alpha = SNPR_INTERNAL_PEAK / smax
    sp = alpha * sv
    c0 = init_projected_ls(Bm, sp)
    trace = np.empty(config.max_iters)
    c_scaled, iters, converged, last_step, n_trace = _kernels.snpr_kernel(
        Bm,
        sp,
        c0,
        config.lam,
        config.mu,
        config.epsilon * alpha,
        config.max_iters,
        config.step_c0,
        config.log_floor,
        trace,
    )
    c = c_scaled / alpha
    # Map the trace back to original-unit objective values:
    # L_scaled(alpha*c) = alpha * (L_orig(c) - sum(s) * log(alpha)).
    trace_orig = trace[:n_trace] / alpha + float(np.sum(sv)) * np.log(alpha)
    runtime_ms = (time.perf_counter() - t0) * 1e3
    return UnmixResult(
        c=c,
        iterations=int(iters),
        converged=bool(converged),
        final_loss=poisson_nll(c, Bm, sv, config.lam),
        runtime_ms=runtime_ms,
        last_step_norm=float(last_step) / alpha,
        loss_trace=trace_orig,
    )


ALGORITHMS = {
    "nnls": nnls,
    "snnls": snnls,
    "ista": ista,
    "snpr": snpr,
}


def solve(algorithm: str, B, s, config: SolverConfig | None = None) -> UnmixResult:
    """Dispatch a single solve by algorithm name (see ``ALGORITHMS``)."""
    try:
        fn = ALGORITHMS[algorithm]
    except KeyError:
        raise ValidationError(
            f"unknown algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}"
        ) from None
    return fn(B, s, config)


def _max_threads() -> int:
    raw = os.environ.get("UNMIX_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def unmix_batch(
    B,
    S,
    algorithm: str,
    config: SolverConfig | None = None,
    threads: int | None = None,
) -> list[UnmixResult]:
    """Unmix every spectrum in a batch; results are per-spectrum independent.

    ``S`` is an (m x n) array with one spectrum per column, or a list of
    Spectrum objects (which must share the library grid). ``threads`` defaults
    to the ``UNMIX_THREADS`` environment variable (else 1); results are
    bitwise identical regardless of thread count or batch order because each
    spectrum's solve is self-contained and RNG-free.
    """
    if algorithm not in ALGORITHMS:
        raise ValidationError(
            f"unknown algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}"
        )
    if isinstance(S, np.ndarray):
        cols = [S[:, j] for j in range(S.shape[1])] if S.ndim == 2 else [S]
    else:
        cols = list(S)
    fn = ALGORITHMS[algorithm]
    n_threads = _max_threads() if threads is None else max(1, threads)
    t0 = time.perf_counter()
    if n_threads == 1 or len(cols) <= 1:
        results = [fn(B, s, config) for s in cols]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(lambda s: fn(B, s, config), cols))
    total_ms = (time.perf_counter() - t0) * 1e3
    log.debug(
        "unmix_batch: %s on %d spectra in %.1f ms (%.3f ms/spectrum, %d threads)",
        algorithm,
        len(cols),
        total_ms,
        total_ms / max(len(cols), 1),
        n_threads,
    )
    return results
