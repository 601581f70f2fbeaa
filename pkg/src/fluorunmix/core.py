"""Core domain types, projections, loss functions, and evaluation metrics.

Everything here is a pure function over immutable values; the other modules
(solvers, simulator, noise analysis, benchmarks) are built on top of these.

Conventions used throughout the package:

* a wavelength grid is a strictly increasing, uniformly spaced vector of
  nanometer positions (default 420..730 nm, 310 samples);
* a spectrum is a length-``m`` intensity vector on such a grid;
* an endmember library is an ``m x k`` nonnegative matrix ``B`` whose columns
  are peak-normalized endmember spectra;
* an abundance vector is a nonnegative length-``k`` coefficient vector ``c``
  for the linear mixing model ``s = B c``;
* batches store one spectrum (or abundance vector) per **column**.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = [
    "DEFAULT_GRID_START",
    "DEFAULT_GRID_STOP",
    "DEFAULT_GRID_POINTS",
    "ZERO_TOL",
    "LOG_FLOOR",
    "WavelengthGrid",
    "Spectrum",
    "EndmemberLibrary",
    "AbundanceVector",
    "MetricsReport",
    "default_grid",
    "project_nonneg",
    "soft_threshold",
    "ls_loss",
    "ls_lasso_loss",
    "poisson_nll",
    "grad_ls_lasso",
    "grad_poisson_nll",
    "sam_cosine",
    "reconstruction_mse",
    "abundance_mse",
    "count_false_positives",
    "l0_counts",
]

DEFAULT_GRID_START = 420.0
DEFAULT_GRID_STOP = 730.0
DEFAULT_GRID_POINTS = 310

#: Abundance entries above this count as "nonzero" for sparsity metrics.
#: Projection produces exact zeros, but gradient iterates can stall at tiny
#: positives; typical abundances are 0.01-1 so 1e-6 is far below signal.
ZERO_TOL = 1e-6

#: Floor applied to (B c)_i inside logarithms of the Poisson objective, which
#: otherwise has a pole at (B c)_i = 0 with s_i > 0.
LOG_FLOOR = 1e-12

_GRID_UNIFORMITY_RTOL = 1e-9


def _as_float_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class WavelengthGrid:
    """Strictly increasing, uniformly spaced sampling wavelengths in nm."""

    wavelengths: np.ndarray

    def __post_init__(self):
        w = _as_float_vector(self.wavelengths, "wavelengths")
        object.__setattr__(self, "wavelengths", w)
        if w.size < 2:
            raise ValidationError("a wavelength grid needs at least 2 points")
        if not np.all(np.isfinite(w)):
            raise ValidationError("wavelengths must be finite")
        d = np.diff(w)
        if not np.all(d > 0):
            raise ValidationError("wavelengths must be strictly increasing")
        span = w[-1] - w[0]
        if np.max(np.abs(d - d[0])) > _GRID_UNIFORMITY_RTOL * span:
            raise ValidationError("wavelength spacing must be uniform")

    def __len__(self) -> int:
        return int(self.wavelengths.size)

    @property
    def spacing(self) -> float:
        return float(self.wavelengths[1] - self.wavelengths[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, WavelengthGrid):
            return NotImplemented
        return self.wavelengths.shape == other.wavelengths.shape and bool(
            np.array_equal(self.wavelengths, other.wavelengths)
        )

    def __hash__(self):
        return hash((float(self.wavelengths[0]), float(self.wavelengths[-1]), len(self)))

    def isclose(self, other: "WavelengthGrid", tol: float = 1e-9) -> bool:
        return len(self) == len(other) and bool(
            np.allclose(self.wavelengths, other.wavelengths, rtol=0.0, atol=tol)
        )


def default_grid() -> WavelengthGrid:
    """The default 420..730 nm grid with 310 samples (~1.003 nm spacing)."""
    return WavelengthGrid(
        np.linspace(DEFAULT_GRID_START, DEFAULT_GRID_STOP, DEFAULT_GRID_POINTS)
    )


@dataclass(frozen=True)
class Spectrum:
    """An intensity vector on a wavelength grid.

    Measured or residual spectra may dip slightly negative (e.g. after dark
    subtraction); simulated and reconstructed spectra are nonnegative.
    """

    grid: WavelengthGrid
    values: np.ndarray

    def __post_init__(self):
        v = _as_float_vector(self.values, "values")
        object.__setattr__(self, "values", v)
        if v.size != len(self.grid):
            raise ValidationError(
                f"spectrum has {v.size} values but grid has {len(self.grid)} points"
            )
        if not np.all(np.isfinite(v)):
            raise ValidationError("spectrum values must be finite")


@dataclass(frozen=True)
class EndmemberLibrary:
    """A named, peak-normalized endmember matrix ``B`` (shape m x k)."""

    grid: WavelengthGrid
    names: tuple
    matrix: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", B)
        names = tuple(str(n) for n in self.names)
        object.__setattr__(self, "names", names)
        if B.ndim != 2:
            raise ValidationError("library matrix must be 2-D (m x k)")
        m, k = B.shape
        if k < 1:
            raise ValidationError("a library needs at least one endmember")
        if len(names) != k:
            raise ValidationError(f"{len(names)} names for {k} columns")
        if len(set(names)) != k:
            raise ValidationError("endmember names must be unique")
        if m != len(self.grid):
            raise ValidationError("library rows must match grid length")
        if not np.all(np.isfinite(B)):
            raise ValidationError("library entries must be finite")
        if np.any(B < 0):
            raise ValidationError("library entries must be nonnegative")
        peaks = B.max(axis=0)
        if np.max(np.abs(peaks - 1.0)) > 1e-12:
            raise ValidationError("every library column must be peak-normalized to 1")

    @property
    def m(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def k(self) -> int:
        return int(self.matrix.shape[1])


@dataclass(frozen=True)
class AbundanceVector:
    """A nonnegative coefficient vector with sparsity semantics."""

    values: np.ndarray
    zero_tol: float = ZERO_TOL

    def __post_init__(self):
        v = _as_float_vector(self.values, "values")
        object.__setattr__(self, "values", v)
        if not np.all(np.isfinite(v)):
            raise ValidationError("abundances must be finite")
        if np.any(v < 0):
            raise ValidationError("abundances must be nonnegative")
        if self.zero_tol < 0:
            raise ValidationError("zero_tol must be nonnegative")

    @property
    def l0(self) -> int:
        """Number of entries greater than ``zero_tol``."""
        return int(np.count_nonzero(self.values > self.zero_tol))


@dataclass
class MetricsReport:
    """Batch evaluation metrics for an unmixing run."""

    reconstruction_mse: float
    sam_cosine: float
    l0_mean: float
    runtime_per_spectrum_ms: float
    abundance_mse: float | None = None
    false_positives: int | None = None

    def __post_init__(self):
        if not -1.0 <= self.sam_cosine <= 1.0 + 1e-12:
            raise ValidationError("sam_cosine must lie in [-1, 1]")
        for name in ("reconstruction_mse", "abundance_mse"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValidationError(f"{name} must be nonnegative")


# ---------------------------------------------------------------------------
# projections


def project_nonneg(x) -> np.ndarray:
    """Replace all negative entries with 0 (projection onto the nonnegative orthant)."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("project_nonneg requires finite input")
    return np.maximum(arr, 0.0)


def soft_threshold(x, tau: float) -> np.ndarray:
    """Shrink each entry toward 0 by ``tau``: sign(x_i) * max(|x_i| - tau, 0)."""
    if tau < 0:
        raise ValidationError("soft_threshold requires tau >= 0")
    arr = np.asarray(x, dtype=float)
    return np.sign(arr) * np.maximum(np.abs(arr) - tau, 0.0)


# ---------------------------------------------------------------------------
# losses and gradients


def _check_problem(c, B, s):
    c = np.asarray(c, dtype=float)
    B = np.asarray(B, dtype=float)
    s = np.asarray(s, dtype=float)
    if B.ndim != 2:
        raise ValidationError("B must be 2-D")
    m, k = B.shape
    if c.shape != (k,):
        raise ValidationError(f"c has shape {c.shape}, expected ({k},)")
    if s.shape != (m,):
        raise ValidationError(f"s has shape {s.shape}, expected ({m},)")
    return c, B, s


def ls_loss(c, B, s) -> float:
    """Half squared reconstruction error: (1/2) * ||s - B c||^2."""
    c, B, s = _check_problem(c, B, s)
    r = s - B @ c
    return 0.5 * float(r @ r)


def ls_lasso_loss(c, B, s, lam: float) -> float:
    """L1-regularized least squares for nonnegative c: (1/2)||s - Bc||^2 + lam * sum(c).

    Under the nonnegativity constraint the L1 norm reduces to a plain sum.
    """
    if lam < 0:
        raise ValidationError("lambda must be nonnegative")
    c, B, s = _check_problem(c, B, s)
    if np.any(c < 0):
        raise ValidationError("ls_lasso_loss requires c >= 0")
    return ls_loss(c, B, s) + lam * float(np.sum(c))


def poisson_nll(c, B, s, lam: float) -> float:
    """Poisson negative log-likelihood with L1 penalty.

    Returns ``sum(Bc) - s . log(Bc) + lam * sum(c)`` with ``(Bc)_i`` floored at
    ``LOG_FLOOR`` inside the log, and the convention ``s_i * log(.) = 0`` where
    ``s_i = 0``.
    """
    if lam < 0:
        raise ValidationError("lambda must be nonnegative")
    c, B, s = _check_problem(c, B, s)
    if np.any(c < 0):
        raise ValidationError("poisson_nll requires c >= 0")
    if np.any(s < 0):
        raise ValidationError("poisson_nll requires s >= 0")
    d = B @ c
    logged = np.log(np.maximum(d, LOG_FLOOR))
    log_term = float(np.sum(np.where(s > 0, s * logged, 0.0)))
    return float(np.sum(d)) - log_term + lam * float(np.sum(c))


def grad_ls_lasso(c, B, s, lam: float) -> np.ndarray:
    """Gradient of ``ls_lasso_loss`` in c: B^T (B c - s) + lam * 1."""
    c, B, s = _check_problem(c, B, s)
    return B.T @ (B @ c - s) + lam


def grad_poisson_nll(c, B, s, lam: float) -> np.ndarray:
    """Gradient of ``poisson_nll`` in c: B^T 1 - B^T (s / (B c)) + lam * 1.

    ``(B c)_i`` is floored at ``LOG_FLOOR``, matching the loss.
    """
    c, B, s = _check_problem(c, B, s)
    d = np.maximum(B @ c, LOG_FLOOR)
    return B.sum(axis=0) - B.T @ (s / d) + lam


# ---------------------------------------------------------------------------
# metrics


def sam_cosine(s, s_hat) -> float:
    """Spectral-angle cosine between two spectra treated as vectors.

    1 means identical direction; scale-invariant. Raises on zero-norm input
    (an empty spectrum has no direction).
    """
    a = np.asarray(getattr(s, "values", s), dtype=float)
    b = np.asarray(getattr(s_hat, "values", s_hat), dtype=float)
    if a.shape != b.shape:
        raise ValidationError("sam_cosine requires equal-length spectra")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValidationError("sam_cosine is undefined for zero-norm spectra")
    return float(a @ b) / (na * nb)


def _as_batch(X, rows: str) -> np.ndarray:
    """Accept an (rows x n) array or a list of vectors/Spectrum; return columns."""
    if isinstance(X, np.ndarray):
        arr = np.asarray(X, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        return arr
    cols = [np.asarray(getattr(x, "values", x), dtype=float) for x in X]
    if not cols:
        raise ValidationError(f"empty {rows} batch")
    return np.column_stack(cols)


def reconstruction_mse(S, B, C) -> float:
    """Mean over spectra of the squared L2 reconstruction error ||B c_i - s_i||^2."""
    S = _as_batch(S, "spectrum")
    C = _as_batch(C, "abundance")
    B = np.asarray(B, dtype=float)
    if S.shape[1] == 0:
        raise ValidationError("reconstruction_mse requires a non-empty batch")
    if S.shape[1] != C.shape[1]:
        raise ValidationError("batch sizes differ")
    if B.shape != (S.shape[0], C.shape[0]):
        raise ValidationError("library shape incompatible with batches")
    R = B @ C - S
    return float(np.mean(np.sum(R * R, axis=0)))


def abundance_mse(C_hat, C_0) -> float:
    """Mean over the batch of ||c_hat_i - c0_i||^2."""
    A = _as_batch(C_hat, "abundance")
    T = _as_batch(C_0, "abundance")
    if A.shape != T.shape:
        raise ValidationError(f"shape mismatch: {A.shape} vs {T.shape}")
    D = A - T
    return float(np.mean(np.sum(D * D, axis=0)))


def count_false_positives(C_hat, C_0, zero_tol: float = ZERO_TOL) -> int:
    """Count entries assigned > ``zero_tol`` where the ground truth is exactly 0."""
    A = _as_batch(C_hat, "abundance")
    T = _as_batch(C_0, "abundance")
    if A.shape != T.shape:
        raise ValidationError(f"shape mismatch: {A.shape} vs {T.shape}")
    return int(np.count_nonzero((T == 0.0) & (A > zero_tol)))


def l0_counts(C, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """Per-column count of entries greater than ``zero_tol``."""
    A = _as_batch(C, "abundance")
    return np.count_nonzero(A > zero_tol, axis=0)
