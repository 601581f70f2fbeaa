"""Noise-distribution analysis for repeated-acquisition spectrum batches.

Pipeline: isolate the noise at each wavelength with a zero-phase DFT
high-pass filter, regress the per-wavelength noise variance on the signal
mean, and compare the per-wavelength empirical noise distributions against
two Gaussian models — one with variance equal to the mean (photon-count
statistics) and one with a single pooled constant variance — via discrete,
binned KL divergence.

Two corrections keep the statistics faithful to the underlying counts:

* the high-pass mask keeps a fraction ``rho`` of the DFT bins, which scales
  white-noise variance by ``rho``; measured variances are divided by ``rho``;
* any residual mean at a wavelength is deterministic clean-signal leakage
  through the filter, not noise, so KL samples are re-centered per
  wavelength before being shifted onto the model mean.

The analysis is meaningful at photon-count scale (the variance-equals-mean
model is not scale invariant); convert normalized spectra back to counts
before calling ``analyze_noise``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "NoiseReport",
    "highpass_residual",
    "passband_fraction",
    "noise_moments",
    "mean_variance_regression",
    "kl_discrete",
    "kl_divergence_binned",
    "analyze_noise",
]

DEFAULT_CUTOFF = 0.1
DEFAULT_BINS = 50
_KL_SMOOTHING = 1e-12


@dataclass
class NoiseReport:
    """Per-wavelength noise statistics and model comparison results."""

    mean: np.ndarray
    variance: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    correlation: float
    kl_poisson_model: np.ndarray
    kl_constant_model: np.ndarray
    mean_kl_poisson: float
    mean_kl_constant: float
    cutoff: float


def _passband_mask(m: int, cutoff: float) -> np.ndarray:
    if not 0.0 < cutoff <= 0.5:
        raise ValidationError("cutoff must lie in (0, 0.5]")
    bins = np.arange(m)
    rel = np.minimum(bins, m - bins) / m
    return rel >= cutoff


def passband_fraction(m: int, cutoff: float) -> float:
    """Fraction of DFT bins kept by the high-pass mask (the factor by which
    white-noise variance is scaled after filtering)."""
    return float(np.count_nonzero(_passband_mask(m, cutoff))) / m


def highpass_residual(values, cutoff: float = DEFAULT_CUTOFF) -> np.ndarray:
    """Zero-phase spectral-mask high-pass along axis 0.

    Forward DFT, zero every bin whose relative frequency (bin index / m,
    mirrored above m/2) is below ``cutoff``, inverse DFT, real part. Linear
    and idempotent; removes DC so the output mean is ~0.
    """
    S = np.asarray(values, dtype=float)
    squeeze = S.ndim == 1
    if squeeze:
        S = S[:, None]
    m = S.shape[0]
    if m < 8:
        raise ValidationError("highpass_residual needs at least 8 samples")
    mask = _passband_mask(m, cutoff)
    F = np.fft.fft(S, axis=0)
    F[~mask, :] = 0.0
    R = np.real(np.fft.ifft(F, axis=0))
    return R[:, 0] if squeeze else R


def noise_moments(residuals) -> tuple[np.ndarray, np.ndarray]:
    """Per-wavelength sample mean and unbiased sample variance across a batch.

    ``residuals`` is (m x n) with one spectrum per column; needs n >= 2.
    """
    R = np.asarray(residuals, dtype=float)
    if R.ndim != 2 or R.shape[1] < 2:
        raise ValidationError("noise_moments needs an (m x n) batch with n >= 2")
    return R.mean(axis=1), R.var(axis=1, ddof=1)


def mean_variance_regression(
    signal_means, noise_variances
) -> tuple[float, float, float, float]:
    """OLS line of variance on mean: returns (slope, intercept, r^2, correlation)."""
    x = np.asarray(signal_means, dtype=float)
    y = np.asarray(noise_variances, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 3:
        raise ValidationError("regression needs >= 3 paired points")
    if np.ptp(x) == 0.0:
        raise ValidationError("regression is degenerate: all means identical")
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    sy = float(np.std(y))
    correlation = (
        0.0
        if sy == 0.0
        else float(np.mean((x - x.mean()) * (y - y.mean())) / (np.std(x) * sy))
    )
    return float(slope), float(intercept), float(r_squared), correlation


def kl_discrete(p, q) -> float:
    """Discrete KL divergence sum(p * ln(p/q)) with additive 1e-12 smoothing."""
    p = np.asarray(p, dtype=float) + _KL_SMOOTHING
    q = np.asarray(q, dtype=float) + _KL_SMOOTHING
    return float(np.sum(p * np.log(p / q)))


def _gaussian_bin_probs(edges: np.ndarray, mu: float, var: float) -> np.ndarray:
    sigma = math.sqrt(max(var, 1e-300))
    z = (edges - mu) / (sigma * math.sqrt(2.0))
    cdf = 0.5 * (1.0 + np.vectorize(math.erf)(z))
    return np.diff(cdf)


def kl_divergence_binned(
    samples, mu: float, var: float, bins: int = DEFAULT_BINS
) -> float:
    """KL divergence of an empirical sample against a Gaussian(mu, var) model.

    Histograms the samples into ``bins`` equal-width bins spanning
    [min, max], integrates the model density over each bin, smooths both
    distributions additively by 1e-12, and returns sum(p * ln(p/q)).
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 100:
        raise ValidationError("kl_divergence_binned needs >= 100 samples")
    if bins < 10:
        raise ValidationError("kl_divergence_binned needs >= 10 bins")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        raise ValidationError("degenerate sample support (min == max)")
    counts, edges = np.histogram(x, bins=bins, range=(lo, hi))
    p = counts / counts.sum()
    q = _gaussian_bin_probs(edges, mu, var)
    return kl_discrete(p, q)


def analyze_noise(S, cutoff: float = DEFAULT_CUTOFF, bins: int = DEFAULT_BINS) -> NoiseReport:
    """Full noise study of a repeated-acquisition batch (m x n, count scale).

    Per wavelength: ``mean`` is the average magnitude of the pre-filter
    spectra; ``variance`` is the filtered-residual variance corrected for the
    filter passband fraction. The constant-variance model uses the average of
    the per-wavelength variances; the photon-count model uses variance equal
    to the wavelength's mean. KL divergences are computed per wavelength over
    the re-centered residual samples.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[1] < 100:
        raise ValidationError("analyze_noise needs an (m x n) batch with n >= 100")
    m = S.shape[0]
    rho = passband_fraction(m, cutoff)
    mu = np.mean(np.abs(S), axis=1)
    R = highpass_residual(S, cutoff)
    _, var_raw = noise_moments(R)
    variance = var_raw / rho
    slope, intercept, r_squared, correlation = mean_variance_regression(mu, variance)
    v_bar = float(variance.mean())
    centered = (R - R.mean(axis=1, keepdims=True)) / math.sqrt(rho)
    kl_poisson = np.empty(m)
    kl_constant = np.empty(m)
    for w in range(m):
        samples = mu[w] + centered[w]
        kl_poisson[w] = kl_divergence_binned(samples, mu[w], mu[w], bins)
        kl_constant[w] = kl_divergence_binned(samples, mu[w], v_bar, bins)
    return NoiseReport(
        mean=mu,
        variance=variance,
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        correlation=correlation,
        kl_poisson_model=kl_poisson,
        kl_constant_model=kl_constant,
        mean_kl_poisson=float(kl_poisson.mean()),
        mean_kl_constant=float(kl_constant.mean()),
        cutoff=cutoff,
    )
