"""Synthetic fluorescence-spectrum generator with known ground truth.

Six-step pipeline per spectrum:

1. take per-endmember Normal(mean_j, std_j^2) abundance distributions,
2. sample one abundance vector,
3. zero every entry below the sparsity threshold ``t``,
4. form the clean spectrum ``s = B c``,
5. add photon-count noise — Normal with variance equal to the count value —
   at the configured count scale,
6. smooth with a Savitzky–Golay filter.

Abundances are order-1 ("arbitrary units"); photon-count noise needs count
magnitudes, so the clean spectrum is multiplied by ``intensity_scale`` before
noise and divided back after. Every spectrum gets its own RNG substream
derived from (seed, spectrum index), so generation is deterministic and
parallelizable.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import EndmemberLibrary, WavelengthGrid
from .errors import ValidationError

__all__ = [
    "DEFAULT_ABUNDANCE_MEANS",
    "DEFAULT_ABUNDANCE_STDS",
    "AbundanceStats",
    "SimulationConfig",
    "SimulationResult",
    "sample_abundances",
    "synthesize_clean",
    "add_poisson_like_noise",
    "savgol_coefficients",
    "savgol_smooth",
    "simulate",
]

#: Default per-endmember abundance statistics (order matches the default
#: library: PpIX634, PpIX620, Lipofuscin, Flavins, NADH, FAD, Collagen,
#: Elastin, Melanin).
DEFAULT_ABUNDANCE_MEANS = (0.422, 0.099, 0.234, 0.011, 0.010, 0.001, 0.186, 0.018, 0.019)
DEFAULT_ABUNDANCE_STDS = (0.328, 0.105, 0.251, 0.027, 0.055, 0.008, 0.143, 0.062, 0.050)


@dataclass(frozen=True)
class AbundanceStats:
    """Per-endmember Normal distribution parameters for ground-truth sampling."""

    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        stds = np.asarray(self.stds, dtype=float)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)
        if means.ndim != 1 or stds.shape != means.shape:
            raise ValidationError("means and stds must be equal-length vectors")
        if np.any(stds < 0):
            raise ValidationError("stds must be nonnegative")

    @property
    def k(self) -> int:
        return int(self.means.size)


def default_abundance_stats() -> AbundanceStats:
    return AbundanceStats(
        means=np.array(DEFAULT_ABUNDANCE_MEANS), stds=np.array(DEFAULT_ABUNDANCE_STDS)
    )


@dataclass(frozen=True)
class SimulationConfig:
    """Parameters of the simulated corpus.

    ``smoothing_window = 1`` (with ``smoothing_order = 0``) disables smoothing
    (identity filter). ``intensity_scale = 0`` disables noise entirely (clean
    passthrough); otherwise it is the photon-count value of unit abundance.
    ``noise_mode`` is ``"zero_mean"`` (noisy value has mean equal to the clean
    value; the Gaussian approximation of Poisson counts) or ``"literal"``
    (noise itself has mean equal to the clean value, doubling the signal —
    kept for comparison runs).
    """

    n: int
    seed: int = 0
    threshold: float = 0.15
    stats: AbundanceStats = field(default_factory=default_abundance_stats)
    smoothing_window: int = 9
    smoothing_order: int = 3
    clamp_negative_noise: bool = True
    intensity_scale: float = 1e4
    noise_mode: str = "zero_mean"

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("n must be a positive integer")
        if self.threshold < 0:
            raise ValidationError("threshold must be nonnegative")
        if self.smoothing_window < 1 or self.smoothing_window % 2 == 0:
            raise ValidationError("smoothing_window must be a positive odd integer")
        if not 0 <= self.smoothing_order < self.smoothing_window:
            raise ValidationError("smoothing_order must satisfy 0 <= order < window")
        if self.intensity_scale < 0:
            raise ValidationError("intensity_scale must be nonnegative")
        if self.noise_mode not in ("zero_mean", "literal"):
            raise ValidationError("noise_mode must be 'zero_mean' or 'literal'")


@dataclass(frozen=True)
class SimulationResult:
    """Simulated spectra (one per column, abundance units) with ground truth."""

    grid: WavelengthGrid
    spectra: np.ndarray
    truth: np.ndarray
    config: SimulationConfig


def _spectrum_rng(seed: int, j: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(j,)))


def sample_abundances(
    config: SimulationConfig, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Sample the ground-truth abundance matrix C0 (k x n).

    Each column is drawn i.i.d. Normal(mean_j, std_j^2) per endmember, then
    entries below ``threshold`` are set to 0 (every survivor is >= threshold,
    so no negatives survive). With ``rng=None`` each column uses the
    per-spectrum substream derived from ``config.seed``, which makes this
    function reproduce exactly the truth matrix of ``simulate``.
    """
    stats = config.stats
    C0 = np.empty((stats.k, config.n))
    for j in range(config.n):
        g = rng if rng is not None else _spectrum_rng(config.seed, j)
        c = g.normal(stats.means, stats.stds)
        c[c < config.threshold] = 0.0
        C0[:, j] = c
    return C0


def synthesize_clean(B, C0) -> np.ndarray:
    """Exact linear mixing: S = B @ C0 (columns are clean spectra)."""
    Bm = B.matrix if isinstance(B, EndmemberLibrary) else np.asarray(B, dtype=float)
    C0 = np.asarray(C0, dtype=float)
    if C0.ndim != 2 or Bm.shape[1] != C0.shape[0]:
        raise ValidationError(
            f"abundance matrix shape {C0.shape} incompatible with library {Bm.shape}"
        )
    return Bm @ C0


def _noisy_counts(
    x: np.ndarray, rng: np.random.Generator, clamp: bool, mode: str
) -> np.ndarray:
    """Apply count noise to a nonnegative count-scale array.

    ``zero_mean``: y = x + Normal(0, x). ``literal``: y = x + Normal(x, x),
    i.e. the noise term itself has mean x. Zero-count entries get zero noise
    in both modes.
    """
    scale = np.sqrt(np.maximum(x, 0.0))
    shift = x if mode == "literal" else 0.0
    y = x + shift + rng.normal(0.0, 1.0, size=x.shape) * scale
    # normal(loc, scale) is drawn as loc + scale*z so zero-scale entries are
    # exact; the explicit form keeps that property visible.
    if clamp:
        y = np.maximum(y, 0.0)
    return y


def add_poisson_like_noise(
    S, rng: np.random.Generator, clamp: bool = True, mode: str = "zero_mean"
) -> np.ndarray:
    """Add count noise (variance = value) to a nonnegative count-scale batch."""
    S = np.asarray(S, dtype=float)
    if np.any(S < 0):
        raise ValidationError("add_poisson_like_noise requires S >= 0")
    if mode not in ("zero_mean", "literal"):
        raise ValidationError("mode must be 'zero_mean' or 'literal'")
    return _noisy_counts(S, rng, clamp, mode)


def savgol_coefficients(window: int, order: int) -> np.ndarray:
    """Central Savitzky–Golay smoothing coefficients for an interior point.

    Least-squares fit of a degree-``order`` polynomial on the symmetric
    window, evaluated at its center (row 0 of the design pseudoinverse).
    """
    if window < 1 or window % 2 == 0:
        raise ValidationError("window must be a positive odd integer")
    if not 0 <= order < window:
        raise ValidationError("order must satisfy 0 <= order < window")
    half = window // 2
    x = np.arange(-half, half + 1, dtype=float)
    design = np.vander(x, order + 1, increasing=True)
    return np.linalg.pinv(design)[0]


def savgol_smooth(values, window: int, order: int) -> np.ndarray:
    """Savitzky–Golay smoothing along axis 0 (columns are spectra).

    Interior points use the standard central convolution; each edge point is
    refit on its truncated one-sided window (order reduced to the available
    point count minus one if needed) and evaluated in place. ``window = 1``
    is the identity.
    """
    S = np.asarray(values, dtype=float)
    squeeze = S.ndim == 1
    if squeeze:
        S = S[:, None]
    m = S.shape[0]
    if window > m:
        raise ValidationError("window must not exceed the spectrum length")
    if window == 1:
        out = S.copy()
        return out[:, 0] if squeeze else out
    ker = savgol_coefficients(window, order)
    half = window // 2
    out = np.empty_like(S)
    for col in range(S.shape[1]):
        out[half : m - half, col] = np.correlate(S[:, col], ker[::-1], mode="valid")
    for i in list(range(half)) + list(range(m - half, m)):
        lo, hi = max(0, i - half), min(m, i + half + 1)
        xs = np.arange(lo, hi, dtype=float) - i
        o = min(order, len(xs) - 1)
        w = np.linalg.pinv(np.vander(xs, o + 1, increasing=True))[0]
        out[i, :] = w @ S[lo:hi, :]
    return out[:, 0] if squeeze else out


def simulate(B: EndmemberLibrary, config: SimulationConfig) -> SimulationResult:
    """Run the full six-step pipeline; deterministic given the seed.

    Spectrum ``j`` draws its abundance normals and then its noise normals from
    one substream seeded by (seed, j), so any column can be regenerated
    independently and thread count cannot change the output.
    """
    if isinstance(B, EndmemberLibrary):
        Bm, grid = B.matrix, B.grid
    else:
        raise ValidationError("simulate requires an EndmemberLibrary")
    if config.stats.k != Bm.shape[1]:
        raise ValidationError(
            f"stats have {config.stats.k} endmembers, library has {Bm.shape[1]}"
        )
    stats = config.stats
    K = config.intensity_scale
    m, n = Bm.shape[0], config.n
    S = np.empty((m, n))
    C0 = np.empty((stats.k, n))
    for j in range(n):
        g = _spectrum_rng(config.seed, j)
        c = g.normal(stats.means, stats.stds)
        c[c < config.threshold] = 0.0
        C0[:, j] = c
        clean = Bm @ c
        if K == 0:
            S[:, j] = clean
        else:
            counts = _noisy_counts(
                clean * K, g, config.clamp_negative_noise, config.noise_mode
            )
            S[:, j] = counts / K
    S = savgol_smooth(S, config.smoothing_window, config.smoothing_order)
    return SimulationResult(grid=grid, spectra=S, truth=C0, config=config)
