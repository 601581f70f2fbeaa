"""Sparse spectral unmixing of fluorescence spectra.

Linear-mixing solvers (NNLS, sparse heavy-ball NNLS, ISTA, sparse Poisson
regression), a Poisson-noise spectrum simulator with ground-truth abundances,
a noise-distribution analysis pipeline, and a benchmark harness, all behind
a deterministic CLI (``fluorunmix``).
"""

from __future__ import annotations

__version__ = "0.1.0"

from .core import (
    LOG_FLOOR,
    ZERO_TOL,
    AbundanceVector,
    EndmemberLibrary,
    MetricsReport,
    Spectrum,
    WavelengthGrid,
    abundance_mse,
    count_false_positives,
    default_grid,
    grad_ls_lasso,
    grad_poisson_nll,
    l0_counts,
    ls_lasso_loss,
    ls_loss,
    poisson_nll,
    project_nonneg,
    reconstruction_mse,
    sam_cosine,
    soft_threshold,
)
from .errors import (
    BenchCheckError,
    DataFormatError,
    FluorUnmixError,
    GridMismatchError,
    LibraryConditionError,
    ValidationError,
)
from .library import (
    DEFAULT_ENDMEMBER_NAMES,
    export_library,
    load_library,
    load_library_with_diagnostics,
    resample,
    synthetic_default_library,
)
from .simulate import (
    AbundanceStats,
    SimulationConfig,
    SimulationResult,
    add_poisson_like_noise,
    default_abundance_stats,
    sample_abundances,
    savgol_smooth,
    simulate,
    synthesize_clean,
)
from .solvers import (
    ALGORITHMS,
    SolverConfig,
    UnmixResult,
    init_projected_ls,
    ista,
    nnls,
    snnls,
    snpr,
    solve,
    unmix_batch,
)
from .noise import (
    NoiseReport,
    analyze_noise,
    highpass_residual,
    kl_divergence_binned,
    mean_variance_regression,
    noise_moments,
)
from .bench import (
    BenchConfig,
    BenchRow,
    abundance_statistics,
    check_benchmark,
    default_bench_corpus,
    run_benchmark,
)

__all__ = [
    "__version__",
    # core types and ops
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
    "ZERO_TOL",
    "LOG_FLOOR",
    # errors
    "FluorUnmixError",
    "ValidationError",
    "DataFormatError",
    "GridMismatchError",
    "LibraryConditionError",
    "BenchCheckError",
    # library
    "DEFAULT_ENDMEMBER_NAMES",
    "synthetic_default_library",
    "load_library",
    "load_library_with_diagnostics",
    "export_library",
    "resample",
    # simulator
    "AbundanceStats",
    "SimulationConfig",
    "SimulationResult",
    "default_abundance_stats",
    "sample_abundances",
    "synthesize_clean",
    "add_poisson_like_noise",
    "savgol_smooth",
    "simulate",
    # solvers
    "SolverConfig",
    "UnmixResult",
    "ALGORITHMS",
    "init_projected_ls",
    "nnls",
    "snnls",
    "ista",
    "snpr",
    "solve",
    "unmix_batch",
    # noise analysis
    "NoiseReport",
    "highpass_residual",
    "noise_moments",
    "mean_variance_regression",
    "kl_divergence_binned",
    "analyze_noise",
    # benchmark
    "BenchConfig",
    "BenchRow",
    "default_bench_corpus",
    "run_benchmark",
    "check_benchmark",
    "abundance_statistics",
]
