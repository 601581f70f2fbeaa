"""Command-line front end: library / simulate / unmix / noise / bench / plot.

Exit codes are a stable contract:

* 0 — success
* 1 — a ``--check`` benchmark ordering failed
* 2 — OS-level I/O failure (missing file, unwritable output)
* 3 — validation failure (bad flags, malformed file contents, bad config)
* 4 — wavelength-grid mismatch without ``--resample``

Every artifact is deterministic given flags + seed (runtime diagnostics are
the only machine-dependent outputs, and they are isolated under a single
``runtime`` key or column so consumers can strip them). Provenance JSON with
the library content hash accompanies generated data so results stay
attributable to an exact basis.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import BenchConfig, BenchRow, check_benchmark, default_bench_corpus, run_benchmark
from .core import WavelengthGrid, default_grid
from .dataio import (
    matrix_sha256,
    read_columns_csv,
    spectrum_column_names,
    write_columns_csv,
    write_json,
    write_row_table_csv,
)
from .errors import (
    DataFormatError,
    FluorUnmixError,
    GridMismatchError,
    ValidationError,
)
from .library import (
    export_library,
    library_condition_number,
    load_library_with_diagnostics,
    max_pairwise_cosine,
    synthetic_default_library,
)
from .noise import analyze_noise, mean_variance_regression
from .plots import render_line_chart, render_scatter_chart
from .simulate import SimulationConfig, simulate
from .solvers import ALGORITHMS, SolverConfig, unmix_batch

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_GRID = 4

_NOISE_STAT_COLUMNS = ["mean", "variance", "kl_poisson_model", "kl_constant_model"]
_BENCH_CSV_HEADER = [
    "algorithm",
    "lambda",
    "reconstruction_mse_mean",
    "reconstruction_mse_std",
    "abundance_mse_mean",
    "abundance_mse_std",
    "false_positives",
    "l0_mean",
    "sam_mean",
    "sam_std",
    "runtime_per_spectrum_ms",
    "failures",
    "flagged",
]


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose parse failures use the validation exit code (3)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _grid_payload(grid: WavelengthGrid) -> dict:
    w = grid.wavelengths
    return {"start_nm": float(w[0]), "stop_nm": float(w[-1]), "points": int(w.size)}


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_or_default_library(args, target_grid: WavelengthGrid | None = None):
    """Library from --library (validated CSV) or the synthetic default.

    With a ``target_grid``: the synthetic default is built directly on it; a
    CSV library is resampled onto it only when --resample was passed, else a
    differing grid raises GridMismatchError.
    """
    if args.library is None:
        return synthetic_default_library(target_grid)
    resample_to = target_grid if getattr(args, "resample", False) else None
    lib, diags = load_library_with_diagnostics(args.library, resample_to)
    if diags.clamped:
        print(
            f"note: clamped {diags.clamped} negative entries in {args.library}",
            file=sys.stderr,
        )
    if target_grid is not None and not lib.grid.isclose(target_grid):
        raise GridMismatchError(
            "library and spectra wavelength grids differ; pass --resample to "
            "interpolate the library onto the spectra grid"
        )
    return lib


def cmd_library(args) -> int:
    out = _outdir(args)
    lib = _load_or_default_library(args)
    export_library(lib, out / "library.csv")
    write_json(
        out / "meta.json",
        {
            "version": __version__,
            "names": list(lib.names),
            "grid": _grid_payload(lib.grid),
            "library_sha256": matrix_sha256(lib.matrix),
            "condition_number": library_condition_number(lib),
            "max_pairwise_cosine": max_pairwise_cosine(lib),
        },
    )
    print(out / "library.csv")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = SimulationConfig(
        n=args.n,
        seed=args.seed,
        intensity_scale=args.scale if args.scale is not None else 1e4,
        noise_mode="literal" if args.literal_noise else "zero_mean",
    )
    lib = _load_or_default_library(args)
    out = _outdir(args)
    result = simulate(lib, config)
    ids = spectrum_column_names(config.n)
    write_columns_csv(out / "spectra.csv", lib.grid.wavelengths, ids, result.spectra)
    write_row_table_csv(out / "truth.csv", "spectrum_id", ids, lib.names, result.truth.T)
    write_json(
        out / "meta.json",
        {
            "version": __version__,
            "command": "simulate",
            "config": {
                "n": config.n,
                "seed": config.seed,
                "threshold": config.threshold,
                "abundance_means": [float(v) for v in config.stats.means],
                "abundance_stds": [float(v) for v in config.stats.stds],
                "smoothing_window": config.smoothing_window,
                "smoothing_order": config.smoothing_order,
                "clamp_negative_noise": config.clamp_negative_noise,
                "intensity_scale": config.intensity_scale,
                "noise_mode": config.noise_mode,
            },
            "grid": _grid_payload(lib.grid),
            "library_sha256": matrix_sha256(lib.matrix),
        },
    )
    for name in ("spectra.csv", "truth.csv", "meta.json"):
        print(out / name)
    return EXIT_OK


def cmd_unmix(args) -> int:
    wavelengths, ids, S = read_columns_csv(args.spectra, "wavelength_nm")
    grid = WavelengthGrid(wavelengths)
    lib = _load_or_default_library(args, target_grid=grid)
    config = SolverConfig(
        lam=args.lam,
        mu=args.mu,
        epsilon=args.eps,
        max_iters=args.max_iters,
        paper_faithful_signs=not args.paper_signs,
    )
    out = _outdir(args)
    results = unmix_batch(lib.matrix, S, args.algo, config)
    C = np.column_stack([r.c for r in results])
    write_row_table_csv(out / "abundances.csv", "spectrum_id", ids, lib.names, C.T)
    total_ms = float(sum(r.runtime_ms for r in results))
    write_json(
        out / "diagnostics.json",
        {
            "version": __version__,
            "command": "unmix",
            "algorithm": args.algo,
            "config": {
                "lambda": config.lam,
                "mu": config.mu,
                "epsilon": config.epsilon,
                "max_iters": config.max_iters,
                "step_c0": config.step_c0,
                "paper_faithful_signs": config.paper_faithful_signs,
            },
            "library_sha256": matrix_sha256(lib.matrix),
            "n_spectra": len(results),
            "converged_count": int(sum(r.converged for r in results)),
            "iterations": [int(r.iterations) for r in results],
            "converged": [bool(r.converged) for r in results],
            "final_loss": [float(r.final_loss) for r in results],
            "runtime": {
                "total_ms": total_ms,
                "per_spectrum_ms": total_ms / max(len(results), 1),
            },
        },
    )
    for name in ("abundances.csv", "diagnostics.json"):
        print(out / name)
    return EXIT_OK


def cmd_noise(args) -> int:
    wavelengths, _, S = read_columns_csv(args.spectra, "wavelength_nm")
    report = analyze_noise(S * args.scale, cutoff=args.cutoff)
    out = _outdir(args)
    write_columns_csv(
        out / "noise_stats.csv",
        wavelengths,
        _NOISE_STAT_COLUMNS,
        np.column_stack(
            [report.mean, report.variance, report.kl_poisson_model, report.kl_constant_model]
        ),
    )
    write_json(
        out / "report.json",
        {
            "version": __version__,
            "command": "noise",
            "cutoff": report.cutoff,
            "scale": args.scale,
            "n_spectra": int(S.shape[1]),
            "slope": report.slope,
            "intercept": report.intercept,
            "r_squared": report.r_squared,
            "correlation": report.correlation,
            "mean_kl_poisson": report.mean_kl_poisson,
            "mean_kl_constant": report.mean_kl_constant,
            "mean": [float(v) for v in report.mean],
            "variance": [float(v) for v in report.variance],
            "kl_poisson_model": [float(v) for v in report.kl_poisson_model],
            "kl_constant_model": [float(v) for v in report.kl_constant_model],
        },
    )
    for name in ("noise_stats.csv", "report.json"):
        print(out / name)
    return EXIT_OK


def _write_bench_csv(path: Path, rows: list[BenchRow]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_BENCH_CSV_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row.algorithm,
                    "" if row.lam is None else repr(float(row.lam)),
                    repr(row.reconstruction_mse_mean),
                    repr(row.reconstruction_mse_std),
                    repr(row.abundance_mse_mean),
                    repr(row.abundance_mse_std),
                    row.false_positives,
                    repr(row.l0_mean),
                    repr(row.sam_mean),
                    repr(row.sam_std),
                    repr(row.runtime_per_spectrum_ms),
                    row.failures,
                    int(row.flagged),
                ]
            )


def cmd_bench(args) -> int:
    corpus = default_bench_corpus(seed=args.seed)
    if args.n is not None:
        corpus = SimulationConfig(
            n=args.n, seed=args.seed, intensity_scale=corpus.intensity_scale
        )
    config = BenchConfig(corpus=corpus, seed=args.seed)
    lib = _load_or_default_library(args)
    base_solver = SolverConfig(
        mu=args.mu,
        epsilon=args.eps,
        max_iters=args.max_iters,
        paper_faithful_signs=not args.paper_signs,
    )
    rows = run_benchmark(config, library=lib, base_solver=base_solver)
    out = _outdir(args)
    _write_bench_csv(out / "bench.csv", rows)
    write_json(
        out / "meta.json",
        {
            "version": __version__,
            "command": "bench",
            "corpus": {
                "n": corpus.n,
                "seed": corpus.seed,
                "intensity_scale": corpus.intensity_scale,
                "noise_mode": corpus.noise_mode,
            },
            "grid_entries": [[a, lam] for a, lam in config.grid],
            "repetitions": config.repetitions,
            "library_sha256": matrix_sha256(lib.matrix),
        },
    )
    print(out / "bench.csv")
    if args.check:
        violations = check_benchmark(rows)
        if violations:
            for v in violations:
                print(f"check failed: {v}", file=sys.stderr)
            return EXIT_CHECK
        print("all benchmark checks passed")
    return EXIT_OK


def cmd_plot(args) -> int:
    if (args.spectra is None) == (args.library is None):
        raise ValidationError("plot needs exactly one of --spectra or --library")
    src = args.spectra if args.spectra is not None else args.library
    wavelengths, names, M = read_columns_csv(src, "wavelength_nm")
    out = _outdir(args)
    written: list[Path] = []
    if names == _NOISE_STAT_COLUMNS:
        mean, variance = M[:, 0], M[:, 1]
        slope, intercept, _, _ = mean_variance_regression(mean, variance)
        scatter = render_scatter_chart(
            mean,
            variance,
            xlabel="signal mean (counts)",
            ylabel="noise variance",
            title="noise variance vs signal mean",
            fit=(slope, intercept),
        )
        kl = render_line_chart(
            wavelengths,
            {"kl_poisson_model": M[:, 2], "kl_constant_model": M[:, 3]},
            xlabel="wavelength (nm)",
            ylabel="KL divergence",
            title="model divergence per wavelength",
        )
        for fname, text in (("mean_variance.svg", scatter), ("kl_curves.svg", kl)):
            path = out / fname
            path.write_text(text, encoding="utf-8")
            written.append(path)
    else:
        max_curves = 12
        series = {name: M[:, i] for i, name in enumerate(names[:max_curves])}
        chart = render_line_chart(
            wavelengths,
            series,
            xlabel="wavelength (nm)",
            ylabel="intensity",
            title=Path(src).stem,
        )
        fname = "library.svg" if args.library is not None else "spectra.svg"
        path = out / fname
        path.write_text(chart, encoding="utf-8")
        written.append(path)
    for path in written:
        print(path)
    return EXIT_OK


def _add_library_flag(p) -> None:
    p.add_argument("--library", metavar="CSV", help="endmember library CSV (default: built-in synthetic library)")


def _add_solver_flags(p) -> None:
    p.add_argument("--mu", type=float, default=0.9, help="heavy-ball momentum (default 0.9)")
    p.add_argument("--eps", type=float, default=1e-6, help="convergence tolerance on the step norm (default 1e-6)")
    p.add_argument("--max-iters", type=int, default=5000, help="iteration cap (default 5000)")
    p.add_argument(
        "--paper-signs",
        action="store_true",
        help="use the literal pseudocode sign convention in the momentum update "
        "(default: the descent-gradient form)",
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="fluorunmix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("library", help="write the endmember library CSV + provenance")
    _add_library_flag(p)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_library)

    p = sub.add_parser("simulate", help="synthesize noisy spectra with ground truth")
    _add_library_flag(p)
    p.add_argument("--n", type=int, default=1000, help="number of spectra (default 1000)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--scale",
        type=float,
        default=None,
        help="photon-count intensity scale; 0 disables noise (default 1e4)",
    )
    p.add_argument(
        "--literal-noise",
        action="store_true",
        help="noise term ~ Normal(x, x) instead of the zero-mean Normal(0, x)",
    )
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("unmix", help="estimate abundances for a spectra CSV")
    _add_library_flag(p)
    p.add_argument("--spectra", required=True, metavar="CSV")
    p.add_argument("--algo", required=True, choices=sorted(ALGORITHMS))
    p.add_argument("--lambda", dest="lam", type=float, default=0.0, help="L1 weight (default 0)")
    _add_solver_flags(p)
    p.add_argument(
        "--resample",
        action="store_true",
        help="interpolate the library onto the spectra grid when grids differ",
    )
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_unmix)

    p = sub.add_parser("noise", help="noise-distribution analysis of a spectra batch")
    p.add_argument("--spectra", required=True, metavar="CSV")
    p.add_argument("--cutoff", type=float, default=0.1, help="high-pass relative frequency cutoff (default 0.1)")
    p.add_argument(
        "--scale",
        type=float,
        default=1.0,
        help="multiply spectra by this factor to restore photon-count scale "
        "before analysis (default 1.0)",
    )
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("bench", help="run the solver/lambda benchmark grid")
    _add_library_flag(p)
    p.add_argument("--n", type=int, default=None, help="corpus size (default 1000)")
    p.add_argument("--seed", type=int, default=2024)
    _add_solver_flags(p)
    p.add_argument("--check", action="store_true", help="exit 1 if any expected ordering fails")
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("plot", help="render SVG charts from a CSV artifact")
    _add_library_flag(p)
    p.add_argument("--spectra", metavar="CSV", help="spectra or noise-stats CSV to chart")
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GridMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GRID
    except (ValidationError, DataFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FluorUnmixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
