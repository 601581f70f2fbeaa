"""Endmember library construction, loading, resampling, and export.

Ships a synthetic 9-endmember default (two PpIX photostates plus seven broad
autofluorescence bands). The band parameters below are repo-defined constants
chosen to give a well-conditioned, realistic-shaped basis — they are synthetic
stand-ins, not measured fluorophore data. Real measured endmember spectra can
be dropped in via ``load_library``; every solver and metric in the package is
library-agnostic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import EndmemberLibrary, Spectrum, WavelengthGrid, default_grid
from .errors import DataFormatError, ValidationError

__all__ = [
    "DEFAULT_ENDMEMBER_NAMES",
    "GAUSSIAN_BANDS",
    "BASELINE_FLOOR",
    "LoadDiagnostics",
    "synthetic_default_library",
    "resample",
    "load_library",
    "load_library_with_diagnostics",
    "export_library",
    "library_condition_number",
    "max_pairwise_cosine",
]

log = logging.getLogger(__name__)

DEFAULT_ENDMEMBER_NAMES = (
    "PpIX634",
    "PpIX620",
    "Lipofuscin",
    "Flavins",
    "NADH",
    "FAD",
    "Collagen",
    "Elastin",
    "Melanin",
)

#: Gaussian emission bands per endmember as (weight, center nm, FWHM nm) terms.
#: PpIX634 carries its secondary peak near 704 nm; FAD carries a blue shoulder
#: that distinguishes it from Flavins. Melanin is not banded (see below): it is
#: modeled as a monotone exponential decay from the blue edge.
GAUSSIAN_BANDS = {
    "PpIX634": ((1.0, 634.0, 20.0), (0.4, 704.0, 30.0)),
    "PpIX620": ((1.0, 620.0, 25.0),),
    "Lipofuscin": ((1.0, 545.0, 118.0),),
    "Flavins": ((1.0, 529.0, 95.0),),
    "NADH": ((1.0, 434.0, 88.0),),
    "FAD": ((1.0, 561.0, 95.0), (0.2, 533.0, 40.0)),
    "Collagen": ((1.0, 450.0, 110.0),),
    "Elastin": ((1.0, 466.0, 88.0),),
}

#: Decay constant (nm) of the melanin column: exp(-(lambda - 420)/80).
MELANIN_DECAY_NM = 80.0

#: Additive emission floor applied to every column before peak-normalization.
#: Measured fluorophore emission never reaches true zero inside a 420-730 nm
#: detection window (emission tails + instrument response); the floor also
#: keeps (B c)_i strictly positive whenever c != 0, so Poisson-likelihood
#: objectives stay pole-free.
BASELINE_FLOOR = 0.02

_GRID_MIN_NM = 420.0
_GRID_MAX_NM = 730.0


def _gauss(w: np.ndarray, center: float, fwhm: float) -> np.ndarray:
    return np.exp(-4.0 * np.log(2.0) * (w - center) ** 2 / fwhm**2)


def synthetic_default_library(grid: WavelengthGrid | None = None) -> EndmemberLibrary:
    """Build the synthetic 9-endmember library on ``grid`` (default 420-730 nm).

    Columns are sums of the Gaussian bands in ``GAUSSIAN_BANDS`` (melanin is an
    exponential decay), lifted by ``BASELINE_FLOOR`` and peak-normalized to 1.
    """
    if grid is None:
        grid = default_grid()
    w = grid.wavelengths
    if w[0] < _GRID_MIN_NM - 1e-9 or w[-1] > _GRID_MAX_NM + 1e-9:
        raise ValidationError(
            f"grid must lie within {_GRID_MIN_NM:.0f}-{_GRID_MAX_NM:.0f} nm"
        )
    columns = []
    for name in DEFAULT_ENDMEMBER_NAMES:
        if name == "Melanin":
            shape = np.exp(-(w - _GRID_MIN_NM) / MELANIN_DECAY_NM)
        else:
            shape = sum(
                weight * _gauss(w, center, fwhm)
                for weight, center, fwhm in GAUSSIAN_BANDS[name]
            )
        lifted = shape + BASELINE_FLOOR
        columns.append(lifted / lifted.max())
    B = np.column_stack(columns)
    return EndmemberLibrary(grid=grid, names=DEFAULT_ENDMEMBER_NAMES, matrix=B)


def resample(spectrum: Spectrum, target: WavelengthGrid) -> Spectrum:
    """Linearly interpolate a spectrum onto ``target``.

    Exact at shared sample points. Raises if the target extends beyond the
    source range (no extrapolation).
    """
    src = spectrum.grid.wavelengths
    tgt = target.wavelengths
    if tgt[0] < src[0] - 1e-12 or tgt[-1] > src[-1] + 1e-12:
        raise ValidationError(
            "target grid extends beyond the source range; extrapolation is not supported"
        )
    return Spectrum(grid=target, values=np.interp(tgt, src, spectrum.values))


@dataclass
class LoadDiagnostics:
    """Side information from ``load_library``."""

    clamped: int = 0


def _parse_library_csv(path) -> tuple[np.ndarray, list[str], np.ndarray]:
    from . import dataio

    return dataio.read_columns_csv(path, first_column="wavelength_nm")


def load_library_with_diagnostics(
    path, target_grid: WavelengthGrid | None = None
) -> tuple[EndmemberLibrary, LoadDiagnostics]:
    """Load a library CSV, optionally resampling onto ``target_grid``.

    Columns are peak-normalized on load; negative entries are clamped to 0 and
    counted in the returned diagnostics.
    """
    wavelengths, names, values = _parse_library_csv(path)
    if len(names) < 1:
        raise DataFormatError(f"{path}: need at least one endmember column")
    grid = WavelengthGrid(wavelengths)
    diags = LoadDiagnostics()
    neg = values < 0
    diags.clamped = int(np.count_nonzero(neg))
    if diags.clamped:
        log.warning("%s: clamped %d negative entries to 0", path, diags.clamped)
        values = np.where(neg, 0.0, values)
    if target_grid is not None and not grid.isclose(target_grid):
        values = np.column_stack(
            [
                resample(Spectrum(grid=grid, values=values[:, j]), target_grid).values
                for j in range(values.shape[1])
            ]
        )
        grid = target_grid
    peaks = values.max(axis=0)
    if np.any(peaks <= 0):
        raise DataFormatError(f"{path}: an endmember column is identically zero")
    lib = EndmemberLibrary(grid=grid, names=tuple(names), matrix=values / peaks)
    return lib, diags


def load_library(path, target_grid: WavelengthGrid | None = None) -> EndmemberLibrary:
    """Load a library CSV (see ``load_library_with_diagnostics``)."""
    lib, _ = load_library_with_diagnostics(path, target_grid)
    return lib


def export_library(lib: EndmemberLibrary, path) -> None:
    """Write a library to CSV with header ``wavelength_nm,<name1>,...``.

    Round trip: ``load_library(export_library(lib))`` reproduces the matrix
    within 1e-9 (floats are written with shortest round-trip repr).
    """
    from . import dataio

    dataio.write_columns_csv(path, lib.grid.wavelengths, list(lib.names), lib.matrix)


def library_condition_number(lib: EndmemberLibrary) -> float:
    """Condition number of the Gram matrix B^T B."""
    return float(np.linalg.cond(lib.matrix.T @ lib.matrix))


def max_pairwise_cosine(lib: EndmemberLibrary) -> float:
    """Largest spectral-angle cosine between any two distinct endmembers."""
    C = lib.matrix / np.linalg.norm(lib.matrix, axis=0)
    gram = C.T @ C
    np.fill_diagonal(gram, -np.inf)
    return float(gram.max())
