"""Endmember library: the built-in synthetic default, resampling, and the
CSV load/export round trip with clamping diagnostics."""

from __future__ import annotations

import numpy as np
import pytest

import fluorunmix as fu
from fluorunmix.errors import DataFormatError, ValidationError
from fluorunmix.library import (
    DEFAULT_ENDMEMBER_NAMES,
    library_condition_number,
    load_library,
    load_library_with_diagnostics,
    max_pairwise_cosine,
)

import oracles


# ---------------------------------------------------------------------------
# synthetic default


def test_default_names_and_order(library):
    assert library.names == DEFAULT_ENDMEMBER_NAMES
    assert library.names == (
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


def test_default_columns_peak_at_one(library):
    np.testing.assert_allclose(library.matrix.max(axis=0), 1.0, atol=1e-12)


def test_default_columns_nonnegative(library):
    assert library.matrix.min() >= 0.0


def test_ppix634_peaks_near_634(library):
    col = library.matrix[:, library.names.index("PpIX634")]
    peak_nm = library.grid.wavelengths[int(np.argmax(col))]
    assert abs(peak_nm - 634.0) <= library.grid.spacing


def test_gram_matrix_well_conditioned(library):
    cond = library_condition_number(library)
    assert np.isfinite(cond)
    assert cond < 1e6


def test_endmembers_pairwise_distinct(library):
    assert max_pairwise_cosine(library) < 0.999


def test_default_library_accepts_custom_grid():
    coarse = fu.WavelengthGrid(np.linspace(500.0, 700.0, 101))
    lib = fu.synthetic_default_library(coarse)
    assert lib.m == 101
    np.testing.assert_allclose(lib.matrix.max(axis=0), 1.0, atol=1e-12)


def test_default_library_rejects_out_of_range_grid():
    with pytest.raises(ValidationError):
        fu.synthetic_default_library(fu.WavelengthGrid(np.linspace(400.0, 730.0, 50)))
    with pytest.raises(ValidationError):
        fu.synthetic_default_library(fu.WavelengthGrid(np.linspace(420.0, 740.0, 50)))


# ---------------------------------------------------------------------------
# resample


def test_resample_identity_on_same_grid(library):
    spec = fu.Spectrum(library.grid, library.matrix[:, 0])
    out = fu.resample(spec, library.grid)
    np.testing.assert_array_equal(out.values, spec.values)


def test_resample_midpoint_example():
    grid = fu.WavelengthGrid(np.array([420.0, 422.0]))
    spec = fu.Spectrum(grid, np.array([0.0, 2.0]))
    target = fu.WavelengthGrid(np.array([420.0, 421.0]))
    out = fu.resample(spec, target)
    assert out.values[1] == pytest.approx(1.0)


def test_resample_exact_at_shared_points(library):
    # every 2nd point of the default grid is shared with the coarse target
    src = library.grid.wavelengths
    target = fu.WavelengthGrid(src[::2])
    spec = fu.Spectrum(library.grid, library.matrix[:, 2])
    out = fu.resample(spec, target)
    np.testing.assert_array_equal(out.values, spec.values[::2])


def test_resample_matches_line_equation_oracle():
    rng = np.random.default_rng(21)
    src = fu.WavelengthGrid(np.linspace(500.0, 520.0, 11))
    values = rng.uniform(0.0, 3.0, 11)
    spec = fu.Spectrum(src, values)
    target = fu.WavelengthGrid(np.linspace(501.0, 519.0, 37))
    out = fu.resample(spec, target)
    expected = []
    for w in target.wavelengths:
        i = int(np.searchsorted(src.wavelengths, w, side="right")) - 1
        i = min(i, len(values) - 2)
        expected.append(
            oracles.line_interp(
                src.wavelengths[i], values[i], src.wavelengths[i + 1], values[i + 1], w
            )
        )
    np.testing.assert_allclose(out.values, expected, rtol=1e-12, atol=1e-12)


def test_resample_is_linear_in_the_input():
    rng = np.random.default_rng(22)
    src = fu.WavelengthGrid(np.linspace(430.0, 450.0, 21))
    target = fu.WavelengthGrid(np.linspace(431.0, 449.0, 10))
    x = rng.uniform(0.0, 1.0, 21)
    y = rng.uniform(0.0, 1.0, 21)
    a, b = 1.7, -0.4
    combo = fu.resample(fu.Spectrum(src, a * x + b * y), target).values
    parts = a * fu.resample(fu.Spectrum(src, x), target).values + b * fu.resample(
        fu.Spectrum(src, y), target
    ).values
    np.testing.assert_allclose(combo, parts, rtol=1e-12, atol=1e-12)


def test_resample_refuses_extrapolation():
    src = fu.WavelengthGrid(np.array([500.0, 501.0, 502.0]))
    spec = fu.Spectrum(src, np.array([1.0, 2.0, 3.0]))
    with pytest.raises(ValidationError):
        fu.resample(spec, fu.WavelengthGrid(np.array([499.0, 500.0])))
    with pytest.raises(ValidationError):
        fu.resample(spec, fu.WavelengthGrid(np.array([501.0, 503.0])))


# ---------------------------------------------------------------------------
# CSV round trip and diagnostics


def test_export_then_load_round_trip(tmp_path, library):
    path = tmp_path / "lib.csv"
    fu.export_library(library, path)
    loaded = load_library(path)
    assert loaded.names == library.names
    assert loaded.grid == library.grid
    np.testing.assert_allclose(loaded.matrix, library.matrix, atol=1e-9)


def test_export_file_shape(tmp_path, library):
    path = tmp_path / "lib.csv"
    fu.export_library(library, path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 311  # header + 310 rows
    header = lines[0].split(",")
    assert header[0] == "wavelength_nm"
    assert len(header) == 10


def test_round_trip_random_library(tmp_path):
    rng = np.random.default_rng(23)
    grid = fu.WavelengthGrid(np.linspace(600.0, 650.0, 51))
    matrix = rng.uniform(0.01, 1.0, (51, 3))
    matrix = matrix / matrix.max(axis=0)
    lib = fu.EndmemberLibrary(grid, ["u", "v", "w"], matrix)
    path = tmp_path / "random.csv"
    fu.export_library(lib, path)
    loaded = load_library(path)
    np.testing.assert_allclose(loaded.matrix, lib.matrix, atol=1e-9)


def _write_csv(path, text):
    path.write_text(text)
    return path


def test_load_normalizes_peaks(tmp_path):
    path = _write_csv(
        tmp_path / "scaled.csv",
        "wavelength_nm,a,b\n500.0,2.0,1.0\n501.0,4.0,3.0\n502.0,1.0,2.0\n",
    )
    lib = load_library(path)
    assert lib.k == 2
    np.testing.assert_allclose(lib.matrix.max(axis=0), 1.0, atol=1e-12)
    np.testing.assert_allclose(lib.matrix[:, 0], [0.5, 1.0, 0.25])


def test_load_clamps_negatives_and_counts_them(tmp_path):
    path = _write_csv(
        tmp_path / "neg.csv",
        "wavelength_nm,a\n500.0,-0.01\n501.0,1.0\n502.0,0.5\n",
    )
    lib, diags = load_library_with_diagnostics(path)
    assert diags.clamped == 1
    assert lib.matrix[0, 0] == 0.0


def test_load_resamples_onto_target_grid(tmp_path):
    # 1 nm source grid, 2 nm target: row count halves
    src = np.arange(500.0, 521.0)
    rows = "\n".join(f"{w},{(w - 500.0) / 20.0}" for w in src)
    path = _write_csv(tmp_path / "fine.csv", "wavelength_nm,a\n" + rows + "\n")
    target = fu.WavelengthGrid(np.arange(500.0, 521.0, 2.0))
    lib = load_library(path, target_grid=target)
    assert lib.m == 11
    assert lib.grid == target


def test_load_rejects_missing_header(tmp_path):
    path = _write_csv(tmp_path / "bad.csv", "500.0,1.0\n501.0,2.0\n")
    with pytest.raises(DataFormatError):
        load_library(path)


def test_load_rejects_non_monotone_wavelengths(tmp_path):
    path = _write_csv(
        tmp_path / "bad.csv", "wavelength_nm,a\n501.0,1.0\n500.0,2.0\n"
    )
    with pytest.raises((DataFormatError, ValidationError)):
        load_library(path)


def test_load_rejects_nan(tmp_path):
    path = _write_csv(
        tmp_path / "bad.csv", "wavelength_nm,a\n500.0,1.0\n501.0,nan\n"
    )
    with pytest.raises((DataFormatError, ValidationError)):
        load_library(path)


def test_load_rejects_duplicate_names(tmp_path):
    path = _write_csv(
        tmp_path / "bad.csv", "wavelength_nm,a,a\n500.0,1.0,1.0\n501.0,2.0,2.0\n"
    )
    with pytest.raises((DataFormatError, ValidationError)):
        load_library(path)


def test_load_rejects_zero_column(tmp_path):
    path = _write_csv(
        tmp_path / "bad.csv", "wavelength_nm,a\n500.0,0.0\n501.0,0.0\n"
    )
    with pytest.raises(DataFormatError):
        load_library(path)


def test_load_rejects_empty_file(tmp_path):
    path = _write_csv(tmp_path / "empty.csv", "")
    with pytest.raises(DataFormatError):
        load_library(path)
