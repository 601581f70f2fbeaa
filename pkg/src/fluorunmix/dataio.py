"""CSV and JSON readers/writers shared by the CLI and the library module.

File formats:

* columns CSV — UTF-8, comma-separated, header ``wavelength_nm,<name1>,...``,
  one row per wavelength, decimal point, no thousands separators. Used for
  endmember libraries (named columns) and spectra batches (``spec_0001``-style
  column names).
* truth CSV — header ``spectrum_id,<endmember names...>``, one row per
  spectrum with its ground-truth abundances.
* abundances CSV — same layout as truth CSV, for solver output.

Floats are written with ``repr`` (shortest round-trip form), so export/import
is lossless and same-seed runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import DataFormatError

__all__ = [
    "read_columns_csv",
    "write_columns_csv",
    "write_row_table_csv",
    "read_row_table_csv",
    "write_json",
    "read_json",
    "matrix_sha256",
    "spectrum_column_names",
]


def _fmt(x: float) -> str:
    return repr(float(x))


def read_columns_csv(path, first_column: str) -> tuple[np.ndarray, list[str], np.ndarray]:
    """Read a columns CSV; returns (first column values, names, value matrix)."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        if not header or header[0] != first_column:
            raise DataFormatError(
                f"{path}: expected header starting with '{first_column}', got {header[:1]}"
            )
        names = [h.strip() for h in header[1:]]
        if len(set(names)) != len(names):
            raise DataFormatError(f"{path}: duplicate column names")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names) + 1:
                raise DataFormatError(
                    f"{path}:{lineno}: expected {len(names) + 1} fields, got {len(row)}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    if np.any(np.isnan(data)):
        raise DataFormatError(f"{path}: NaN values are not allowed")
    first = data[:, 0]
    if np.any(np.diff(first) <= 0):
        raise DataFormatError(f"{path}: {first_column} must be strictly increasing")
    return first, names, data[:, 1:]


def write_columns_csv(path, first_values, names, matrix) -> None:
    """Write a columns CSV (inverse of ``read_columns_csv``)."""
    matrix = np.asarray(matrix, dtype=float)
    first_values = np.asarray(first_values, dtype=float)
    if matrix.shape != (first_values.size, len(names)):
        raise DataFormatError(
            f"matrix shape {matrix.shape} does not match "
            f"{first_values.size} rows x {len(names)} columns"
        )
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["wavelength_nm", *names])
        for i in range(first_values.size):
            writer.writerow([_fmt(first_values[i]), *(_fmt(v) for v in matrix[i])])


def spectrum_column_names(n: int) -> list[str]:
    width = max(4, len(str(n)))
    return [f"spec_{j + 1:0{width}d}" for j in range(n)]


def write_row_table_csv(path, id_column: str, ids, names, rows) -> None:
    """Write a row-per-record CSV with header ``<id_column>,<names...>``."""
    rows = np.asarray(rows, dtype=float)
    ids = list(ids)
    if rows.shape != (len(ids), len(names)):
        raise DataFormatError(
            f"rows shape {rows.shape} does not match {len(ids)} ids x {len(names)} names"
        )
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([id_column, *names])
        for rid, row in zip(ids, rows):
            writer.writerow([rid, *(_fmt(v) for v in row)])


def read_row_table_csv(path, id_column: str) -> tuple[list[str], list[str], np.ndarray]:
    """Read a row-per-record CSV; returns (ids, names, value matrix)."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        if not header or header[0] != id_column:
            raise DataFormatError(f"{path}: expected header starting with '{id_column}'")
        names = header[1:]
        ids, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names) + 1:
                raise DataFormatError(
                    f"{path}:{lineno}: expected {len(names) + 1} fields, got {len(row)}"
                )
            ids.append(row[0])
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return ids, names, np.asarray(rows, dtype=float)


def write_json(path, payload: dict) -> None:
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def matrix_sha256(matrix) -> str:
    """Content hash of a float matrix (used for provenance records)."""
    arr = np.ascontiguousarray(matrix, dtype=float)
    digest = hashlib.sha256()
    digest.update(str(arr.shape).encode())
    digest.update(arr.tobytes())
    return digest.hexdigest()
