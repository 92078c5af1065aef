"""CSV formats used by the command-line interface.

Count files carry one row per bin with a ``bin_center`` column followed by
one column per realization (``real_1, ..., real_R``); missing entries are
spelled ``NaN``.  Kernel matrices are headerless ``d x d`` grids.  Results
and truth tables are plain headed CSVs with floats printed to 9 significant
digits.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .exceptions import DataError
from .permanental import CountData

__all__ = [
    "read_counts_csv",
    "write_counts_csv",
    "read_kernel_csv",
    "write_matrix_csv",
    "read_table_csv",
    "write_table_csv",
    "format_float",
]


def format_float(x) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "NaN"
    return f"{x:.9g}"


def _parse_float(token: str, path, line_no: int, what: str) -> float:
    token = token.strip()
    if token.lower() in ("nan", ""):
        return math.nan
    try:
        return float(token)
    except ValueError:
        raise DataError(f"{path}, line {line_no}: could not parse {what} {token!r}") from None


def read_counts_csv(path) -> tuple[np.ndarray, CountData]:
    """Read a count file; returns the bin centers and the count matrix."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise DataError(f"could not read {path}: {exc}") from exc
    rows = [row for row in csv.reader(lines)]
    if not rows:
        raise DataError(f"{path}, line 1: file is empty")
    header = [cell.strip() for cell in rows[0]]
    if not header or header[0] != "bin_center" or len(header) < 2:
        raise DataError(
            f"{path}, line 1: expected header 'bin_center,real_1,...', got {','.join(header)!r}"
        )
    n_cols = len(header)
    centers = []
    counts = []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != n_cols:
            raise DataError(
                f"{path}, line {line_no}: expected {n_cols} columns, found {len(row)}"
            )
        centers.append(_parse_float(row[0], path, line_no, "bin center"))
        values = [_parse_float(cell, path, line_no, "count") for cell in row[1:]]
        for v in values:
            if not math.isnan(v) and (v < 0 or math.isinf(v)):
                raise DataError(f"{path}, line {line_no}: counts must be non-negative")
        counts.append(values)
    if not counts:
        raise DataError(f"{path}, line 2: no data rows")
    try:
        data = CountData(np.asarray(counts, dtype=float))
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc
    return np.asarray(centers, dtype=float), data


def write_counts_csv(path, bin_centers, counts) -> None:
    counts = CountData.from_array(counts)
    centers = np.asarray(bin_centers, dtype=float)
    if centers.shape != (counts.n_bins,):
        raise DataError(
            f"bin centers shape {centers.shape} does not match {counts.n_bins} bins"
        )
    header = ["bin_center"] + [f"real_{j + 1}" for j in range(counts.n_realizations)]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for i in range(counts.n_bins):
            writer.writerow(
                [format_float(float(centers[i]))]
                + [format_float(float(v)) for v in counts.counts[i]]
            )


def read_kernel_csv(path) -> np.ndarray:
    """Read a headerless d x d kernel matrix (symmetry is validated by the
    kernel constructor downstream)."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise DataError(f"could not read {path}: {exc}") from exc
    rows = []
    for line_no, row in enumerate(csv.reader(lines), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        rows.append([_parse_float(cell, path, line_no, "matrix entry") for cell in row])
    if not rows:
        raise DataError(f"{path}, line 1: file is empty")
    width = len(rows[0])
    for line_no, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataError(f"{path}, line {line_no}: ragged row of length {len(row)}")
    matrix = np.asarray(rows, dtype=float)
    if matrix.shape[0] != matrix.shape[1]:
        raise DataError(f"{path}: kernel matrix must be square, got {matrix.shape}")
    return matrix


def write_matrix_csv(path, matrix) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        for row in np.asarray(matrix, dtype=float):
            writer.writerow([format_float(float(v)) for v in row])


def read_table_csv(path) -> dict[str, np.ndarray]:
    """Read a headed CSV into a column dict of float arrays (the results and
    truth formats)."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise DataError(f"could not read {path}: {exc}") from exc
    rows = [row for row in csv.reader(lines) if row and any(cell.strip() for cell in row)]
    if len(rows) < 2:
        raise DataError(f"{path}: expected a header and at least one data row")
    header = [cell.strip() for cell in rows[0]]
    columns: dict[str, list[float]] = {name: [] for name in header}
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(
                f"{path}, line {line_no}: expected {len(header)} columns, found {len(row)}"
            )
        for name, cell in zip(header, row):
            columns[name].append(_parse_float(cell, path, line_no, f"column {name!r}"))
    return {name: np.asarray(vals, dtype=float) for name, vals in columns.items()}


def write_table_csv(path, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    arrays = [np.asarray(columns[name]) for name in names]
    length = len(arrays[0])
    if any(len(arr) != length for arr in arrays):
        raise DataError("all columns must have the same length")
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(names)
        for i in range(length):
            writer.writerow([format_float(float(arr[i])) for arr in arrays])
