"""Data matrix container, range standardization, and CSV I/O.

Every clustering entry point in this package works on a :class:`DataMatrix`.
Raw data is standardized feature by feature: subtract the feature mean and
divide by the feature range (max minus min).  Range standardization is
preferred over the z-score because the z-score penalizes multimodal
features, which are exactly the ones carrying cluster structure.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DataError",
    "DataMatrix",
    "standardize_range",
    "ensure_standardized",
    "read_csv",
    "load_csv",
    "write_csv",
]


class DataError(ValueError):
    """Raised when input data is malformed (non-finite, ragged, unparsable)."""


@dataclass(frozen=True)
class DataMatrix:
    """An N x V table of entities by features.

    The array is coerced to float64 and frozen (read-only) so instances can
    be shared freely across workers.  ``standardized`` records whether the
    values have already been range-standardized.
    """

    values: np.ndarray
    standardized: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DataError(f"expected a 2-D matrix, got ndim={values.ndim}")
        n, v = values.shape
        if n < 2:
            raise DataError(f"need at least 2 entities, got {n}")
        if v < 1:
            raise DataError("need at least 1 feature")
        bad = ~np.isfinite(values)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise DataError(f"non-finite value at row {i}, feature {j}")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_entities(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


def standardize_range(raw: DataMatrix) -> DataMatrix:
    """Standardize each feature to mean 0 and range 1.

    Each value becomes ``(y - mean) / (max - min)`` within its feature.  A
    constant feature has zero range; it is mapped to all zeros (so it
    contributes nothing to any distance) and a warning is emitted.
    """
    if raw.standardized:
        raise DataError("data is already standardized")
    values = raw.values
    mean = values.mean(axis=0)
    rng = values.max(axis=0) - values.min(axis=0)
    constant = rng == 0.0
    if constant.any():
        warnings.warn(
            f"{int(constant.sum())} constant feature(s) mapped to zeros: "
            f"columns {np.flatnonzero(constant).tolist()}",
            stacklevel=2,
        )
    safe_rng = np.where(constant, 1.0, rng)
    out = (values - mean) / safe_rng
    out[:, constant] = 0.0
    return DataMatrix(out, standardized=True)


def ensure_standardized(data: DataMatrix) -> DataMatrix:
    """Return ``data`` unchanged if already standardized, else standardize it."""
    return data if data.standardized else standardize_range(data)


def load_csv(path, has_header: bool = True) -> tuple[DataMatrix, np.ndarray | None]:
    """Read a CSV file into a DataMatrix plus optional ground-truth labels.

    When the header names its last column ``label``, that column is split
    off and returned as an integer array; otherwise labels are ``None``.
    All remaining cells must parse as real numbers.
    """
    rows: list[list[str]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for row in reader:
            if row:
                rows.append(row)
    if not rows:
        raise DataError(f"{path}: empty file")

    header: list[str] | None = None
    if has_header:
        header, rows = rows[0], rows[1:]
        if not rows:
            raise DataError(f"{path}: no data rows")

    width = len(rows[0])
    has_labels = has_header and header is not None and header[-1].strip() == "label"

    parsed = np.empty((len(rows), width), dtype=np.float64)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(
                f"{path}: ragged row {i}: expected {width} cells, got {len(row)}"
            )
        for j, cell in enumerate(row):
            try:
                parsed[i, j] = float(cell)
            except ValueError:
                raise DataError(f"{path}: cannot parse cell at row {i}, column {j}: {cell!r}") from None

    if has_labels:
        labels = parsed[:, -1]
        if not np.all(labels == np.round(labels)):
            raise DataError(f"{path}: label column contains non-integer values")
        return DataMatrix(parsed[:, :-1]), labels.astype(np.int64)
    return DataMatrix(parsed), None


def read_csv(path, has_header: bool = True) -> DataMatrix:
    """Read the feature columns of a CSV file (dropping any label column)."""
    data, _ = load_csv(path, has_header=has_header)
    return data


def write_csv(data: DataMatrix, path) -> None:
    """Write a DataMatrix as CSV with a feature header row.

    Values are written with ``repr`` (shortest round-trip text), so
    ``read_csv(write_csv(...))`` reproduces the matrix exactly.
    """
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"f{j}" for j in range(data.n_features)])
        for row in data.values:
            writer.writerow([repr(float(x)) for x in row])
