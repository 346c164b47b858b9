"""
LabelMap - Dataset Loader
Read labeled input data: a feature CSV with a label column, or a
precomputed dissimilarity matrix with a companion labels file.
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional
import logging

import numpy as np
import pandas as pd

from labelmap.config import SYMMETRY_TOLERANCE
from labelmap.errors import AsymmetricMatrix, InvalidConfig, ParseError, SizeMismatch
from labelmap.mapping.geometry import DissimilarityMatrix, DistanceMetric, LabelVector

logger = logging.getLogger(__name__)


class DatasetKind(str, Enum):
    FEATURE_TABLE = 'feature_table'
    DISTANCE_MATRIX = 'distance_matrix'


@dataclass(frozen=True)
class DatasetSource:
    """Where and how to read one labeled dataset."""
    kind: DatasetKind
    path: Path
    label_column: Optional[str] = None
    metric: DistanceMetric = DistanceMetric.EUCLIDEAN
    labels_path: Optional[Path] = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', DatasetKind(self.kind))
        object.__setattr__(self, 'metric', DistanceMetric(self.metric))
        object.__setattr__(self, 'path', Path(self.path))
        if self.labels_path is not None:
            object.__setattr__(self, 'labels_path', Path(self.labels_path))

        if self.kind is DatasetKind.FEATURE_TABLE and not self.label_column:
            raise InvalidConfig("A feature table needs a label column")
        if self.kind is DatasetKind.DISTANCE_MATRIX and self.labels_path is None:
            raise InvalidConfig("A distance matrix needs a companion labels file")


def _first_bad_cell(raw: pd.DataFrame, numeric: pd.DataFrame):
    bad = ~np.isfinite(numeric.to_numpy(dtype=float))
    row, col = map(int, np.argwhere(bad)[0])
    return row, raw.columns[col], raw.iat[row, col]


def _to_numeric(raw: pd.DataFrame, what):
    """Coerce every cell to float; any blank or non-numeric cell is a ParseError."""
    numeric = raw.apply(lambda col: pd.to_numeric(
        col.str.strip() if col.dtype == object else col, errors='coerce'
    ))
    values = numeric.to_numpy(dtype=float)
    if not np.all(np.isfinite(values)):
        row, col, cell = _first_bad_cell(raw, numeric)
        raise ParseError(f"Non-numeric value {cell!r} in {what} (row {row + 1}, column {col})")
    return values


def _read_csv(path, **kwargs):
    try:
        return pd.read_csv(path, **kwargs)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError(f"Cannot parse {path}: {str(e).strip()}") from e


def load_feature_table(path, label_column, metric=DistanceMetric.EUCLIDEAN):
    """
    Read a feature CSV and compute pairwise distances.

    Args:
        path: CSV file with a header row
        label_column: name of the class label column
        metric: 'euclidean' or 'manhattan'

    Returns:
        (DissimilarityMatrix, LabelVector)
    """
    df = _read_csv(path, dtype={label_column: str}, keep_default_na=False,
                   skipinitialspace=True)
    if label_column not in df.columns:
        raise ParseError(f"Label column '{label_column}' not found in {path} "
                         f"(columns: {', '.join(map(str, df.columns))})")

    features = df.drop(columns=[label_column])
    if features.shape[1] == 0:
        raise ParseError(f"No feature columns in {path}")

    points = _to_numeric(features, path)
    labels = LabelVector(tuple(df[label_column].astype(str)))
    d = DissimilarityMatrix.from_points(points, metric)
    logger.info(f"Loaded feature table {path}: {d.n} points, {points.shape[1]} features, "
                f"{len(labels.classes)} classes ({DistanceMetric(metric).value} distance)")
    return d, labels


def _sniff_separator(path):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            for line in f:
                if line.strip():
                    return ',' if ',' in line else r'\s+'
    except UnicodeDecodeError as e:
        raise ParseError(f"Distance matrix file {path} is not valid UTF-8: {e}") from e
    raise ParseError(f"Distance matrix file {path} is empty")


def _has_header(path, sep):
    first = _read_csv(path, sep=sep, header=None, nrows=1, dtype=str, keep_default_na=False)
    cells = [c for c in first.iloc[0].tolist() if c != '']
    return pd.to_numeric(pd.Series(cells), errors='coerce').isna().any()


def symmetrize(m: np.ndarray, tolerance=SYMMETRY_TOLERANCE):
    """
    Average m with its transpose when the asymmetry is within a relative
    tolerance of the largest entry.
    """
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return m
    asymmetry = float(np.abs(m - m.T).max())
    scale = float(np.abs(m).max())
    if asymmetry > tolerance * scale:
        i, j = np.unravel_index(np.argmax(np.abs(m - m.T)), m.shape)
        raise AsymmetricMatrix(
            f"Distance matrix is not symmetric: d[{i}][{j}]={m[i, j]} vs d[{j}][{i}]={m[j, i]}"
        )
    return 0.5 * (m + m.T)


def load_distance_matrix(path):
    """
    Read a square dissimilarity matrix, comma or whitespace separated
    (detected from the first line), with an optional header row.
    """
    sep = _sniff_separator(path)
    header = 0 if _has_header(path, sep) else None
    df = _read_csv(path, sep=sep, header=header, dtype=str, keep_default_na=False,
                   skipinitialspace=True)
    # row names written alongside a header, e.g. by DataFrame.to_csv
    if header is not None and df.shape[1] == df.shape[0] + 1:
        df = df.iloc[:, 1:]

    m = symmetrize(_to_numeric(df, path))
    d = DissimilarityMatrix(m)
    logger.info(f"Loaded distance matrix {path}: {d.n} x {d.n}")
    return d


def read_labels(path):
    """One label token per line, in matrix row order; blank lines are skipped."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            tokens = [line.strip() for line in f if line.strip()]
    except UnicodeDecodeError as e:
        raise ParseError(f"Labels file {path} is not valid UTF-8: {e}") from e
    return LabelVector(tuple(tokens))


def load_dataset(src: DatasetSource):
    """
    Load a labeled dataset described by a DatasetSource.

    Returns:
        (DissimilarityMatrix, LabelVector) with matching sizes
    """
    if src.kind is DatasetKind.FEATURE_TABLE:
        return load_feature_table(src.path, src.label_column, src.metric)

    d = load_distance_matrix(src.path)
    labels = read_labels(src.labels_path)
    if len(labels) != d.n:
        raise SizeMismatch(f"{len(labels)} labels in {src.labels_path} for a {d.n} x {d.n} matrix")
    return d, labels
