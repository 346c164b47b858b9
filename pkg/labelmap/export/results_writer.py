"""
LabelMap - Results Writer
Write and read run artifacts: map coordinates CSV, optimizer trace and
quality report.
"""

import logging
import math

import pandas as pd

from labelmap.config import COORDINATE_DECIMALS, COORDINATE_SIGNIFICANT_DIGITS
from labelmap.errors import InvalidConfig, ParseError, SizeMismatch
from labelmap.mapping.geometry import Embedding, LabelVector, as_labels
from labelmap.mapping.metrics import CSV_COLUMNS, MapQualityReport
from labelmap.mapping.optimizer import RunTrace

logger = logging.getLogger(__name__)

EMBEDDING_COLUMNS = ['index', 'x', 'y', 'label']


def format_coordinate(value):
    """
    Fixed-point text for one coordinate: 8 decimals for |v| >= 1 and zero,
    9 significant digits below 1, scientific notation below 1e-9.
    """
    value = float(value)
    if value == 0:
        return f"{0.0:.{COORDINATE_DECIMALS}f}"
    magnitude = abs(value)
    if magnitude >= 1:
        return f"{value:.{COORDINATE_DECIMALS}f}"
    if magnitude < 1e-9:
        return f"{value:.{COORDINATE_SIGNIFICANT_DIGITS - 1}e}"
    decimals = COORDINATE_SIGNIFICANT_DIGITS - 1 - math.floor(math.log10(magnitude))
    return f"{value:.{decimals}f}"


def _write_text(path, text):
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)


def write_embedding(e: Embedding, labels, path):
    """Coordinates CSV with header index,x,y,label; rows in input order."""
    labels = as_labels(labels)
    if len(labels) != e.n:
        raise SizeMismatch(f"{len(labels)} labels for {e.n} points")

    frame = pd.DataFrame({
        'index': range(e.n),
        'x': [format_coordinate(v) for v in e.y[:, 0]],
        'y': [format_coordinate(v) for v in e.y[:, 1]],
        'label': [str(label) for label in labels.labels],
    }, columns=EMBEDDING_COLUMNS)
    frame.to_csv(path, index=False, lineterminator='\n')
    logger.info(f"Wrote {e.n} map coordinates to {path}")


def read_embedding(path):
    """
    Read a coordinates CSV written by write_embedding.

    Returns:
        (Embedding, LabelVector)
    """
    try:
        frame = pd.read_csv(path, dtype={'label': str}, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError(f"Cannot parse coordinates file {path}: {str(e).strip()}") from e

    if list(frame.columns) != EMBEDDING_COLUMNS:
        raise ParseError(f"Coordinates file {path} must have columns {','.join(EMBEDDING_COLUMNS)}, "
                         f"got {','.join(map(str, frame.columns))}")
    if frame.empty:
        raise ParseError(f"Coordinates file {path} has no rows")

    try:
        index = frame['index'].astype(int).tolist()
        coords = frame[['x', 'y']].astype(float).to_numpy()
    except ValueError as e:
        raise ParseError(f"Non-numeric value in coordinates file {path}: {e}") from e
    if index != list(range(len(frame))):
        raise ParseError(f"Coordinates file {path} rows must be indexed 0..{len(frame) - 1} in order")

    return Embedding(coords), LabelVector(tuple(frame['label']))


def write_trace(trace: RunTrace, path, metadata=None):
    _write_text(path, trace.to_text(metadata))
    logger.info(f"Wrote trace ({len(trace.records)} epochs) to {path}")


def read_trace(path):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return RunTrace.from_text(f.read())
    except ValueError as e:
        raise ParseError(f"Cannot parse trace {path}: {e}") from e


def report_rows_csv(rows):
    """
    CSV text for one or more reports.

    Args:
        rows: list of MapQualityReport, or of (method, MapQualityReport)
              pairs to prepend a method column
    """
    with_method = bool(rows) and isinstance(rows[0], tuple)
    columns = (['method'] if with_method else []) + list(CSV_COLUMNS)
    lines = [','.join(columns)]
    for row in rows:
        if with_method:
            method, report = row
            lines.append(','.join([str(method)] + report.to_csv_row()))
        else:
            lines.append(','.join(row.to_csv_row()))
    return '\n'.join(lines) + '\n'


def write_report(report: MapQualityReport, path, fmt='text'):
    """Write a quality report as key=value text or a one-row CSV."""
    if fmt == 'csv':
        _write_text(path, report_rows_csv([report]))
    elif fmt == 'text':
        _write_text(path, report.to_text())
    else:
        raise InvalidConfig(f"Unknown report format: {fmt}")
    logger.info(f"Wrote quality report to {path}")


def write_comparison(rows, path):
    """One CSV row per (method, report) pair."""
    _write_text(path, report_rows_csv(rows))
    logger.info(f"Wrote comparison of {len(rows)} methods to {path}")
