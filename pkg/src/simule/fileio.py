"""Plain CSV/JSON persistence for matrices, data blocks and run metadata.

Numbers are written with 10 significant digits, comma separated, LF line
endings and no header unless feature names are requested.
"""
import csv
import json
import os

import numpy as np

from .covariance import TaskData
from .errors import DataError

FLOAT_FORMAT = "%.10g"


def format_row(values):
    return ",".join(FLOAT_FORMAT % v for v in values)


def write_matrix(path, matrix, header=None):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w", newline="\n") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        for row in matrix:
            fh.write(format_row(row) + "\n")


def write_support(path, support):
    support = np.asarray(support, dtype=bool).astype(int)
    with open(path, "w", newline="\n") as fh:
        for row in support:
            fh.write(",".join(str(v) for v in row) + "\n")


def _parse_rows(path):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise DataError(f"{path} is empty")
    return rows


def _is_numeric(row):
    try:
        [float(v) for v in row]
    except ValueError:
        return False
    return True


def read_matrix_with_header(path):
    """Return ``(matrix, feature_names_or_None)``; a non-numeric first row is a header."""
    rows = _parse_rows(path)
    header = None
    if not _is_numeric(rows[0]):
        header = [v.strip() for v in rows[0]]
        rows = rows[1:]
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DataError(f"{path}: ragged rows (widths {sorted(widths)})")
    if header is not None and len(header) != widths.pop():
        raise DataError(f"{path}: header width does not match data")
    try:
        matrix = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    if not np.all(np.isfinite(matrix)):
        raise DataError(f"{path}: non-finite entries")
    return matrix, header


def read_matrix(path):
    return read_matrix_with_header(path)[0]


def read_task(path, task_id=1):
    matrix, header = read_matrix_with_header(path)
    return TaskData(matrix, feature_names=header, task_id=task_id)


def write_json(path, payload):
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
