"""CSV and JSON helpers with exact float round-tripping."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CsvParseError
from .model import Dataset, GroupStructure


def fmt(x) -> str:
    """Shortest text that parses back to the same double (or an integer)."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def read_table(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Numeric CSV with a header row."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise CsvParseError(f"cannot read {path}: {exc}") from None
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise CsvParseError(f"{path}: need a header and at least one data row")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise CsvParseError(f"{path}: duplicate column names")
    values = np.empty((len(rows) - 1, len(header)))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise CsvParseError(f"{path}:{i}: expected {len(header)} fields, got {len(row)}")
        for j, cell in enumerate(row):
            try:
                values[i - 2, j] = float(cell)
            except ValueError:
                raise CsvParseError(f"{path}:{i}: non-numeric value {cell!r}") from None
    if not np.all(np.isfinite(values)):
        raise CsvParseError(f"{path}: non-finite values")
    return header, values


def read_dataset(path: str | Path, response: str) -> tuple[Dataset, list[str]]:
    header, values = read_table(path)
    if response not in header:
        raise CsvParseError(f"{path}: response column {response!r} not found")
    j = header.index(response)
    names = [h for k, h in enumerate(header) if k != j]
    X = np.delete(values, j, axis=1)
    if X.shape[1] == 0:
        raise CsvParseError(f"{path}: no covariate columns")
    return Dataset(X, values[:, j]), names


def read_groups(path: str | Path, p: int) -> GroupStructure:
    """Group file: one ``variable_index,group_index`` line per covariate (1-based)."""
    assignment = np.full(p, -1, dtype=np.int64)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise CsvParseError(f"cannot read {path}: {exc}") from None
    for line, row in enumerate(rows, start=1):
        try:
            var, grp = (int(c) for c in row)
        except ValueError:
            if line == 1:
                continue  # header
            raise CsvParseError(f"{path}:{line}: expected two integers") from None
        if not 1 <= var <= p or grp < 1:
            raise CsvParseError(f"{path}:{line}: index out of range")
        if assignment[var - 1] != -1:
            raise CsvParseError(f"{path}:{line}: variable {var} listed twice")
        assignment[var - 1] = grp - 1
    if np.any(assignment < 0):
        missing = (np.flatnonzero(assignment < 0) + 1).tolist()
        raise CsvParseError(f"{path}: variables {missing} have no group")
    _, relabel = np.unique(assignment, return_inverse=True)
    if not np.array_equal(np.unique(assignment), np.arange(relabel.max() + 1)):
        raise CsvParseError(f"{path}: group indices must be 1..G without gaps")
    return GroupStructure(relabel)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path: str | Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
