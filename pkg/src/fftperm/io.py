"""CSV/TSV ingestion for the command line.

Paired tests read the first two columns as x and y. Grouped tests read long
format: a numeric value column followed by a group label column; groups are
ordered by first appearance. A header row is detected when its value cell(s)
do not parse as numbers. The delimiter is a tab if the first line contains
one, otherwise a comma.
"""

from __future__ import annotations

import csv
import io as _io

import numpy as np


class ParseError(ValueError):
    pass


def _rows(text: str):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("input is empty")
    delim = "\t" if "\t" in lines[0] else ","
    rows = list(csv.reader(_io.StringIO("\n".join(lines)), delimiter=delim))
    return [[c.strip() for c in row] for row in rows]


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _parse_float(cell: str, r: int, c: int) -> float:
    try:
        x = float(cell)
    except ValueError:
        raise ParseError(f"row {r}, column {c}: non-numeric cell {cell!r}") from None
    if not np.isfinite(x):
        raise ParseError(f"row {r}, column {c}: non-finite value {cell!r}")
    return x


def read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from None


def parse_paired(text: str) -> tuple[np.ndarray, np.ndarray]:
    rows = _rows(text)
    start = 0 if all(_is_number(c) for c in rows[0][:2]) else 1
    xs, ys = [], []
    for r, row in enumerate(rows[start:], start=start + 1):
        if len(row) < 2:
            raise ParseError(f"row {r}: expected at least 2 columns, found {len(row)}")
        xs.append(_parse_float(row[0], r, 1))
        ys.append(_parse_float(row[1], r, 2))
    if not xs:
        raise ParseError("no data rows")
    return np.asarray(xs), np.asarray(ys)


def parse_grouped(text: str) -> tuple[list[str], list[np.ndarray]]:
    rows = _rows(text)
    start = 0 if _is_number(rows[0][0]) else 1
    groups: dict[str, list[float]] = {}
    for r, row in enumerate(rows[start:], start=start + 1):
        if len(row) < 2:
            raise ParseError(f"row {r}: expected (value, group), found {len(row)} column(s)")
        groups.setdefault(row[1], []).append(_parse_float(row[0], r, 1))
    if not groups:
        raise ParseError("no data rows")
    return list(groups), [np.asarray(g) for g in groups.values()]
