"""Reading distance tables and writing reports.

Three input layouts are understood:

* dense CSV: ``n`` rows of ``n`` distances, optional header row;
* points CSV: one coordinate vector per row, optional header row;
* lower triangle: whitespace- or comma-separated text whose ``i``-th
  non-empty line holds ``d(i, 0) ... d(i, i)`` (diagonal included).
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any

import numpy as np

from ._errors import ParseError, PseudoCentroidError
from .distance import DistanceMatrix, build_matrix, from_points
from .engine import Clustering

__all__ = [
    "read_matrix",
    "parse_rows",
    "clusters_payload",
    "dump_json",
    "write_csv",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1


def _number(cell: str, line: int):
    text = cell.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"line {line}: {text!r} is not a number") from None


def _is_header(cells: list[str]) -> bool:
    for c in cells:
        try:
            float(c)
        except ValueError:
            return True
    return False


def parse_rows(text: str, fmt: str) -> list[tuple[int, list]]:
    """Split text into numeric rows, keeping 1-based source line numbers.

    ``fmt`` is ``"csv"`` or ``"ws"`` (whitespace or commas).  A first row
    containing a non-numeric cell is taken as a header and skipped.
    """
    if fmt == "ws":
        lines = ((ln, raw.replace(",", " ").split()) for ln, raw in enumerate(text.splitlines(), start=1))
    else:
        reader = csv.reader(io.StringIO(text))
        lines = ((reader.line_num, cells) for cells in reader)
    rows = []
    first = True
    for ln, cells in lines:
        if not any(c.strip() for c in cells):
            continue
        if first and _is_header(cells):
            first = False
            continue
        first = False
        rows.append((ln, [_number(c, ln) for c in cells]))
    return rows


def _as_array(rows: list[tuple[int, list]]) -> np.ndarray:
    values = [v for _, r in rows for v in r]
    dtype = np.int64 if all(isinstance(v, int) for v in values) else float
    return np.array([r for _, r in rows], dtype=dtype)


def _dense(rows) -> np.ndarray:
    n = len(rows)
    for ln, r in rows:
        if len(r) != n:
            raise ParseError(f"line {ln}: expected {n} values, found {len(r)}")
    return _as_array(rows)


def _lower(rows) -> np.ndarray:
    n = len(rows)
    for i, (ln, r) in enumerate(rows):
        if len(r) != i + 1:
            raise ParseError(f"line {ln}: row {i} of a lower triangle needs {i + 1} values, found {len(r)}")
    ints = all(isinstance(v, int) for _, r in rows for v in r)
    d = np.zeros((n, n), dtype=np.int64 if ints else float)
    for i, (_, r) in enumerate(rows):
        d[i, : i + 1] = r
    return d + np.tril(d, -1).T


def _points(rows) -> np.ndarray:
    dim = len(rows[0][1])
    for ln, r in rows:
        if len(r) != dim:
            raise ParseError(f"line {ln}: expected {dim} coordinates, found {len(r)}")
    return _as_array(rows).astype(float)


def _detect(rows) -> str:
    lengths = [len(r) for _, r in rows]
    if lengths == list(range(1, len(rows) + 1)) and len(rows) > 1:
        return "lower"
    if all(n == len(rows) for n in lengths):
        return "dense"
    return "points"


def read_matrix(path: str | Path, fmt: str = "auto", metric: str = "euclidean") -> DistanceMatrix:
    """Load a distance table from ``path``.

    ``fmt="auto"`` picks ``lower`` when row lengths run 1, 2, ..., n, ``dense``
    when the table is square and ``points`` otherwise; coordinates that
    happen to form a square table need ``fmt="points"``.  Problems in the
    file raise :class:`ParseError` naming the offending line.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from None
    plain = fmt == "lower" or (fmt == "auto" and "," not in text)
    rows = parse_rows(text, "ws" if plain else "csv")
    if not rows:
        raise ParseError(f"{path}: no data rows")
    kind = _detect(rows) if fmt == "auto" else fmt
    try:
        if kind == "dense":
            return build_matrix(_dense(rows))
        if kind == "lower":
            return build_matrix(_lower(rows))
        if kind == "points":
            return from_points(_points(rows), metric)
    except ParseError:
        raise
    except PseudoCentroidError as exc:
        raise ParseError(f"{path}: {exc}") from None
    raise ParseError(f"unknown input format {fmt!r}")


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def clusters_payload(c: Clustering) -> list[dict[str, Any]]:
    """JSON-ready cluster list: members, centroid, tied centroids and span."""
    return [
        {
            "members": [int(j) for j in cl.members],
            "centroid": int(cl.centroid),
            "all_centroids": [int(i) for i in cl.all_centroids],
            "span": _plain(cl.span),
        }
        for cl in c.clusters
    ]


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dump_json(payload: dict, path: str | Path | None = None) -> str:
    """Serialise with sorted keys and a trailing newline; write to ``path`` if given."""
    text = json.dumps(payload, indent=2, sort_keys=True, default=_default) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _cell(v):
    v = _plain(v)
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else v


def write_csv(header: list[str], rows: list[list], path: str | Path | None = None) -> str:
    """CSV with a header row; numbers use ``repr`` so ``.`` is the decimal point."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
