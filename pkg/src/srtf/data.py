"""Datasets, CSV files and error metrics.

CSV layout: one point per row, the coordinates first and the target value in
the last column. A header row is optional. Lines starting with ``#`` carry
``key=value`` provenance and are otherwise ignored. Values are written with
17 significant digits, which round-trips every double exactly.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataFormatError, InvalidArgumentError
from .tree import rae

__all__ = ["Dataset", "load_csv", "save_csv", "read_points", "rmae", "rae", "format_float"]


def format_float(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class Dataset:
    points: np.ndarray
    values: np.ndarray | None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        if self.values is not None:
            self.values = np.asarray(self.values, dtype=np.float64).ravel()
            if len(self.values) != len(self.points):
                raise InvalidArgumentError(f"{len(self.points)} points but {len(self.values)} values")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def _parse_rows(text: str, has_header: bool, source: str):
    """Yield ``(line_number, cells)`` for data rows; collect ``#`` provenance."""
    provenance = {}
    rows = []
    header = None
    for lineno, cells in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not cells or all(not c.strip() for c in cells):
            continue
        if cells[0].lstrip().startswith("#"):
            body = ",".join(cells).lstrip()[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                provenance[k.strip()] = v.strip()
            continue
        if has_header and header is None:
            header = [c.strip() for c in cells]
            continue
        rows.append((lineno, cells))
    if not rows:
        raise DataFormatError(f"{source}: no data rows")
    return rows, header, provenance


def _to_matrix(rows, source: str) -> np.ndarray:
    width = len(rows[0][1])
    out = np.empty((len(rows), width))
    for i, (lineno, cells) in enumerate(rows):
        if len(cells) != width:
            raise DataFormatError(f"{source}: line {lineno} has {len(cells)} columns, expected {width}")
        for j, cell in enumerate(cells):
            try:
                v = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"{source}: line {lineno}, column {j + 1}: cannot parse {cell.strip()!r} as a number") from None
            if not math.isfinite(v):
                raise DataFormatError(f"{source}: line {lineno}, column {j + 1}: value is not finite")
            out[i, j] = v
    return out


def _check_duplicates(points: np.ndarray, linenos: list[int], source: str) -> None:
    seen: dict[bytes, int] = {}
    clashes = []
    for row, lineno in zip(points, linenos):
        key = (row + 0.0).tobytes()  # + 0.0 folds -0.0 onto 0.0
        if key in seen:
            clashes.append((seen[key], lineno))
        else:
            seen[key] = lineno
    if clashes:
        shown = ", ".join(f"lines {a} and {b}" for a, b in clashes[:10])
        more = f" (and {len(clashes) - 10} more)" if len(clashes) > 10 else ""
        raise DataFormatError(f"{source}: duplicate points at {shown}{more}")


def load_csv(path, has_header: bool = False, with_target: bool = True) -> Dataset:
    """Read a dataset; the last column is the target unless ``with_target`` is false."""
    source = str(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read {source}: {exc.strerror}") from None
    rows, header, provenance = _parse_rows(text, has_header, source)
    mat = _to_matrix(rows, source)
    if with_target:
        if mat.shape[1] < 2:
            raise DataFormatError(f"{source}: need at least one coordinate column and a target column")
        points, values = mat[:, :-1], mat[:, -1]
    else:
        points, values = mat, None
    _check_duplicates(points, [r[0] for r in rows], source)
    if header is not None:
        provenance.setdefault("header", ",".join(header))
    return Dataset(points, values, provenance)


def read_points(path, dim: int, has_header: bool = False) -> Dataset:
    """Read ``dim`` coordinate columns, plus a target if one more column is present."""
    source = str(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read {source}: {exc.strerror}") from None
    rows, _, provenance = _parse_rows(text, has_header, source)
    mat = _to_matrix(rows, source)
    if mat.shape[1] == dim:
        return Dataset(mat, None, provenance)
    if mat.shape[1] == dim + 1:
        return Dataset(mat[:, :-1], mat[:, -1], provenance)
    raise DataFormatError(f"{source}: {mat.shape[1]} columns, expected {dim} or {dim + 1} for a {dim}-d model")


def save_csv(dataset: Dataset, path, header: bool = False) -> None:
    lines = [f"# {k}={v}" for k, v in sorted(dataset.provenance.items()) if k != "header"]
    d = dataset.dim
    if header:
        cols = [f"x{i + 1}" for i in range(d)] + (["f"] if dataset.values is not None else [])
        lines.append(",".join(cols))
    vals = dataset.values
    for i, row in enumerate(dataset.points):
        cells = [format_float(v) for v in row]
        if vals is not None:
            cells.append(format_float(vals[i]))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def rmae(predictions, truths, return_flag: bool = False):
    """Summed absolute error over summed absolute truth.

    When every truth is zero the mean absolute error is returned instead;
    ``return_flag=True`` also returns whether that fallback was used.
    """
    p = np.asarray(predictions, dtype=float).ravel()
    t = np.asarray(truths, dtype=float).ravel()
    if p.shape != t.shape or p.size == 0:
        raise InvalidArgumentError("predictions and truths must be non-empty and equally long")
    err = np.abs(p - t)
    denom = math.fsum(np.abs(t))
    if denom > 0:
        value, fallback = math.fsum(err) / denom, False
    else:
        value, fallback = math.fsum(err) / len(err), True
    return (value, fallback) if return_flag else value
