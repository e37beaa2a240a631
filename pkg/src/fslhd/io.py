"""CSV formats for designs and level matrices.

Design files have the header ``slice,x1,...,xq``; level files have
``slice,m1,...,mq``.  Slice labels are 1-based, rows are slice-major and
coordinates are written with 12 significant digits.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .design import DesignMatrix, LevelMatrix, SliceSpec


class FormatError(ValueError):
    pass


def format_design(D: DesignMatrix) -> str:
    q = D.spec.factors
    lines = ["slice," + ",".join(f"x{j + 1}" for j in range(q))]
    for label, row in zip(D.spec.row_slice + 1, D.points):
        lines.append(f"{label}," + ",".join(f"{v:.12g}" for v in row))
    return "\n".join(lines) + "\n"


def format_levels(M: LevelMatrix) -> str:
    q = M.spec.factors
    lines = ["slice," + ",".join(f"m{j + 1}" for j in range(q))]
    for label, row in zip(M.spec.row_slice + 1, M.levels):
        lines.append(f"{label}," + ",".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


def write_design(path, D: DesignMatrix) -> None:
    Path(path).write_text(format_design(D))


def write_levels(path, M: LevelMatrix) -> None:
    Path(path).write_text(format_levels(M))


def parse_table(text: str) -> tuple[str, np.ndarray, np.ndarray]:
    """Parse either file kind.

    Returns ``(kind, labels, values)`` with ``kind`` in ``{"design",
    "levels"}``, 1-based ``labels`` and the value matrix.  Rows are returned
    in file order, whether or not they are grouped by slice.
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise FormatError("empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "slice":
        raise FormatError(f"bad header {header}")
    prefix = header[1][:1]
    kinds = {"x": "design", "m": "levels"}
    if prefix not in kinds or header[1:] != [f"{prefix}{j + 1}" for j in range(len(header) - 1)]:
        raise FormatError(f"bad header {header}")
    body = rows[1:]
    if not body:
        raise FormatError("no data rows")
    try:
        labels = np.array([int(r[0]) for r in body])
        if prefix == "x":
            values = np.array([[float(v) for v in r[1:]] for r in body])
        else:
            values = np.array([[int(v) for v in r[1:]] for r in body], dtype=np.int64)
    except (ValueError, IndexError) as exc:
        raise FormatError(f"malformed row: {exc}") from None
    if values.ndim != 2 or values.shape[1] != len(header) - 1:
        raise FormatError("ragged rows")
    if labels.min() < 1:
        raise FormatError("slice labels must be 1-based")
    return kinds[prefix], labels, values


def spec_from_labels(labels: np.ndarray, factors: int) -> SliceSpec:
    u = int(labels.max())
    sizes = tuple(int((labels == i).sum()) for i in range(1, u + 1))
    if min(sizes) == 0:
        raise FormatError(f"slice labels skip a slice: sizes {sizes}")
    return SliceSpec(sizes, factors)


def group_rows(labels: np.ndarray, values: np.ndarray):
    """Stable re-ordering into slice-major layout."""
    order = np.argsort(labels, kind="stable")
    return labels[order], values[order]


def read_levels(path) -> LevelMatrix:
    kind, labels, values = parse_table(Path(path).read_text())
    if kind != "levels":
        raise FormatError(f"{path} is a design file, not a levels file")
    if np.any(np.diff(labels) < 0):
        raise FormatError("levels file rows are not grouped by slice")
    return LevelMatrix(spec_from_labels(labels, values.shape[1]), values)


def read_design(path) -> DesignMatrix:
    kind, labels, values = parse_table(Path(path).read_text())
    if kind != "design":
        raise FormatError(f"{path} is a levels file, not a design file")
    labels, values = group_rows(labels, values)
    return DesignMatrix(spec_from_labels(labels, values.shape[1]), values)
