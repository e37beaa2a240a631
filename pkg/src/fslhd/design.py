"""Problem-instance types and sliced-structure checks.

A flexible sliced Latin hypercube (FSLH) is stored as an ``n x q`` integer
matrix of levels in ``{1, ..., L}``.  Rows are grouped slice by slice in
ascending slice order, so slice membership is positional.  Row and column
indices are 0-based; slice numbers are 0-based in the library and 1-based
only in files written by the CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

JitterMode = Literal["midpoint", "uniform"]


class StructureError(ValueError):
    """Raised when a matrix does not fit its slice specification."""


def ceil_div(a, b):
    """Integer ceiling ``ceil(a / b)``; works elementwise on integer arrays."""
    return -(-a // b)


@dataclass(frozen=True)
class SliceSpec:
    """Slice run sizes ``n_1..n_u`` and factor count ``q``.

    Everything else (``n``, ``L``, the per-slice and whole-design level
    scales, the row boundaries) is derived.
    """

    slice_sizes: tuple[int, ...]
    factors: int

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.slice_sizes)
        object.__setattr__(self, "slice_sizes", sizes)
        if len(sizes) == 0:
            raise ValueError("at least one slice is required")
        if any(s < 1 for s in sizes):
            raise ValueError(f"slice sizes must be positive, got {sizes}")
        if int(self.factors) < 1:
            raise ValueError(f"factors must be positive, got {self.factors}")
        object.__setattr__(self, "factors", int(self.factors))

    @cached_property
    def u(self) -> int:
        return len(self.slice_sizes)

    @cached_property
    def n(self) -> int:
        return sum(self.slice_sizes)

    @cached_property
    def L(self) -> int:
        return math.lcm(*self.slice_sizes, self.n)

    @cached_property
    def scale(self) -> int:
        """Whole-design level scale ``t' = L / n``."""
        return self.L // self.n

    @cached_property
    def slice_scales(self) -> tuple[int, ...]:
        """Per-slice level scales ``t^i = L / n_i``."""
        return tuple(self.L // s for s in self.slice_sizes)

    @cached_property
    def bounds(self) -> tuple[int, ...]:
        """Cumulative row boundaries ``r_0 = 0, r_1, ..., r_u = n``."""
        return (0, *np.cumsum(self.slice_sizes).tolist())

    def rows(self, i: int) -> range:
        """Row indices of slice ``i``."""
        return range(self.bounds[i], self.bounds[i + 1])

    @cached_property
    def row_slice(self) -> np.ndarray:
        """Slice index of every row, as an int array of length ``n``."""
        out = np.repeat(np.arange(self.u), self.slice_sizes)
        out.flags.writeable = False
        return out

    @cached_property
    def row_scales(self) -> np.ndarray:
        """Slice level scale ``t^i`` of every row."""
        out = np.asarray(self.slice_scales, dtype=np.int64)[self.row_slice]
        out.flags.writeable = False
        return out

    @property
    def weights(self) -> np.ndarray:
        """Slice weights ``n_i / n``."""
        return np.asarray(self.slice_sizes, dtype=float) / self.n

    def __str__(self):
        sizes = ",".join(map(str, self.slice_sizes))
        return f"FSLHD({sizes};{self.u},{self.factors})"


def slice_of_row(spec: SliceSpec, row: int) -> int:
    """Return the slice holding ``row`` (both 0-based)."""
    if not 0 <= row < spec.n:
        raise IndexError(f"row {row} out of range for n={spec.n}")
    return int(np.searchsorted(spec.bounds, row, side="right")) - 1


def _is_permutation(values: np.ndarray, k: int) -> bool:
    return values.shape == (k,) and np.array_equal(np.sort(values), np.arange(1, k + 1))


def structure_violations(spec: SliceSpec, levels: np.ndarray) -> list[tuple[int | None, int]]:
    """List every ``(slice, column)`` whose Latin property fails.

    ``slice`` is ``None`` for a whole-design failure.  An empty list means
    the matrix is a valid FSLH.
    """
    levels = np.asarray(levels)
    if levels.shape != (spec.n, spec.factors):
        raise StructureError(
            f"levels have shape {levels.shape}, expected {(spec.n, spec.factors)}"
        )
    bad = []
    for j in range(spec.factors):
        col = levels[:, j]
        if col.min() < 1 or col.max() > spec.L:
            bad.append((None, j))
            continue
        if not _is_permutation(ceil_div(col, spec.scale), spec.n):
            bad.append((None, j))
        for i in range(spec.u):
            lo, hi = spec.bounds[i], spec.bounds[i + 1]
            if not _is_permutation(ceil_div(col[lo:hi], spec.slice_scales[i]), spec.slice_sizes[i]):
                bad.append((i, j))
    return bad


def validate_sliced_structure(M: LevelMatrix) -> bool:
    """True iff every column is a Latin hypercube column for the whole
    design and for every slice, at level scale."""
    return not structure_violations(M.spec, M.levels)


@dataclass(frozen=True, eq=False)
class LevelMatrix:
    """An FSLH: integer levels with their slice specification.

    The stored array is read-only; optimizers work on copies.
    """

    spec: SliceSpec
    levels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.levels, dtype=np.int64, copy=True)
        if arr.ndim == 1 and self.spec.factors == 1:
            arr = arr[:, None]
        if arr.shape != (self.spec.n, self.spec.factors):
            raise StructureError(
                f"levels have shape {arr.shape}, expected {(self.spec.n, self.spec.factors)}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "levels", arr)

    def __eq__(self, other):
        if not isinstance(other, LevelMatrix):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.levels, other.levels)

    def __hash__(self):
        return hash((self.spec, self.levels.tobytes()))

    def slice(self, i: int) -> np.ndarray:
        return self.levels[self.spec.bounds[i]:self.spec.bounds[i + 1]]

    def is_valid(self) -> bool:
        return validate_sliced_structure(self)

    def to_design(self, jitter: JitterMode = "midpoint", seed=None) -> DesignMatrix:
        return to_design(self, jitter, seed)


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Design points in ``(0, 1]^q`` with the slice layout of their FSLH."""

    spec: SliceSpec
    points: np.ndarray
    jitter_mode: JitterMode = "midpoint"

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.shape != (self.spec.n, self.spec.factors):
            raise StructureError(
                f"points have shape {pts.shape}, expected {(self.spec.n, self.spec.factors)}"
            )
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def slice(self, i: int) -> np.ndarray:
        return self.points[self.spec.bounds[i]:self.spec.bounds[i + 1]]

    def structure_violations(self) -> list[tuple[int | None, int]]:
        """Interval-occupancy check on the real-valued points.

        A point ``x`` falls into interval ``ceil(x * k)`` of a ``k``-way
        split of ``(0, 1]``.
        """
        spec = self.spec
        pts = self.points
        bad = []
        for j in range(spec.factors):
            if np.any(pts[:, j] <= 0) or np.any(pts[:, j] > 1):
                bad.append((None, j))
                continue
            if not _is_permutation(_bins(pts[:, j], spec.n), spec.n):
                bad.append((None, j))
            for i in range(spec.u):
                k = spec.slice_sizes[i]
                if not _is_permutation(_bins(self.slice(i)[:, j], k), k):
                    bad.append((i, j))
        return bad


def _bins(x: np.ndarray, k: int) -> np.ndarray:
    b = np.ceil(x * k).astype(np.int64)
    return np.clip(b, 1, k)


def to_design(M: LevelMatrix, jitter: JitterMode = "midpoint", seed=None) -> DesignMatrix:
    """Map levels to points via ``d = (m - eps) / L``.

    ``midpoint`` uses ``eps = 1/2`` everywhere (the setting used for every
    criterion evaluation); ``uniform`` draws ``eps ~ U(0, 1)`` per entry
    from ``numpy.random.default_rng(seed)``.
    """
    L = M.spec.L
    if jitter == "midpoint":
        eps = 0.5
    elif jitter == "uniform":
        rng = np.random.default_rng(seed)
        eps = rng.random(M.levels.shape)
        # open interval: eps = 0 would put the point on a bin edge
        eps[eps == 0.0] = 0.5
    else:
        raise ValueError(f"unknown jitter mode {jitter!r}")
    return DesignMatrix(M.spec, (M.levels - eps) / L, jitter)


def midpoints(spec: SliceSpec, levels: np.ndarray) -> np.ndarray:
    """Midpoint coordinates of a raw level array (no validation)."""
    return (np.asarray(levels, dtype=float) - 0.5) / spec.L
