"""Structure-preserving neighbours of an FSLH.

Three moves keep every column Latin for the whole design and for each
slice:

* within-slice: swap two entries of one slice;
* different-slice: swap an entry ``b`` of slice ``i`` with an entry ``c`` of
  a later slice, where ``c`` lies in ``b``'s slice-``i`` bin and ``b`` lies in
  ``c``'s bin of the other slice;
* out-slice: replace ``b`` by an unused level ``c`` from the same slice bin
  and the same whole-design bin.

The admissible partners of ``b`` are ``rho(b)`` (different-slice) and
``sigma(b)`` (out-slice); ``tau(b)`` is their union.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .design import LevelMatrix, SliceSpec, ceil_div

MoveKind = Literal["within_slice", "different_slice", "out_slice"]


@dataclass(frozen=True)
class ExchangeMove:
    kind: MoveKind
    column: int
    rows: tuple[int, ...]
    old: tuple[int, ...]
    new: tuple[int, ...]
    slices: tuple[int, ...]


@dataclass(frozen=True)
class TauSet:
    rho: frozenset[int]
    sigma: frozenset[int]

    @property
    def all(self) -> frozenset[int]:
        return self.rho | self.sigma


def apply_move_inplace(levels: np.ndarray, move: ExchangeMove, reverse: bool = False) -> np.ndarray:
    vals = move.old if reverse else move.new
    j = move.column
    for r, v in zip(move.rows, vals):
        levels[r, j] = v
    return levels


def apply_move(M: LevelMatrix, move: ExchangeMove) -> LevelMatrix:
    return LevelMatrix(M.spec, apply_move_inplace(M.levels.copy(), move))


def revert_move(M: LevelMatrix, move: ExchangeMove) -> LevelMatrix:
    return LevelMatrix(M.spec, apply_move_inplace(M.levels.copy(), move, reverse=True))


def _sigma_range(spec: SliceSpec, b: int, i: int) -> tuple[int, int]:
    """Bounds ``lo..hi`` of the slice-``i`` bin of ``b`` intersected with its
    whole-design bin; every level there except ``b`` is unused."""
    ti, tp = spec.slice_scales[i], spec.scale
    bin_i, bin_w = -(-b // ti), -(-b // tp)
    return max((bin_i - 1) * ti, (bin_w - 1) * tp) + 1, min(bin_i * ti, bin_w * tp)


def _rho(spec: SliceSpec, col: np.ndarray, i: int, b: int) -> list[tuple[int, int]]:
    """``(level, row)`` pairs of later rows swappable with ``b``."""
    if i >= spec.u - 1:
        return []
    ti = spec.slice_scales[i]
    start = spec.bounds[i + 1]
    later = col[start:]
    # same slice-i bin first, then the partner's own slice bin
    top = -(-b // ti) * ti
    idx = ((later > top - ti) & (later <= top)).nonzero()[0]
    scales = spec.row_scales
    out = []
    for x, c in zip(idx.tolist(), later[idx].tolist()):
        t = int(scales[start + x])
        if -(-c // t) == -(-b // t):
            out.append((c, start + x))
    return out


def _tau(spec: SliceSpec, col: np.ndarray, i: int, p: int):
    """Partners of ``b = col[p]`` (row ``p`` in slice ``i``).

    Returns ``(rho, sigma)`` with ``rho`` a list of ``(level, row)`` pairs.
    Both come from ``R``, the slice-``i`` bin of ``b``:

    * a member of ``R`` held by a later row ``r2`` is admissible iff ``b`` and
      it also share the bin of ``r2``'s slice (the whole-design condition is
      untouched by a swap);
    * a member of ``R`` not in the column is admissible iff it shares ``b``'s
      whole-design bin (all other whole-design bins are occupied).
    """
    b = int(col[p])
    lo, hi = _sigma_range(spec, b, i)
    return _rho(spec, col, i, b), [c for c in range(lo, hi + 1) if c != b]


def _find_row(spec: SliceSpec, col: np.ndarray, i: int, b: int) -> int:
    lo, hi = spec.bounds[i], spec.bounds[i + 1]
    hits = np.flatnonzero(col[lo:hi] == b)
    if hits.size == 0:
        raise ValueError(f"level {b} is not in slice {i} of this column")
    return lo + int(hits[0])


def tau_candidates(M: LevelMatrix, i: int, j: int, b: int) -> TauSet:
    """Exchange partners of level ``b`` in slice ``i``, column ``j``."""
    col = M.levels[:, j]
    p = _find_row(M.spec, col, i, b)
    rho, sigma = _tau(M.spec, col, i, p)
    return TauSet(frozenset(c for c, _ in rho), frozenset(sigma))


def _within(spec, levels, i, rng, column=None):
    lo, hi = spec.bounds[i], spec.bounds[i + 1]
    if hi - lo < 2:
        return None
    j = int(rng.integers(spec.factors)) if column is None else column
    # two distinct rows of the slice, uniformly
    r = int(rng.integers(lo, hi))
    s = int(rng.integers(lo, hi - 1))
    s += s >= r
    a, b = int(levels[r, j]), int(levels[s, j])
    return ExchangeMove("within_slice", j, (r, s), (a, b), (b, a), (i, i))


def _cross(spec, levels, i, rng, kind, column=None, attempts=None):
    if kind == "different_slice" and i == spec.u - 1:
        return None
    if kind == "out_slice" and spec.scale == 1:
        return None  # L = n: every level is used, nothing to replace with
    lo, hi = spec.bounds[i], spec.bounds[i + 1]
    attempts = 10 * spec.factors if attempts is None else attempts
    for _ in range(attempts):
        j = int(rng.integers(spec.factors)) if column is None else column
        p = int(rng.integers(lo, hi))
        b = int(levels[p, j])
        if kind == "different_slice":
            rho = _rho(spec, levels[:, j], i, b)
            if rho:
                c, r2 = rho[int(rng.integers(len(rho)))]
                return ExchangeMove(kind, j, (p, r2), (b, c), (c, b), (i, int(spec.row_slice[r2])))
        else:
            s_lo, s_hi = _sigma_range(spec, b, i)
            if s_hi > s_lo:
                # uniform over s_lo..s_hi without b
                c = int(rng.integers(s_lo, s_hi))
                c += c >= b
                return ExchangeMove(kind, j, (p,), (b,), (c,), (i,))
    return None


def within_slice_neighbor(M: LevelMatrix, i: int, rng: np.random.Generator, column: int | None = None):
    """Random swap of two entries of slice ``i``; ``None`` if ``n_i < 2``."""
    return _within(M.spec, M.levels, i, rng, column)


def different_slice_neighbor(M: LevelMatrix, i: int, rng: np.random.Generator,
                             column: int | None = None, attempts: int | None = None):
    """Random different-slice swap out of slice ``i``.

    Draws up to ``attempts`` (default ``10 q``) random ``b`` and returns
    ``None`` if none of them has a partner in ``rho(b)``.
    """
    return _cross(M.spec, M.levels, i, rng, "different_slice", column, attempts)


def out_slice_neighbor(M: LevelMatrix, i: int, rng: np.random.Generator,
                       column: int | None = None, attempts: int | None = None):
    """Random out-slice replacement in slice ``i``; ``None`` if none found."""
    return _cross(M.spec, M.levels, i, rng, "out_slice", column, attempts)


def _count(spec: SliceSpec, levels: np.ndarray, i: int) -> tuple[int, int, int]:
    ni = spec.slice_sizes[i]
    n_in = spec.factors * ni * (ni - 1) // 2
    n_diff = n_out = 0
    for j in range(spec.factors):
        col = levels[:, j]
        for p in spec.rows(i):
            rho, sigma = _tau(spec, col, i, p)
            n_diff += len(rho)
            n_out += len(sigma)
    return n_in, n_diff, n_out


def count_neighbors(M: LevelMatrix, i: int) -> tuple[int, int, int]:
    """``(n_in_slice, n_diff_slice, n_out_slice)`` for slice ``i``."""
    return _count(M.spec, M.levels, i)
