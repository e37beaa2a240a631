"""Two-part optimizer for large sliced designs.

Part I works slice by slice (smallest slice first).  It first removes
repeated cells of the slice's coarse grid ``ceil(M / t^i)`` with within-slice
swaps, then greedily improves the criterion with within-slice swaps that
keep the grid repeat-free.  Part II does the same greedy search with
different-slice and out-slice moves.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .criteria import CriterionConfig, CriterionValue, DistanceCache
from .design import LevelMatrix, SliceSpec, ceil_div, midpoints
from .neighborhood import ExchangeMove, _cross, _within, apply_move_inplace
from .sese import _score


def repeating_count(A) -> int:
    """Number of unordered pairs of identical rows of ``A``."""
    A = np.asarray(A)
    if len(A) < 2:
        return 0
    _, counts = np.unique(A, axis=0, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


def grid_projection(M: LevelMatrix, i: int) -> np.ndarray:
    """Cell indices of every row on slice ``i``'s coarse grid, in ``1..n_i``."""
    return ceil_div(M.levels, M.spec.slice_scales[i])


def needs_dedup(spec: SliceSpec, i: int) -> bool:
    return spec.slice_sizes[i] ** spec.factors > spec.n


def should_skip_part2(spec: SliceSpec, c: float = 10.0) -> bool:
    """True when every slice grid is much sparser than the design
    (``n_i^q > c n`` for all ``i``), where part II rarely pays off."""
    return all(ni**spec.factors > c * spec.n for ni in spec.slice_sizes)


def processing_order(spec: SliceSpec) -> list[int]:
    return sorted(range(spec.u), key=lambda i: (spec.slice_sizes[i], i))


@dataclass
class TwoPartResult:
    design: LevelMatrix
    initial: CriterionValue
    value: CriterionValue
    repeat_free: dict[int, bool] = field(default_factory=dict)
    dedup_ok: bool = True
    proposals: int = 0
    accepted: int = 0
    stages: dict[str, float] = field(default_factory=dict)


class _State:
    """Mutable working copy shared by both parts."""

    def __init__(self, M: LevelMatrix, config: CriterionConfig, rng):
        self.spec = M.spec
        self.levels = M.levels.copy()
        self.cache = DistanceCache(self.spec, midpoints(self.spec, self.levels), config)
        self.rng = rng
        self.cleared: list[int] = []
        self.proposals = 0
        self.accepted = 0

    def count(self, i: int) -> int:
        return repeating_count(ceil_div(self.levels, self.spec.slice_scales[i]))

    def repeat_free(self) -> bool:
        return all(self.count(i) == 0 for i in self.cleared)

    def try_greedy(self, move: ExchangeMove | None) -> bool:
        """Apply ``move`` iff it keeps cleared grids repeat-free and strictly
        lowers the criterion."""
        if move is None:
            return False
        self.proposals += 1
        apply_move_inplace(self.levels, move)
        if not self.repeat_free():
            apply_move_inplace(self.levels, move, reverse=True)
            return False
        prop = _score(self.cache, self.spec, move)
        if prop.value.combined < self.cache.value().combined:
            self.cache.commit(prop)
            self.accepted += 1
            return True
        apply_move_inplace(self.levels, move, reverse=True)
        return False

    def dedup(self, i: int, max_tries: int) -> bool:
        """Within-slice swaps that strictly lower the repeat count of grid ``i``."""
        spec, rng = self.spec, self.rng
        cur = self.count(i)
        tries = 0
        while cur > 0 and tries < max_tries:
            tries += 1
            cells = ceil_div(self.levels, spec.slice_scales[i])
            _, inv, counts = np.unique(cells, axis=0, return_inverse=True, return_counts=True)
            repeated = np.flatnonzero(counts[inv.ravel()] > 1)
            a = int(rng.choice(repeated))
            e = int(spec.row_slice[a])
            lo, hi = spec.bounds[e], spec.bounds[e + 1]
            if hi - lo < 2:
                continue
            b = int(rng.integers(lo, hi - 1))
            b += b >= a
            j = int(rng.integers(spec.factors))
            va, vb = int(self.levels[a, j]), int(self.levels[b, j])
            move = ExchangeMove("within_slice", j, (a, b), (va, vb), (vb, va), (e, e))
            apply_move_inplace(self.levels, move)
            new = self.count(i)
            if new < cur and self.repeat_free():
                self.cache.commit(_score(self.cache, spec, move))
                cur = new
            else:
                apply_move_inplace(self.levels, move, reverse=True)
        return cur == 0

    def result(self, initial: CriterionValue, dedup_ok: bool = True) -> TwoPartResult:
        spec = self.spec
        flags = {i: self.count(i) == 0 for i in range(spec.u) if needs_dedup(spec, i)}
        return TwoPartResult(LevelMatrix(spec, self.levels), initial, self.cache.value(),
                             flags, dedup_ok, self.proposals, self.accepted)


def _run_part1(state: _State, budget: int, dedup_tries: int) -> bool:
    ok = True
    for i in processing_order(state.spec):
        if needs_dedup(state.spec, i) and dedup_tries > 0:
            if state.dedup(i, dedup_tries):
                state.cleared.append(i)
            else:
                ok = False
                warnings.warn(f"slice {i}: repeated grid cells remain after {dedup_tries} tries")
        for _ in range(budget):
            state.try_greedy(_within(state.spec, state.levels, i, state.rng))
    return ok


def _run_part2(state: _State, budget: int) -> None:
    spec, rng = state.spec, state.rng
    for i in processing_order(spec):
        for _ in range(budget):
            if i == spec.u - 1:
                kinds = ["out_slice"]
            elif rng.random() < 0.5:
                kinds = ["different_slice", "out_slice"]
            else:
                kinds = ["out_slice", "different_slice"]
            move = None
            for kind in kinds:
                move = _cross(spec, state.levels, i, rng, kind)
                if move is not None:
                    break
            if move is None:
                state.proposals += 1
                continue
            state.try_greedy(move)


def _dedup_tries(budget: int, dedup_tries: int | None) -> int:
    # a zero budget means "leave the design alone", de-duplication included
    if dedup_tries is not None:
        return dedup_tries
    return 10 * max(budget, 100) if budget > 0 else 0


def _cleared_scales(state: _State) -> None:
    state.cleared = [i for i in range(state.spec.u) if needs_dedup(state.spec, i) and state.count(i) == 0]


def part1(M0: LevelMatrix, config: CriterionConfig = CriterionConfig(), budget: int = 100,
          seed=None, dedup_tries: int | None = None) -> TwoPartResult:
    """De-duplicate each slice grid, then greedy within-slice improvement.

    ``budget`` proposals per slice for the greedy phase; de-duplication may
    use up to ``dedup_tries`` (default ``10 * max(budget, 100)``) swaps per
    slice before giving up with a warning; with ``budget == 0`` the default
    is no de-duplication at all.
    """
    state = _State(M0, config, np.random.default_rng(seed))
    initial = state.cache.value()
    ok = _run_part1(state, budget, _dedup_tries(budget, dedup_tries))
    return state.result(initial, ok)


def part2(M: LevelMatrix, config: CriterionConfig = CriterionConfig(), budget: int = 100,
          seed=None) -> TwoPartResult:
    """Greedy different-/out-slice improvement keeping repeat-free grids repeat-free."""
    state = _State(M, config, np.random.default_rng(seed))
    _cleared_scales(state)
    initial = state.cache.value()
    _run_part2(state, budget)
    return state.result(initial)


def twopart_optimize(M0: LevelMatrix, config: CriterionConfig = CriterionConfig(), budget: int = 100,
                     seed=None, run_part2: bool | None = None,
                     dedup_tries: int | None = None) -> TwoPartResult:
    """Part I followed by part II (skipped when ``should_skip_part2`` and
    ``run_part2`` is left as ``None``).

    ``result.stages`` holds the combined value after each stage that ran.
    """
    state = _State(M0, config, np.random.default_rng(seed))
    initial = state.cache.value()
    stages = {"initial": initial.combined}
    ok = _run_part1(state, budget, _dedup_tries(budget, dedup_tries))
    stages["part1"] = state.cache.value().combined
    if run_part2 is None:
        run_part2 = not should_skip_part2(M0.spec)
    if run_part2:
        _run_part2(state, budget)
        stages["part2"] = state.cache.value().combined
    res = state.result(initial, ok)
    res.stages = stages
    return res
