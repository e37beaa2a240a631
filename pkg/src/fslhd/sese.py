"""Sliced enhanced stochastic evolutionary (SESE) optimizer.

Three nested loops: slices are optimized one after another, each one
starting from the best design found so far; per slice an outer loop tunes
the acceptance threshold; the inner loop proposes a batch of neighbours in
one column, keeps the best of them and accepts it when

    csm(candidate) - csm(current) <= threshold * U(0, 1).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .criteria import CriterionConfig, DistanceCache
from .design import LevelMatrix, SliceSpec, midpoints, structure_violations
from .neighborhood import ExchangeMove, _count, _cross, _within, apply_move_inplace


@dataclass(frozen=True)
class SeseParams:
    P: int = 20
    N: int = 10
    th0_factor: float = 0.005
    beta1: float = 0.8
    beta2: float = 0.7
    beta3: float = 0.9
    tol: float = 0.1
    seed: int | None = None
    attempts: int | None = None  # cross-slice retry budget, default 10 q
    check_structure: bool = False

    def __post_init__(self):
        if not 0 <= self.P <= 100:
            raise ValueError(f"P must be in [0, 100], got {self.P}")
        if self.N < 0:
            raise ValueError(f"N must be non-negative, got {self.N}")
        for name in ("beta1", "beta2", "beta3"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.th0_factor <= 0:
            raise ValueError("th0_factor must be positive")


@dataclass
class TraceRecord:
    slice: int
    outer: int
    inner: int
    current: float
    best: float
    threshold: float
    gap: float | None
    draw: float | None
    accepted: bool
    n_ac: int
    n_im: int
    flag_im: int


@dataclass
class OptimizerTrace:
    records: list[TraceRecord] = field(default_factory=list)
    initial: float | None = None
    final: float | None = None

    def best_sequence(self) -> list[float]:
        return [r.best for r in self.records]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(asdict(r)) + "\n" for r in self.records)


def inner_budgets(n_in: int, n_diff: int, n_out: int, last: bool = False) -> tuple[int, int, int]:
    """``(I1, I2, I3)`` from neighbour counts.

    ``I1 = min(ceil(n_in / 5), 50)``; ``I2 + I3 = min(n_diff + n_out, 50)``
    split in proportion to the two counts, ``I2`` rounded down.  The last
    slice has no different-slice moves.
    """
    I1 = min(math.ceil(n_in / 5), 50)
    total = min(n_diff + n_out, 50)
    if last or total == 0:
        return I1, 0, total
    I2 = total * n_diff // (n_diff + n_out)
    return I1, I2, total - I2


def _budgets(spec: SliceSpec, levels: np.ndarray, i: int) -> tuple[int, int, int]:
    return inner_budgets(*_count(spec, levels, i), last=i == spec.u - 1)


def derive_inner_budgets(M: LevelMatrix, i: int) -> tuple[int, int, int]:
    """Candidates per inner step for slice ``i`` of ``M``."""
    return _budgets(M.spec, M.levels, i)


def update_threshold(th: float, flag_im: bool, p_ac: float, p_im: float, rising: bool,
                     params: SeseParams) -> tuple[float, bool]:
    """One outer-loop threshold update.

    ``rising`` carries the exploration direction across outer iterations:
    raise the threshold until more than 80% of steps are accepted, then lower
    it until fewer than 10% are.
    """
    if flag_im:
        if p_ac > 0.1 and p_im < p_ac:
            return params.beta1 * th, True
        if p_ac > 0.1 and p_im == p_ac:
            return th, True
        return th / params.beta1, True
    if rising:
        if p_ac > 0.8:
            return params.beta3 * th, False
        return th / params.beta2, True
    if p_ac < 0.1:
        return th / params.beta2, True
    return params.beta3 * th, False


def _score(cache: DistanceCache, spec: SliceSpec, move: ExchangeMove):
    if move.kind == "out_slice":
        return cache.propose_replace(move.rows[0], move.column, (move.new[0] - 0.5) / spec.L)
    return cache.propose_swap(move.rows[0], move.rows[1], move.column)


def _candidates(spec, levels, i, col, budgets, rng, attempts):
    I1, I2, I3 = budgets
    moves = []
    short = 0
    for kind, count in (("different_slice", I2), ("out_slice", I3)):
        for _ in range(count):
            mv = _cross(spec, levels, i, rng, kind, column=col, attempts=attempts)
            if mv is None:
                short += 1
            else:
                moves.append(mv)
    within = []
    for _ in range(I1 + short):
        mv = _within(spec, levels, i, rng, column=col)
        if mv is not None:
            within.append(mv)
    return within + moves


def sese_optimize(D0: LevelMatrix, config: CriterionConfig = CriterionConfig(),
                  params: SeseParams = SeseParams()) -> tuple[LevelMatrix, OptimizerTrace]:
    """Minimize the combined measurement of ``D0`` slice by slice.

    Returns the best design seen and the per-step trace.  Deterministic for
    a fixed ``params.seed``.
    """
    spec = D0.spec
    rng = np.random.default_rng(params.seed)
    best_levels = D0.levels.copy()
    best = DistanceCache(spec, midpoints(spec, best_levels), config).value().combined
    trace = OptimizerTrace(initial=best)

    for i in range(spec.u):
        levels = best_levels.copy()
        cache = DistanceCache(spec, midpoints(spec, levels), config)
        current = cache.value().combined
        th = params.th0_factor * trace.initial
        budgets = _budgets(spec, levels, i)
        rising = True
        flag = 0
        for j in range(params.N):
            old_best = best
            n_ac = n_im = 0
            for k in range(1, params.P + 1):
                col = k % spec.factors
                moves = _candidates(spec, levels, i, col, budgets, rng, params.attempts)
                if not moves:
                    trace.records.append(TraceRecord(i, j, k, current, best, th, None, None,
                                                     False, n_ac, n_im, flag))
                    continue
                props = [_score(cache, spec, mv) for mv in moves]
                pick = min(range(len(props)), key=lambda x: props[x].value.combined)
                gap = props[pick].value.combined - current
                draw = float(rng.random())
                accepted = gap <= th * draw
                if accepted:
                    current = cache.commit(props[pick]).combined
                    apply_move_inplace(levels, moves[pick])
                    if params.check_structure and structure_violations(spec, levels):
                        raise AssertionError(f"structure broken by {moves[pick]}")
                    n_ac += 1
                    if current < best:
                        best = current
                        best_levels = levels.copy()
                        n_im += 1
                trace.records.append(TraceRecord(i, j, k, current, best, th, gap, draw,
                                                 bool(accepted), n_ac, n_im, flag))
            if params.P == 0:
                continue
            flag = int(old_best - best > params.tol)
            th, rising = update_threshold(th, flag, n_ac / params.P, n_im / params.P, rising, params)

    trace.final = best
    return LevelMatrix(spec, best_levels), trace
