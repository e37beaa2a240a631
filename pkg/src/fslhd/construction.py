"""Random FSLH construction for slices of arbitrary run sizes.

The whole-design ranks ``1..n`` are first split into ``u`` sets ``H^i``
(deterministically), then each set is shuffled independently per column
and scaled by ``L / n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .design import LevelMatrix, SliceSpec, ceil_div


@dataclass(frozen=True)
class SliceAssignment:
    spec: SliceSpec
    H: tuple[tuple[int, ...], ...]
    theta: tuple[int, ...]


def _increments(spec: SliceSpec, j: int) -> list[int]:
    n = spec.n
    return [ceil_div(ni * (j + 1), n) - ceil_div(ni * j, n) for ni in spec.slice_sizes]


def assign_slices(spec: SliceSpec) -> SliceAssignment:
    """Split ranks ``1..n`` into the slice sets ``H^1..H^u``.

    For ``j = 1..n`` the rank ``j`` joins a pool; each slice ``l`` whose
    bin count ``ceil(n_l * j / n)`` steps up at ``j`` then takes the smallest
    pooled rank lying in its current bin.  Every ``H^l`` ends up with
    exactly one rank per slice bin, which is what makes the slices Latin.
    """
    n = spec.n
    H: list[list[int]] = [[] for _ in range(spec.u)]
    theta = []
    pool: list[int] = []
    for j in range(1, n + 1):
        pool.append(j)
        inc = _increments(spec, j)
        theta.append(sum(inc))
        for l in (p for p, step in enumerate(inc) if step == 1):
            nl = spec.slice_sizes[l]
            target = ceil_div(nl * j, n)
            fits = [r for r in pool if ceil_div(nl * r, n) == target]
            if not fits:
                raise RuntimeError(f"no admissible rank for slice {l} at j={j}; pool={pool}")
            r = min(fits)
            H[l].append(r)
            pool.remove(r)
    if pool:
        raise RuntimeError(f"ranks {pool} were never assigned")
    return SliceAssignment(spec, tuple(tuple(sorted(h)) for h in H), tuple(theta))


def column_from_orders(spec: SliceSpec, orders: Sequence[Sequence[int]]) -> np.ndarray:
    """Build one level column from explicit rank orders ``h^1..h^u``.

    Each ``orders[i]`` must be a permutation of ``H^i``.
    """
    H = assign_slices(spec).H
    if len(orders) != spec.u:
        raise ValueError(f"expected {spec.u} rank orders, got {len(orders)}")
    for i, (h, Hi) in enumerate(zip(orders, H)):
        if sorted(h) != list(Hi):
            raise ValueError(f"order {list(h)} for slice {i} is not a permutation of {list(Hi)}")
    ranks = np.concatenate([np.asarray(h, dtype=np.int64) for h in orders])
    return ranks * spec.scale


def generate_level_matrix(spec: SliceSpec, seed=None) -> LevelMatrix:
    """Draw a random FSLH.

    Each column gets its own child stream of ``numpy.random.SeedSequence``
    so columns are reproducible independently of one another.
    """
    H = [np.asarray(h, dtype=np.int64) for h in assign_slices(spec).H]
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    levels = np.empty((spec.n, spec.factors), dtype=np.int64)
    for j, child in enumerate(seq.spawn(spec.factors)):
        rng = np.random.default_rng(child)
        levels[:, j] = np.concatenate([rng.permutation(h) for h in H]) * spec.scale
    return LevelMatrix(spec, levels)


def random_designs(spec: SliceSpec, count: int, seed=None):
    """Yield ``count`` independent random FSLHs from one parent seed."""
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    for child in seq.spawn(count):
        yield generate_level_matrix(spec, child)
