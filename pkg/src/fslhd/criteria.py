"""Space-filling criteria for sliced designs.

``phi_t`` (a smooth surrogate of the maximin distance), the centered
L2-discrepancy and the combined sliced measurement

    csm = w * crit(whole) + (1 - w) * sum_i (n_i / n) * crit(slice_i)

plus :class:`DistanceCache`, which re-scores single-element exchanges in
``O(n q)`` instead of recomputing every pairwise distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import chain
from typing import Literal

import numpy as np
from scipy.spatial.distance import pdist
from scipy.stats import qmc

from .design import DesignMatrix, SliceSpec, slice_of_row


class DegenerateDesignError(ValueError):
    """Two design points coincide, so ``phi_t`` is infinite."""


@dataclass(frozen=True)
class CriterionConfig:
    kind: Literal["phi_t", "cd2"] = "phi_t"
    t: int = 50
    dist_power: int = 2
    w: float = 0.5

    def __post_init__(self):
        if self.kind not in ("phi_t", "cd2"):
            raise ValueError(f"unknown criterion kind {self.kind!r}")
        if int(self.t) != self.t or self.t < 1:
            raise ValueError(f"t must be a positive integer, got {self.t}")
        if self.dist_power not in (1, 2):
            raise ValueError(f"dist_power must be 1 or 2, got {self.dist_power}")
        if not 0 < self.w < 1:
            raise ValueError(f"w must lie in (0, 1), got {self.w}")


@dataclass(frozen=True)
class CriterionValue:
    whole: float
    per_slice: tuple[float, ...]
    combined: float


def combine(spec: SliceSpec, config: CriterionConfig, whole: float, per_slice) -> CriterionValue:
    per_slice = tuple(float(v) for v in per_slice)
    mix = math.fsum(lam * v for lam, v in zip(spec.weights, per_slice))
    return CriterionValue(float(whole), per_slice, config.w * whole + (1 - config.w) * mix)


def _points(D) -> np.ndarray:
    return D.points if isinstance(D, DesignMatrix) else np.atleast_2d(np.asarray(D, dtype=float))


def min_intersite_distance(D, dist_power: int = 2) -> float:
    X = _points(D)
    if len(X) < 2:
        raise ValueError("need at least two points")
    metric = "euclidean" if dist_power == 2 else "cityblock"
    return float(pdist(X, metric).min())


def _power_terms(X: np.ndarray, t: int, dist_power: int) -> np.ndarray:
    if len(X) < 2:
        raise ValueError("phi_t needs at least two points")
    metric = "euclidean" if dist_power == 2 else "cityblock"
    d = pdist(X, metric)
    if np.any(d == 0):
        raise DegenerateDesignError("degenerate design: coincident points")
    with np.errstate(over="raise"):
        try:
            return d ** -float(t)
        except FloatingPointError:
            raise DegenerateDesignError("degenerate design: d^-t overflows") from None


def phi_t(D, t: int = 50, dist_power: int = 2) -> float:
    """``(sum_{i<j} d_ij^-t)^(1/t)``; the sum is correctly rounded (fsum)."""
    return math.fsum(_power_terms(_points(D), t, dist_power)) ** (1.0 / t)


def cd2(D) -> float:
    """Centered L2-discrepancy (Hickernell), product form over dimensions.

    scipy returns the squared discrepancy; the square root is taken here.
    """
    X = _points(D)
    if X.size == 0:
        raise ValueError("empty design")
    if np.any(X < 0) or np.any(X > 1):
        raise ValueError("points must lie in [0, 1]")
    return math.sqrt(max(qmc.discrepancy(X, method="CD"), 0.0))


def _criterion(X, config: CriterionConfig) -> float:
    if config.kind == "cd2":
        return cd2(X)
    return phi_t(X, config.t, config.dist_power)


def csm_points(spec: SliceSpec, X: np.ndarray, config: CriterionConfig) -> CriterionValue:
    """Combined measurement of a raw ``n x q`` point array laid out slice-major."""
    per_slice = []
    for i in range(spec.u):
        try:
            per_slice.append(_criterion(X[spec.bounds[i]:spec.bounds[i + 1]], config))
        except ValueError as exc:
            raise type(exc)(f"slice {i}: {exc}") from None
    return combine(spec, config, _criterion(X, config), per_slice)


def csm(D: DesignMatrix, config: CriterionConfig = CriterionConfig()) -> CriterionValue:
    return csm_points(D.spec, D.points, config)


def _expansion(values: list[float]) -> list[float]:
    """Three-float expansion of ``sum(values)``.

    ``fsum`` is correctly rounded, so each pass recovers the rounding error
    of the previous ones.  The residual left over is below ``2^-150`` of the
    total, which makes later exact subtraction of single terms safe.
    """
    hi = math.fsum(values)
    lo = math.fsum(chain(values, (-hi,)))
    lo2 = math.fsum(chain(values, (-hi, -lo)))
    return [lo2, lo, hi]


@dataclass(frozen=True)
class Proposal:
    """A scored, not yet applied, single-column change."""

    kind: Literal["swap", "replace"]
    r: int
    s: int | None
    k: int
    x_new: float | None
    value: CriterionValue


class DistanceCache:
    """Pairwise distance tables plus power sums for fast re-scoring.

    For ``phi_t`` the sums of ``d_ij^-t`` over the whole design and over each
    slice are kept as multi-float expansions of the stored per-pair terms.
    A proposal adds the new terms and subtracts the old ones with ``fsum``,
    so the result is correctly rounded even when the removed pair dominated
    the sum (the usual case at ``t = 50``).  ``cd2`` has no incremental form
    here; proposals are scored by full recomputation.
    """

    def __init__(self, spec: SliceSpec, points, config: CriterionConfig = CriterionConfig()):
        self.spec = spec
        self.config = config
        self.X = np.array(_points(points), dtype=float)
        if self.X.shape != (spec.n, spec.factors):
            raise ValueError(f"points have shape {self.X.shape}, expected {(spec.n, spec.factors)}")
        if config.kind == "phi_t" and min(spec.slice_sizes) < 2:
            raise ValueError("phi_t needs at least two points in every slice")
        self._row_slice = spec.row_slice.tolist()
        self.rebuild()

    def rebuild(self):
        """Recompute every table from the coordinates."""
        if self.config.kind == "cd2":
            self._value = csm_points(self.spec, self.X, self.config)
            return
        m, n = self.config.dist_power, self.spec.n
        diff = np.abs(self.X[:, None, :] - self.X[None, :, :])
        self.Dm = (diff**m).sum(axis=2)
        np.fill_diagonal(self.Dm, 1.0)
        self.T = self._terms(self.Dm)
        np.fill_diagonal(self.Dm, 0.0)
        np.fill_diagonal(self.T, 0.0)
        self._resum()

    def _resum(self):
        n, spec = self.spec.n, self.spec
        self._whole = _expansion(self.T[np.triu_indices(n, 1)].tolist())
        self._slices = []
        for i in range(spec.u):
            lo, hi = spec.bounds[i], spec.bounds[i + 1]
            block = self.T[lo:hi, lo:hi]
            self._slices.append(_expansion(block[np.triu_indices(hi - lo, 1)].tolist()))
        self._sums = [math.fsum(self._whole)] + [math.fsum(p) for p in self._slices]
        self._value = self._from_sums(self._sums)

    @property
    def whole(self) -> np.ndarray:
        """Full distance table."""
        return self.Dm ** (1.0 / self.config.dist_power)

    @property
    def powersums(self) -> tuple[float, ...]:
        """(whole, slice_1, ..., slice_u) sums of ``d^-t``."""
        return tuple(self._sums)

    def value(self) -> CriterionValue:
        return self._value

    def _from_sums(self, sums) -> CriterionValue:
        if min(sums) <= 0 or not all(math.isfinite(x) for x in sums):
            raise RuntimeError(f"power sums out of range {sums}; distance cache is corrupt")
        inv = 1.0 / self.config.t
        w = self.config.w
        vals = [x**inv for x in sums]
        mix = sum(lam * v for lam, v in zip(self.spec.weights.tolist(), vals[1:]))
        return CriterionValue(vals[0], tuple(vals[1:]), w * vals[0] + (1 - w) * mix)

    def _terms(self, dm: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", divide="ignore"):
            out = dm ** (-self.config.t / self.config.dist_power)
        if not np.all(np.isfinite(out)):
            raise DegenerateDesignError("degenerate design: coincident points or d^-t overflow")
        return out

    def _h(self, r: int, k: int, x_new: float) -> np.ndarray:
        # h(r, ., k, v) = |x_new - x_vk|^m - |x_rk - x_vk|^m
        col = self.X[:, k]
        a = np.abs(x_new - col)
        b = np.abs(self.X[r, k] - col)
        return a - b if self.config.dist_power == 1 else a * a - b * b

    def _slice_sums(self, touched: dict[int, list]) -> list[float]:
        sums = [0.0] * self.spec.u
        for i in range(self.spec.u):
            if i in touched:
                sums[i] = math.fsum(chain(self._slices[i], *touched[i]))
            else:
                sums[i] = self._sums[i + 1]
        return sums

    def propose_swap(self, r: int, s: int, k: int) -> Proposal:
        """Score exchanging ``X[r, k]`` and ``X[s, k]``."""
        if r == s:
            return Proposal("swap", r, s, k, None, self._value)
        if self.config.kind == "cd2":
            X = self.X.copy()
            X[[r, s], k] = X[[s, r], k]
            return Proposal("swap", r, s, k, None, csm_points(self.spec, X, self.config))
        n, bounds = self.spec.n, self.spec.bounds
        # d'(r,v)^m = d(r,v)^m + h ;  d'(s,v)^m = d(s,v)^m - h ;  d(r,s) unchanged
        h = self._h(r, k, self.X[s, k])
        dm = np.concatenate([self.Dm[r] + h, self.Dm[s] - h])
        dm[[r, s, n + r, n + s]] = 1.0
        new = self._terms(dm)
        new[[r, s, n + r, n + s]] = 0.0
        old = np.concatenate([self.T[r], self.T[s]])
        old[[s, n + r]] = 0.0
        new_l = new.tolist()
        old_l = (-old).tolist()
        whole = math.fsum(chain(self._whole, new_l, old_l))
        e, e2 = self._row_slice[r], self._row_slice[s]
        lo, hi = bounds[e], bounds[e + 1]
        touched = {e: [new_l[lo:hi], old_l[lo:hi]]}
        lo2, hi2 = bounds[e2], bounds[e2 + 1]
        parts = [new_l[n + lo2:n + hi2], old_l[n + lo2:n + hi2]]
        if e2 == e:
            touched[e] += parts
        else:
            touched[e2] = parts
        sums = [whole] + self._slice_sums(touched)
        return Proposal("swap", r, s, k, None, self._from_sums(sums))

    def propose_replace(self, r: int, k: int, x_new: float) -> Proposal:
        """Score replacing ``X[r, k]`` with a value not used in the column."""
        if self.config.kind == "cd2":
            X = self.X.copy()
            X[r, k] = x_new
            return Proposal("replace", r, None, k, x_new, csm_points(self.spec, X, self.config))
        bounds = self.spec.bounds
        dm = self.Dm[r] + self._h(r, k, x_new)
        dm[r] = 1.0
        new = self._terms(dm)
        new[r] = 0.0
        new_l = new.tolist()
        old_l = (-self.T[r]).tolist()
        whole = math.fsum(chain(self._whole, new_l, old_l))
        e = self._row_slice[r]
        lo, hi = bounds[e], bounds[e + 1]
        sums = [whole] + self._slice_sums({e: [new_l[lo:hi], old_l[lo:hi]]})
        return Proposal("replace", r, None, k, x_new, self._from_sums(sums))

    def commit(self, p: Proposal) -> CriterionValue:
        """Apply a proposal; affected rows are recomputed from coordinates."""
        if p.kind == "swap":
            self.X[[p.r, p.s], p.k] = self.X[[p.s, p.r], p.k]
            rows = [p.r, p.s]
        else:
            self.X[p.r, p.k] = p.x_new
            rows = [p.r]
        if self.config.kind == "cd2":
            self._value = p.value
            return p.value
        m = self.config.dist_power
        for r in rows:
            dm = (np.abs(self.X[r] - self.X) ** m).sum(axis=1)
            dm[r] = 1.0
            tr = self._terms(dm)
            dm[r] = tr[r] = 0.0
            self.Dm[r] = self.Dm[:, r] = dm
            self.T[r] = self.T[:, r] = tr
        self._resum()
        return self._value

    def verify(self, rtol: float = 1e-9) -> bool:
        """Compare the cached value with a from-scratch evaluation."""
        fresh = csm_points(self.spec, self.X, self.config)
        cur = self._value
        vals = [(cur.whole, fresh.whole), (cur.combined, fresh.combined), *zip(cur.per_slice, fresh.per_slice)]
        return all(abs(a - b) <= rtol * abs(b) for a, b in vals)


def _check_rows(cache: DistanceCache, r: int, s: int | None = None):
    n = cache.spec.n
    for x in (r, s):
        if x is not None and not 0 <= x < n:
            raise IndexError(f"row {x} out of range for n={n}")


def apply_within_slice_update(cache: DistanceCache, r: int, s: int, k: int) -> CriterionValue:
    """Exchange ``x_rk`` and ``x_sk`` for two rows of the same slice."""
    _check_rows(cache, r, s)
    if slice_of_row(cache.spec, r) != slice_of_row(cache.spec, s):
        raise ValueError(f"rows {r} and {s} are in different slices")
    return cache.commit(cache.propose_swap(r, s, k))


def apply_different_slice_update(cache: DistanceCache, r: int, s: int, k: int) -> CriterionValue:
    """Exchange ``x_rk`` and ``x_sk`` for rows of two different slices."""
    _check_rows(cache, r, s)
    if slice_of_row(cache.spec, r) == slice_of_row(cache.spec, s):
        raise ValueError(f"rows {r} and {s} are in the same slice")
    return cache.commit(cache.propose_swap(r, s, k))


def apply_out_slice_update(cache: DistanceCache, r: int, k: int, new_value: float) -> CriterionValue:
    """Replace ``x_rk`` with an out-slice value in ``(0, 1)``."""
    _check_rows(cache, r)
    if not 0 < new_value < 1:
        raise ValueError(f"out-slice value must lie in (0, 1), got {new_value}")
    return cache.commit(cache.propose_replace(r, k, new_value))
