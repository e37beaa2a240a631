import math

import numpy as np
import pytest

from fslhd import (
    CriterionConfig,
    DegenerateDesignError,
    DistanceCache,
    LevelMatrix,
    SliceSpec,
    apply_different_slice_update,
    apply_out_slice_update,
    apply_within_slice_update,
    cd2,
    csm,
    csm_points,
    generate_level_matrix,
    min_intersite_distance,
    phi_t,
    to_design,
)
from fslhd.neighborhood import _cross, _within

from oracles import cd2_naive, csm_mp, phi_mp


def test_phi_equilateral_closed_form():
    # three points pairwise at distance d
    d = 0.3
    X = np.array([[0, 0], [d, 0], [d / 2, d * math.sqrt(3) / 2]])
    assert phi_t(X, t=10) == pytest.approx((3 * d**-10) ** 0.1, rel=1e-12)


def test_phi_large_t_tends_to_inverse_min_distance():
    X = np.random.default_rng(1).random((8, 3))
    dmin = min_intersite_distance(X)
    assert phi_t(X, t=400) == pytest.approx(1 / dmin, rel=0.02)


def test_phi_matches_high_precision_on_worked_design():
    spec = SliceSpec((3, 4, 5), 2)
    D = to_design(generate_level_matrix(spec, 0))
    whole, parts, comb = csm_mp(spec.slice_sizes, D.points.tolist())
    v = csm(D)
    assert v.whole == pytest.approx(whole, rel=1e-13)
    for a, b in zip(v.per_slice, parts):
        assert a == pytest.approx(b, rel=1e-13)
    assert v.combined == pytest.approx(comb, rel=1e-13)


def test_rectangular_distance():
    X = np.random.default_rng(2).random((6, 2))
    assert phi_t(X, t=7, dist_power=1) == pytest.approx(phi_mp(X.tolist(), 7, 1), rel=1e-13)
    d = np.abs(X[:, None] - X[None]).sum(-1)[np.triu_indices(6, 1)].min()
    assert min_intersite_distance(X, 1) == pytest.approx(d)


def test_coincident_points_are_degenerate():
    with pytest.raises(DegenerateDesignError):
        phi_t(np.array([[0.1, 0.2], [0.1, 0.2], [0.5, 0.5]]))


def test_csm_identity():
    spec = SliceSpec((4, 8, 12), 2)
    D = to_design(generate_level_matrix(spec, 3))
    cfg = CriterionConfig(w=0.3)
    v = csm(D, cfg)
    assert v.whole == phi_t(D.points)
    manual = 0.3 * v.whole + 0.7 * sum(ni / 24 * p for ni, p in zip((4, 8, 12), v.per_slice))
    assert v.combined == pytest.approx(manual, rel=1e-15)


def test_single_slice_csm_equals_phi():
    spec = SliceSpec((9,), 3)
    D = to_design(generate_level_matrix(spec, 5))
    assert csm(D).combined == pytest.approx(phi_t(D.points), rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    X = rng.random((10, 4))
    base = phi_t(X)
    assert phi_t(X[rng.permutation(10)]) == pytest.approx(base, rel=1e-14)
    assert phi_t(X[:, rng.permutation(4)]) == pytest.approx(base, rel=1e-14)
    assert cd2(X[rng.permutation(10)]) == pytest.approx(cd2(X), rel=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_cd2_against_naive(seed):
    X = np.random.default_rng(seed).random((5, 2))
    assert cd2(X) == pytest.approx(cd2_naive(X.tolist()), rel=1e-12, abs=1e-15)


def test_cd2_rejects_points_outside_cube():
    with pytest.raises(ValueError):
        cd2(np.array([[0.2, 1.3]]))


@pytest.mark.parametrize("bad", [dict(kind="maximin"), dict(t=0), dict(dist_power=3), dict(w=1.0), dict(w=0)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        CriterionConfig(**bad)


def _random_cache(seed, sizes=(4, 8, 12), q=2, **cfg):
    spec = SliceSpec(sizes, q)
    M = generate_level_matrix(spec, seed)
    return spec, M.levels.copy(), DistanceCache(spec, to_design(M).points, CriterionConfig(**cfg))


@pytest.mark.parametrize("m", [1, 2])
def test_incremental_matches_full(m):
    spec, levels, cache = _random_cache(0, (3, 5, 7, 4), 3, dist_power=m, t=30)
    rng = np.random.default_rng(1)
    for step in range(300):
        i = int(rng.integers(spec.u))
        kind = ["within_slice", "different_slice", "out_slice"][step % 3]
        mv = _within(spec, levels, i, rng) if kind == "within_slice" else _cross(spec, levels, i, rng, kind)
        if mv is None:
            continue
        if kind == "out_slice":
            v = apply_out_slice_update(cache, mv.rows[0], mv.column, (mv.new[0] - 0.5) / spec.L)
        elif kind == "within_slice":
            v = apply_within_slice_update(cache, *mv.rows, mv.column)
        else:
            v = apply_different_slice_update(cache, *mv.rows, mv.column)
        levels[list(mv.rows), mv.column] = mv.new
        full = csm(to_design(LevelMatrix(spec, levels)), cache.config)
        assert v.combined == pytest.approx(full.combined, rel=1e-10)
        assert v.per_slice == pytest.approx(full.per_slice, rel=1e-10)
    assert cache.verify(1e-12)


def test_proposal_does_not_mutate():
    spec, levels, cache = _random_cache(2)
    before = cache.value()
    X = cache.X.copy()
    cache.propose_swap(0, 5, 1)
    cache.propose_replace(3, 0, 0.5 / spec.L)
    assert cache.value() == before and np.array_equal(cache.X, X)


def test_cd2_cache_uses_full_recompute():
    spec, levels, cache = _random_cache(3, kind="cd2")
    p = cache.propose_swap(0, 1, 0)
    X = cache.X.copy()
    X[[0, 1], 0] = X[[1, 0], 0]
    assert p.value == csm_points(spec, X, cache.config)


def test_update_guards():
    spec, levels, cache = _random_cache(4)
    with pytest.raises(ValueError):
        apply_within_slice_update(cache, 0, 10, 0)
    with pytest.raises(ValueError):
        apply_different_slice_update(cache, 0, 1, 0)
    with pytest.raises(ValueError):
        apply_out_slice_update(cache, 0, 0, 1.5)
    with pytest.raises(IndexError):
        apply_within_slice_update(cache, 0, 99, 0)


def test_powersums_positive_and_consistent():
    spec, levels, cache = _random_cache(5)
    sums = cache.powersums
    assert all(s > 0 for s in sums)
    assert sums[0] ** (1 / 50) == pytest.approx(cache.value().whole, rel=1e-15)
    D = cache.whole
    assert np.allclose(D, D.T) and np.all(np.diag(D) == 0)
