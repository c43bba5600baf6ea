import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudocentroid import (
    MINMAX,
    MINSUM,
    BadKError,
    CombinatorialBlowupError,
    InfeasibleBoundsError,
    build_matrix,
    from_points,
    neighbor_order,
    pseudo_centroid,
)
from pseudocentroid.intensity import (
    adaptive_minmax,
    adaptive_minsum,
    brute_force_best_cluster,
    cluster_size_refinement,
    primary_minmax,
    primary_minsum,
    size_bounds,
)
from pseudocentroid.verify import check_adaptive, check_primary

from conftest import sym_matrices

ALL_STARTS = [primary_minmax, primary_minsum, adaptive_minmax, adaptive_minsum]


@pytest.mark.parametrize("run", ALL_STARTS)
def test_m4_two_clusters(m4, run):
    st_ = run(m4, neighbor_order(m4), 2)
    assert [(s.k_o, s.members, s.centroid, s.span) for s in st_.steps] == [
        (2, (0, 1), 0, 1),
        (1, (2, 3), 2, 4),
    ]
    assert st_.sizes == [2, 2] and st_.n_o == 0 and st_.k_o == 0


@pytest.mark.parametrize("run", ALL_STARTS)
def test_k_equals_n_gives_singletons(m4, run):
    st_ = run(m4, None, 4)
    assert st_.sizes == [1, 1, 1, 1]
    assert all(s.span == 0 for s in st_.steps)


def test_k1_is_the_pseudo_centroid(m4):
    st_ = primary_minsum(m4, None, 1)
    r = pseudo_centroid(MINSUM, range(4), m4)
    assert st_.steps[0].members == (0, 1, 2, 3)
    assert (st_.steps[0].centroid, st_.steps[0].span) == (r.centroid, r.span)


def test_state_bookkeeping(m4):
    st_ = primary_minmax(m4, None, 2, interrupt_at=2)
    assert st_.available == (2, 3) and st_.n_o == 2 and st_.k_o == 1
    assert st_.delta.tolist() == [False, False, True, True]
    assert st_.centroid_list == {2: 0}
    with pytest.raises(ValueError):
        st_.to_clustering(m4)


def test_to_clustering_keeps_ties(m4):
    c = primary_minmax(m4, None, 2).to_clustering(m4)
    assert c.clusters[0].all_centroids == (0, 1)
    assert c.clusters[1].all_centroids == (2, 3)


def test_bad_k(m4):
    for run in ALL_STARTS:
        with pytest.raises(BadKError):
            run(m4, None, 5)


@settings(max_examples=80, deadline=None)
@given(sym_matrices(n_min=2, n_max=9, hi=6), st.data())
def test_primary_clusters_are_optimal(m, data):
    k = data.draw(st.integers(1, min(4, m.n)))
    for kind in ("minmax", "minsum"):
        assert check_primary(m, k, kind) == []


@settings(max_examples=60, deadline=None)
@given(sym_matrices(n_min=2, n_max=12, hi=8), st.data())
def test_primary_strategies_agree(m, data):
    k = data.draw(st.integers(1, m.n))
    order = neighbor_order(m)
    for run in (primary_minmax, primary_minsum):
        ref = run(m, order, k).steps
        assert run(m, order, k, strategy="scan").steps == ref
        assert run(m, order, k, strategy="scan", early_exit=False).steps == ref


def test_primary_explicit_sizes(m4):
    st_ = primary_minmax(m4, None, 2, cluster_sizes=[3, 1])
    assert st_.sizes == [3, 1]
    assert st_.steps[0].members == (0, 1, 2)


def test_size_bounds_rules():
    b = size_bounds(10, 3)
    assert (b.min_size, b.max_size) == (4, 6)
    assert (b.min_scan, b.max_scan) == (3, 5)
    assert size_bounds(10, 2, max_size_rule="per_pseudocode").max_size == 5
    assert size_bounds(5, 3).max_size == 2
    assert size_bounds(5, 3, allow_absorb=True).max_size == 5
    with pytest.raises(InfeasibleBoundsError):
        size_bounds(5, 3, max_size_rule="per_pseudocode")
    with pytest.raises(BadKError):
        size_bounds(2, 3)


def test_adaptive_lambda_zero_limit():
    m = from_points([0, 1, 2, 5, 6, 9, 10, 11, 30])
    st_ = adaptive_minmax(m, None, 3, lam=0.0)
    p = st_.steps[0].params
    assert p.target_gap == p.best_min_gap
    assert p.distance_limit == p.best_distance + p.best_min_gap


def test_adaptive_constant_gaps():
    # d(i, j) = i + j: point 0 sees 1, 2, 3, ... and wins the first phase
    i = np.arange(9)
    d = np.add.outer(i, i)
    np.fill_diagonal(d, 0)
    for lam in (0.0, 0.3, 1.0):
        p = adaptive_minmax(build_matrix(d), None, 2, lam=lam).steps[0].params
        assert (p.best_distance, p.best_min_gap, p.target_gap) == (4, 1, 1)


def test_adaptive_single_scan_forces_zero_gap(m4):
    st_ = adaptive_minmax(m4, None, 4)
    assert all(s.params.target_gap == 0 for s in st_.steps)
    assert st_.sizes == [1, 1, 1, 1]


@settings(max_examples=80, deadline=None)
@given(
    sym_matrices(n_min=2, n_max=12, hi=8),
    st.data(),
    st.sampled_from([0.0, 0.3, 1.0]),
    st.booleans(),
)
def test_adaptive_matches_reference(m, data, lam, absorb):
    k = data.draw(st.integers(1, min(3, m.n)))
    for kind in ("minmax", "minsum"):
        assert check_adaptive(m, k, kind, lam, allow_absorb=absorb) == []


@settings(max_examples=40, deadline=None)
@given(sym_matrices(n_min=2, n_max=9, hi=8), st.data())
def test_adaptive_minmax_is_optimal_at_its_size(m, data):
    k = data.draw(st.integers(1, min(3, m.n)))
    avail = set(range(m.n))
    for s in adaptive_minmax(m, None, k).steps:
        assert brute_force_best_cluster(m, sorted(avail), s.size, MINMAX).span == s.span
        avail -= set(s.members)


def test_refinement_m4(m4):
    st_ = cluster_size_refinement(m4, None, 2)
    assert st_.sizes == [2, 2]
    assert st_.steps == primary_minmax(m4, None, 2).steps


@settings(max_examples=40, deadline=None)
@given(sym_matrices(n_min=3, n_max=12), st.data())
def test_refinement_sizes_cover_points(m, data):
    k = data.draw(st.integers(2, min(4, m.n)))
    approach = data.draw(st.sampled_from(["approach1", "approach2"]))
    base = data.draw(st.sampled_from(["minmax", "minsum"]))
    st_ = cluster_size_refinement(m, None, k, approach, base)
    assert sum(st_.sizes) == m.n
    assert st_.sizes == sorted(st_.sizes, reverse=True)


def test_refinement_needs_two_clusters(m4):
    with pytest.raises(BadKError):
        cluster_size_refinement(m4, None, 1)


def test_brute_force_small_cases(m4):
    assert brute_force_best_cluster(m4, [2, 0, 3], 1).members == (0,)
    b = brute_force_best_cluster(m4, range(4), 2, MINMAX)
    assert (b.members, b.span) == ((0, 1), 1)
    full = brute_force_best_cluster(m4, range(4), 4, MINSUM)
    r = pseudo_centroid(MINSUM, range(4), m4)
    assert (full.centroid, full.span) == (r.centroid, r.span)


def test_brute_force_keeps_integer_spans(m4):
    assert isinstance(brute_force_best_cluster(m4, range(4), 3).span, int)


def test_brute_force_guard():
    m = build_matrix(np.ones((40, 40)) - np.eye(40))
    assert math.comb(40, 20) > 10**6
    with pytest.raises(CombinatorialBlowupError):
        brute_force_best_cluster(m, range(40), 20)
