import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudocentroid import (
    MINMAX,
    MINSUM,
    BadKError,
    DuplicateCentroidError,
    EngineConfig,
    InconsistentSetsError,
    MatchPointDroppedError,
    NoCentroidsError,
    pseudo_centroid,
    run_kpc,
)
from pseudocentroid.distance import separate
from pseudocentroid.engine import (
    Cluster,
    Clustering,
    accelerated_minmax_update,
    accelerated_minsum_update,
    assign_points,
    kpc_iterate,
    match_point,
    recompute_centroids,
    span_objective,
)

from conftest import sym_matrices


def _sets(c):
    return sorted(tuple(cl.members) for cl in c.clusters)


def _partition(m, groups, measure=MINMAX):
    c = Clustering(tuple(Cluster(tuple(g), g[0], (g[0],)) for g in groups), m.n)
    return recompute_centroids(c, measure, m)


def test_assign_nearest_centroid(m4):
    c = assign_points([0, 3], m4)
    assert _sets(c) == [(0, 1, 2), (3,)]


def test_assign_every_point_a_centroid(m4):
    assert _sets(assign_points([0, 1, 2, 3], m4)) == [(0,), (1,), (2,), (3,)]


def test_assign_single_centroid(m4):
    assert _sets(assign_points([2], m4)) == [(0, 1, 2, 3)]


def test_assign_ties_go_to_lowest_centroid():
    from pseudocentroid import build_matrix

    m = build_matrix([[0, 2, 1], [2, 0, 1], [1, 1, 0]])
    c = assign_points([1, 0], m)
    # point 2 is equidistant from both centroids; centroid 0 wins
    assert c.labels[2] == 1


def test_assign_rejects_bad_centroids(m4):
    with pytest.raises(NoCentroidsError):
        assign_points([], m4)
    with pytest.raises(DuplicateCentroidError):
        assign_points([1, 1], m4)


def test_recompute_centroids(m4):
    c = _partition(m4, [(0, 1), (2, 3)])
    assert [(cl.centroid, cl.span) for cl in c.clusters] == [(0, 1), (2, 4)]
    c = _partition(m4, [(0, 1, 2, 3)], MINSUM)
    assert c.clusters[0].centroid == 1 and c.clusters[0].all_centroids == (1, 2)


def test_span_objectives(m4):
    c = _partition(m4, [(0, 1), (2, 3)])
    assert span_objective(c) == 5
    assert span_objective(c, "span_sum_squared") == 17
    assert span_objective(c, "span_mean_sum") == 2.5
    singles = _partition(m4, [(0,), (1,), (2,), (3,)])
    for mode in ("span_sum", "span_sum_squared", "span_mean_sum"):
        assert span_objective(singles, mode) == 0


def test_one_iteration_from_seeds(m4):
    x = recompute_centroids(assign_points([0, 3], m4), MINMAX, m4)
    assert _sets(x) == [(0, 1, 2), (3,)]
    assert x.clusters[0].centroid == 1 and x.clusters[0].span == 2
    y, changed = kpc_iterate(x, EngineConfig(), m4)
    assert not changed and _sets(y) == _sets(x)


def test_run_reaches_local_minimum(m4):
    rep = run_kpc([0, 3], EngineConfig(), m4)
    assert rep.terminated_by == "fixed_point" and rep.iterations <= 3
    final = span_objective(rep.final)
    groups = [set(cl.members) for cl in rep.final.clusters]
    # no single-point move between the two clusters improves the span sum
    for j in range(4):
        a = next(g for g in groups if j in g)
        b = next(g for g in groups if j not in g)
        if len(a) == 1:
            continue
        moved = _partition(m4, [tuple(sorted(a - {j})), tuple(sorted(b | {j}))])
        assert span_objective(moved) >= final


def test_k_equals_n_and_k_one(m4):
    rep = run_kpc([0, 1, 2, 3], EngineConfig(), m4)
    assert rep.iterations == 1 and span_objective(rep.final) == 0
    rep = run_kpc([0], EngineConfig(), m4)
    assert rep.final.k == 1 and span_objective(rep.final) == pseudo_centroid(MINMAX, range(4), m4).span


def test_two_points_two_clusters():
    from pseudocentroid import build_matrix

    rep = run_kpc([0, 1], EngineConfig(), build_matrix([[0, 5], [5, 0]]))
    assert rep.terminated_by == "fixed_point" and _sets(rep.final) == [(0,), (1,)]


def test_bad_k(m4):
    with pytest.raises(BadKError):
        run_kpc([], EngineConfig(), m4)


def test_trajectory_lengths(m4):
    rep = run_kpc([0, 3], EngineConfig(), m4)
    assert len(rep.trajectory) == len(rep.objective_trace) == rep.iterations + 1


def test_objective_local_min_rolls_back():
    rng = np.random.default_rng(5)
    from pseudocentroid.verify import random_instance

    for _ in range(100):
        m = random_instance(rng, 12, distinct=False, hi=30)
        rep = run_kpc([0, 1, 2], EngineConfig(termination="objective_local_min"), m)
        assert all(b <= a for a, b in zip(rep.objective_trace, rep.objective_trace[1:]))
        if rep.terminated_by == "local_min":
            assert rep.rejected_objective > rep.objective_trace[-1]


@settings(max_examples=60, deadline=None)
@given(sym_matrices(n_min=3, n_max=10), st.data())
def test_runs_partition_and_converge(m, data):
    k = data.draw(st.integers(1, m.n))
    seeds = data.draw(st.permutations(range(m.n)))[:k]
    measure = data.draw(st.sampled_from([MINMAX, MINSUM]))
    multi = data.draw(st.booleans())
    rep = run_kpc(seeds, EngineConfig(measure=measure, multi_centroid=multi), m)
    for c in rep.trajectory:
        c.validate()
    assert rep.terminated_by in ("fixed_point", "iteration_cap")


@settings(max_examples=40, deadline=None)
@given(sym_matrices(n_min=3, n_max=10), st.data())
def test_accelerated_run_matches_plain(m, data):
    k = data.draw(st.integers(1, m.n))
    seeds = data.draw(st.permutations(range(m.n)))[:k]
    measure = data.draw(st.sampled_from([MINMAX, MINSUM]))
    plain = run_kpc(seeds, EngineConfig(measure=measure), m)
    fast = run_kpc(seeds, EngineConfig(measure=measure, use_accelerated_update=True), m)
    assert plain.objective_trace == fast.objective_trace
    assert [c.clusters for c in plain.trajectory] == [c.clusters for c in fast.trajectory]


def test_accelerated_minmax_nothing_added(m4):
    prev = _partition(m4, [(0, 1), (2, 3)]).clusters[1]
    r = accelerated_minmax_update(prev, match_point(prev, m4), prev.members, m4)
    assert (r.centroid, r.span) == (prev.centroid, prev.span)


def test_accelerated_minmax_match_point_dropped(m4):
    prev = _partition(m4, [(0, 1, 2), (3,)]).clusters[0]
    j_star = match_point(prev, m4)
    keep = [j for j in prev.members if j != j_star]
    with pytest.raises(MatchPointDroppedError):
        accelerated_minmax_update(prev, j_star, keep, m4)


def test_accelerated_minsum_rejects_inconsistent_sets(m4):
    with pytest.raises(InconsistentSetsError):
        accelerated_minsum_update({0: 1, 1: 1}, [1], [], m4)
    with pytest.raises(InconsistentSetsError):
        accelerated_minsum_update({0: 1, 1: 1}, [], [3], m4)


def test_accelerated_minsum_small_case(m4):
    saved = {0: 1, 1: 1}
    out = accelerated_minsum_update(saved, [2], [], m4)
    assert out == {0: 4, 1: 3, 2: 5}
    assert out == {i: separate(MINSUM, i, [0, 1, 2], m4) for i in (0, 1, 2)}


def test_fixed_point_is_idempotent(m4):
    rep = run_kpc([0, 3], EngineConfig(), m4)
    again, changed = kpc_iterate(rep.final, EngineConfig(), m4)
    assert not changed and again == rep.final


def test_exhaustive_best_is_no_worse_than_run(m4):
    best = min(
        span_objective(_partition(m4, [tuple(a), tuple(sorted(set(range(4)) - set(a)))]))
        for r in (1, 2, 3)
        for a in itertools.combinations(range(4), r)
    )
    assert span_objective(run_kpc([0, 3], EngineConfig(), m4).final) >= best
