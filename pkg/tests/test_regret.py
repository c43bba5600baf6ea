import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudocentroid import (
    MINMAX,
    MINSUM,
    BadFractionError,
    ConfigError,
    EngineConfig,
    SingleClusterError,
    build_matrix,
    quality,
    run_kpc,
    run_regret_threshold,
)
from pseudocentroid.engine import Cluster, Clustering, recompute_centroids
from pseudocentroid.regret import (
    candidate_list,
    diversified_restart,
    linear_schedule,
    regret_step,
    stochastic_restart,
)

from conftest import sym_matrices


def _fixed(m4):
    c = Clustering((Cluster((0, 1), 0, (0,)), Cluster((2, 3), 2, (2,))), 4)
    return recompute_centroids(c, MINMAX, m4)


def test_quality_m4(m4):
    q = quality(_fixed(m4), m4)
    assert q.d_o.tolist() == [0, 1, 0, 3]
    assert q.mean_o == [0.5, 1.5]
    assert q.value == 2.0


def test_quality_variants(m4):
    c = _fixed(m4)
    assert quality(c, m4, denominator="non_centroid").mean_o == [1.0, 3.0]
    assert quality(c, m4, accent="squared_mean").mean_o == [0.5, 4.5]
    inc = quality(c, m4, centroid_convention="include")
    # a centroid's margin is its distance to the nearest foreign centroid
    assert inc.d_o.tolist() == [3, 1, 3, 3]


def test_quality_singletons(m4):
    c = Clustering(tuple(Cluster((i,), i, (i,), 0) for i in range(4)), 4)
    assert quality(c, m4).value == 0


def test_quality_equidistant_margin_is_zero():
    m = build_matrix([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    c = Clustering((Cluster((0, 1), 0, (0,), 1), Cluster((2,), 2, (2,), 0)), 3)
    assert quality(c, m).d_o[1] == 0


def test_quality_single_cluster(m4):
    c = Clustering((Cluster((0, 1, 2, 3), 2, (2,), 4),), 4)
    with pytest.raises(SingleClusterError):
        quality(c, m4)


@settings(max_examples=60, deadline=None)
@given(sym_matrices(n_min=3, n_max=12), st.data())
def test_quality_at_fixed_points(m, data):
    k = data.draw(st.integers(2, m.n))
    seeds = data.draw(st.permutations(range(m.n)))[:k]
    measure = data.draw(st.sampled_from([MINMAX, MINSUM]))
    rep = run_kpc(seeds, EngineConfig(measure=measure), m)
    if rep.terminated_by != "fixed_point":
        return
    q = quality(rep.final, m)
    assert np.all(q.d_o >= 0)
    perm = data.draw(st.permutations(range(rep.final.k)))
    shuffled = Clustering(tuple(rep.final.clusters[i] for i in perm), m.n)
    assert quality(shuffled, m).value == pytest.approx(q.value)


def test_candidates_empty_at_fixed_point(m4):
    c = _fixed(m4)
    assert candidate_list(c, m4) == []
    same, moved = regret_step(c, EngineConfig(), m4, 0.5)
    assert moved == 0 and same == c


def test_candidate_regret_values(m4):
    # centroids 0 and 3 with point 2 wrongly placed in cluster of 3
    c = Clustering((Cluster((0, 1), 0, (0,)), Cluster((2, 3), 3, (3,))), 4)
    (e,) = candidate_list(c, m4)
    assert (e.j, e.assign_centroid, e.reassign_centroid, e.regret, e.target) == (2, 3, 0, 1, 0)


def test_bad_fraction_and_reassign_all(m4):
    with pytest.raises(BadFractionError):
        regret_step(_fixed(m4), EngineConfig(), m4, 0)
    with pytest.raises(ConfigError):
        regret_step(_fixed(m4), EngineConfig(reassign_all=True), m4, 0.5)


@settings(max_examples=60, deadline=None)
@given(sym_matrices(n_min=4, n_max=12), st.data())
def test_regret_selection_is_top_fraction(m, data):
    k = data.draw(st.integers(2, m.n - 1))
    cap = data.draw(st.one_of(st.none(), st.integers(1, 5)))
    x = recompute_centroids(
        Clustering(
            tuple(Cluster(tuple(g), g[0], (g[0],)) for g in np.array_split(np.array(data.draw(st.permutations(range(m.n)))), k)),
            m.n,
        ),
        MINMAX,
        m,
    )
    cands = candidate_list(x, m)
    y, moved = regret_step(x, EngineConfig(), m, 0.2, cap)
    if not cands:
        assert moved == 0
        return
    r = max(1, math.ceil(0.2 * len(cands)))
    T = sorted((e.regret for e in cands), reverse=True)[r - 1]
    eligible = [e for e in cands if e.regret >= T]
    assert moved == (len(eligible) if cap is None else min(cap, len(eligible)))
    movers = {j for j in range(m.n) if x.labels[j] != y.labels[j]}
    assert len(movers) == moved
    for e in cands:
        if e.j not in movers:
            assert all(f.regret >= e.regret for f in cands if f.j in movers)


def test_full_fraction_is_plain_step(m4):
    rep = run_kpc([0, 3], EngineConfig(), m4)
    reg = run_regret_threshold([0, 3], EngineConfig(), m4, 1.0)
    assert reg.trajectory == rep.trajectory


@settings(max_examples=40, deadline=None)
@given(sym_matrices(n_min=3, n_max=12), st.data())
def test_decreasing_schedule_keeps_partition(m, data):
    k = data.draw(st.integers(1, m.n))
    seeds = data.draw(st.permutations(range(m.n)))[:k]
    rep = run_regret_threshold(seeds, EngineConfig(), m, linear_schedule(0.2, 0.05, 10))
    assert rep.iterations <= 100
    for c in rep.trajectory:
        c.validate()


def test_k_equals_n_start(m4):
    rep = run_regret_threshold([0, 1, 2, 3], EngineConfig(), m4, 0.3)
    assert rep.terminated_by == "fixed_point" and rep.iterations == 1


def test_schedule_forms(m4):
    f = linear_schedule(0.2, 0.05, 4)
    assert [round(f(t), 4) for t in (1, 4, 9)] == [0.2, 0.05, 0.05]
    rep = run_regret_threshold([0, 3], EngineConfig(), m4, [0.5, 1.0])
    assert rep.terminated_by == "fixed_point"


def test_diversified_two_clusters_swaps_everyone(m4):
    c = _fixed(m4)
    out = diversified_restart(c, None, m4, "second")
    assert [cl.members for cl in out.clusters] == [(0, 3), (1, 2)]


def test_diversified_zero_fraction(m4):
    c = _fixed(m4)
    assert diversified_restart(c, None, m4, partial_fraction=0) == c


@settings(max_examples=40, deadline=None)
@given(sym_matrices(n_min=4, n_max=12), st.data())
def test_diversified_moves_to_second_nearest(m, data):
    k = data.draw(st.integers(2, m.n - 1))
    seeds = data.draw(st.permutations(range(m.n)))[:k]
    rep = run_kpc(seeds, EngineConfig(), m)
    c = rep.final
    q = quality(c, m)
    out = diversified_restart(c, None, m, "second")
    for j in range(m.n):
        if c.labels[j] != out.labels[j]:
            h = out.labels[j]
            assert m.d[j, c.clusters[h].centroid] == q.d_2[j]


def test_stochastic_restart_extremes(m4):
    c = _fixed(m4)
    assert stochastic_restart(c, None, m4, cutoff=0) == c
    m = build_matrix(np.ones((4, 4)) - np.eye(4))
    c = Clustering((Cluster((0, 1), 0, (0,), 1), Cluster((2, 3), 2, (2,), 1)), 4)
    out = stochastic_restart(c, None, m)
    assert [cl.members for cl in out.clusters] == [(0, 3), (1, 2)]


def test_stochastic_restart_reproducible():
    from pseudocentroid.verify import random_instance

    m = random_instance(np.random.default_rng(3), 12)
    c = run_kpc([0, 1, 2], EngineConfig(), m).final
    assert stochastic_restart(c, None, m, rng_seed=9) == stochastic_restart(c, None, m, rng_seed=9)
