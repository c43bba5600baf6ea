"""Regret-limited reassignment, restarts and the margin-based quality score.

The regret of a point that the assignment step would move is how much closer
its new centroid is than its current one.  Moving only the highest-regret
points slows the algorithm down so that it commits to the clearest moves
first.  With fraction ``F = 1`` every eligible point moves and the run is the
plain K-PC iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Literal, Sequence, Union

import numpy as np

from ._errors import BadFractionError, ConfigError, SingleClusterError
from .distance import DistanceMatrix
from .engine import (
    Cluster,
    Clustering,
    EngineConfig,
    RunReport,
    centroid_set,
    drive,
    initial_state,
    recompute_centroids,
)

__all__ = [
    "RegretEntry",
    "QualityReport",
    "candidate_list",
    "regret_step",
    "run_regret_threshold",
    "linear_schedule",
    "quality",
    "diversified_restart",
    "stochastic_restart",
]

Schedule = Union[float, Sequence[float], Callable[[int], float]]


@dataclass(frozen=True)
class RegretEntry:
    """A point the assignment step would move.

    ``assign_centroid`` is its current centroid, ``reassign_centroid`` the one
    it would move to; ``regret = a_dist - r_dist``.
    """

    j: int
    assign_centroid: int
    reassign_centroid: int
    a_dist: float
    r_dist: float
    regret: float
    target: int  # cluster position it would move to


def _sets(c: Clustering, multi_centroid: bool) -> list[tuple[int, ...]]:
    if multi_centroid:
        return [(cl.centroid,) + tuple(i for i in cl.all_centroids if i != cl.centroid) for cl in c.clusters]
    return [(cl.centroid,) for cl in c.clusters]


def _nearest_in_set(d, s: Sequence[int], j: int):
    """Closest centroid of ``s`` to ``j`` by ``d[i, j]``, lowest index on ties."""
    best = min(sorted(s), key=lambda i: d[i, j])
    return best, d[best, j]


def candidate_list(c: Clustering, m: DistanceMatrix, multi_centroid: bool = False) -> list[RegretEntry]:
    """Points whose nearest centroid belongs to another cluster.

    Nearness follows the assignment step exactly (``d[i, j]``, lowest
    centroid index on ties), so a point tied between its own and a
    lower-indexed foreign centroid is a candidate with regret 0.
    """
    d = m.d
    sets = _sets(c, multi_centroid)
    owner = {i: h for h, s in enumerate(sets) for i in s}
    cpts = np.array(sorted(owner), dtype=np.intp)
    nearest = cpts[np.argmin(d[cpts, :], axis=0)]
    out = []
    for h, cl in enumerate(c.clusters):
        for j in cl.members:
            if j in owner:
                continue
            g = owner[int(nearest[j])]
            if g == h:
                continue
            i1, a = _nearest_in_set(d, sets[h], j)
            i2 = int(nearest[j])
            r = d[i2, j]
            out.append(RegretEntry(int(j), int(i1), i2, a, r, a - r, g))
    return out


def _check_fraction(F: float) -> float:
    if not (isinstance(F, (int, float)) and 0 < F <= 1):
        raise BadFractionError(f"fraction F must lie in (0, 1], got {F!r}")
    return float(F)


def _select(cands: list[RegretEntry], F: float, max_select: int | None) -> list[RegretEntry]:
    if not cands:
        return []
    r = max(1, math.ceil(F * len(cands)))
    T = sorted((e.regret for e in cands), reverse=True)[r - 1]
    chosen = [e for e in cands if e.regret >= T]
    if max_select is not None and len(chosen) > max_select:
        chosen = sorted(chosen, key=lambda e: (-e.regret, e.j))[:max_select]
    return chosen


def _move(c: Clustering, moves: dict[int, int]) -> Clustering:
    """Apply ``point -> cluster position`` moves; centroids stay put, spans are cleared."""
    if not moves:
        return c
    labels = c.labels
    for j, g in moves.items():
        labels[j] = g
    clusters = tuple(
        Cluster(tuple(int(j) for j in np.flatnonzero(labels == h)), cl.centroid, cl.all_centroids, None)
        for h, cl in enumerate(c.clusters)
    )
    return Clustering(clusters, c.n)


def regret_step(
    c: Clustering,
    cfg: EngineConfig,
    m: DistanceMatrix,
    F: float,
    max_select: int | None = None,
) -> tuple[Clustering, int]:
    """Assignment step restricted to the highest-regret candidates.

    With ``r = max(1, ceil(F * |candidates|))`` the threshold ``T`` is the
    ``r``-th largest regret and every candidate with regret ``>= T`` moves
    (at most ``max_select`` of them, largest regret then lowest index first).
    Returns the reassigned clustering (centroids unchanged, spans cleared)
    and the number of points moved.
    """
    F = _check_fraction(F)
    if cfg.reassign_all:
        raise ConfigError("regret-limited reassignment does not support reassign_all")
    if max_select is not None and max_select < 1:
        raise ConfigError("max_select must be >= 1")
    chosen = _select(candidate_list(c, m, cfg.multi_centroid), F, max_select)
    return _move(c, {e.j: e.target for e in chosen}), len(chosen)


def linear_schedule(start: float, stop: float, steps: int) -> Callable[[int], float]:
    """``F`` moving linearly from ``start`` to ``stop`` over ``steps``
    iterations, then staying at ``stop``."""
    _check_fraction(start)
    _check_fraction(stop)
    if steps < 1:
        raise ValueError("steps must be >= 1")

    def f(it: int) -> float:
        t = min(max(it - 1, 0), steps - 1) / max(steps - 1, 1)
        return start + (stop - start) * t

    return f


def _schedule_fn(schedule: Schedule) -> Callable[[int], float]:
    if callable(schedule):
        return schedule
    if isinstance(schedule, (int, float)):
        _check_fraction(schedule)
        return lambda it: float(schedule)
    values = [_check_fraction(v) for v in schedule]
    if not values:
        raise BadFractionError("empty F schedule")
    return lambda it: values[min(it - 1, len(values) - 1)]


def run_regret_threshold(
    start,
    cfg: EngineConfig,
    m: DistanceMatrix,
    schedule: Schedule = 0.1,
    max_select: int | None = None,
    entry: str = "step2",
) -> RunReport:
    """K-PC iteration whose assignment step only moves high-regret points.

    ``schedule`` gives ``F`` per iteration (counting from 1): a constant, a
    sequence whose last value repeats, or a callable.  A run only counts as
    converged when the centroids are unchanged and every candidate was
    allowed to move.  ``selected_counts`` in the report records the number
    of moved points per iteration.
    """
    if cfg.reassign_all:
        raise ConfigError("regret-limited reassignment does not support reassign_all")
    F_of = _schedule_fn(schedule)
    m, measure = cfg.measure.prepare(m)
    cfg = replace(cfg, measure=measure)
    x0 = initial_state(start, cfg, m, entry)
    it = [0]

    def step(x: Clustering):
        it[0] += 1
        F = _check_fraction(F_of(it[0]))
        cands = candidate_list(x, m, cfg.multi_centroid)
        chosen = _select(cands, F, max_select)
        y = _move(x, {e.j: e.target for e in chosen})
        z = recompute_centroids(y, cfg, m)
        changed = centroid_set(z, cfg.multi_centroid) != centroid_set(x, cfg.multi_centroid)
        return z, changed, len(chosen), len(chosen), len(chosen) == len(cands)

    return drive(x0, step, cfg)


@dataclass
class QualityReport:
    """Per-point margins and the aggregated ``Value`` (higher is better).

    ``second[j]`` is the position of the cluster holding ``j``'s nearest
    foreign centroid.
    """

    d_1: np.ndarray
    d_2: np.ndarray
    d_o: np.ndarray
    D_o: list[float]
    mean_o: list[float]
    value: float
    second: np.ndarray


def _margins(c: Clustering, m: DistanceMatrix, multi_centroid: bool):
    if c.k < 2:
        raise SingleClusterError("the margin needs at least two clusters")
    d = m.d
    sets = _sets(c, multi_centroid)
    n = c.n
    d1 = np.zeros(n)
    d2 = np.zeros(n)
    second = np.full(n, -1, dtype=np.intp)
    is_cent = np.zeros(n, dtype=bool)
    for s in sets:
        is_cent[list(s)] = True
    for h, cl in enumerate(c.clusters):
        for j in cl.members:
            d1[j] = min(float(d[j, i]) for i in sets[h])
            best = None
            for g, s in enumerate(sets):
                if g == h:
                    continue
                v = min(float(d[j, i]) for i in s)
                if best is None or v < best[0]:
                    best = (v, g)
            d2[j], second[j] = best
    return sets, d1, d2, second, is_cent


def quality(
    c: Clustering,
    m: DistanceMatrix,
    centroid_convention: Literal["exclude", "include"] = "exclude",
    accent: Literal["mean", "squared_mean"] = "mean",
    denominator: Literal["all", "non_centroid"] = "all",
    multi_centroid: bool = False,
) -> QualityReport:
    """Score a clustering by how decisively points sit in their clusters.

    For point ``j`` in cluster ``h``, ``d_1`` is the distance ``d[j, i]`` to
    the nearest centroid of ``h`` and ``d_2`` the distance to the nearest
    centroid of any other cluster; the margin is ``d_o = d_2 - d_1``.
    Centroids get ``d_o = 0`` (``exclude``) or ``d_1 = 0`` (``include``).
    Each cluster contributes ``D_o / size`` (or ``D_o ** 2 / size`` with
    ``accent="squared_mean"``), where ``D_o`` sums its margins and ``size``
    counts all members or only the non-centroids.  ``Value`` is the sum of the
    contributions.

    ``d_o`` is non-negative whenever every point sits with its nearest
    centroid under a symmetric matrix, which holds at a fixed point.

    Parameters
    ----------
    multi_centroid : bool, default=False
        Use each cluster's full tied centroid set instead of its single
        centroid.
    """
    if centroid_convention not in ("exclude", "include"):
        raise ValueError(f"unknown centroid convention {centroid_convention!r}")
    if accent not in ("mean", "squared_mean"):
        raise ValueError(f"unknown accent {accent!r}")
    if denominator not in ("all", "non_centroid"):
        raise ValueError(f"unknown denominator {denominator!r}")
    sets, d1, d2, second, is_cent = _margins(c, m, multi_centroid)
    if centroid_convention == "include":
        d1[is_cent] = 0.0
    d_o = d2 - d1
    if centroid_convention == "exclude":
        d_o[is_cent] = 0.0
    D, means = [], []
    for cl in c.clusters:
        idx = list(cl.members)
        total = float(d_o[idx].sum())
        size = len(idx) if denominator == "all" else int(np.count_nonzero(~is_cent[idx]))
        D.append(total)
        if size == 0:
            means.append(0.0)
        else:
            means.append((total * total if accent == "squared_mean" else total) / size)
    return QualityReport(d1, d2, d_o, D, means, float(sum(means)), second)


def _ranked_target(d, sets, h, j, mode):
    ranked = sorted(
        (g for g in range(len(sets)) if g != h),
        key=lambda g: (min(float(d[j, i]) for i in sets[g]), min(sets[g])),
    )
    if mode == "second":
        return ranked[0]
    if mode == "third":
        return ranked[1] if len(ranked) > 1 else ranked[-1]
    return ranked[-1]


def diversified_restart(
    c: Clustering,
    cfg: EngineConfig | None,
    m: DistanceMatrix,
    mode: Literal["second", "third", "farthest"] = "second",
    partial_fraction: float = 1.0,
) -> Clustering:
    """Push non-centroid points into a foreign cluster to seed a new run.

    Each moving point goes to the cluster holding its nearest (``second``),
    second-nearest (``third``, or the only one when there is a single
    foreign cluster) or farthest foreign centroid.  With
    ``partial_fraction < 1`` only ``floor(f * count)`` points move, those with
    the smallest margins ``d_o``; well-placed points stay.

    The result keeps the old centroids; pass it to
    :func:`~pseudocentroid.engine.run_kpc` with ``entry="step1"``.
    """
    if mode not in ("second", "third", "farthest"):
        raise ValueError(f"unknown restart mode {mode!r}")
    if not 0 <= partial_fraction <= 1:
        raise BadFractionError(f"partial_fraction must lie in [0, 1], got {partial_fraction}")
    multi = bool(cfg and cfg.multi_centroid)
    sets, d1, d2, _, is_cent = _margins(c, m, multi)
    movers = [j for j in range(c.n) if not is_cent[j]]
    count = math.floor(partial_fraction * len(movers))
    d_o = d2 - d1
    movers = sorted(movers, key=lambda j: (d_o[j], j))[:count]
    labels = c.labels
    moves = {j: _ranked_target(m.d, sets, int(labels[j]), j, mode) for j in movers}
    return _move(c, moves)


def stochastic_restart(
    c: Clustering,
    cfg: EngineConfig | None,
    m: DistanceMatrix,
    cutoff: float = math.inf,
    rng_seed: int = 0,
    scale: float | None = None,
) -> Clustering:
    """Randomised restart: weakly placed points are likelier to move.

    A non-centroid point with margin ``d_o <= cutoff`` moves to its nearest
    foreign cluster with probability ``1 / (1 + d_o / scale)``, where
    ``scale`` defaults to the mean positive margin (1 if there is none).
    One uniform draw is taken per eligible point in index order from
    ``numpy.random.default_rng(rng_seed)``.
    """
    multi = bool(cfg and cfg.multi_centroid)
    sets, d1, d2, second, is_cent = _margins(c, m, multi)
    d_o = d2 - d1
    pos = d_o[(~is_cent) & (d_o > 0)]
    if scale is None:
        scale = float(pos.mean()) if pos.size else 1.0
    if scale <= 0:
        raise ValueError("scale must be positive")
    rng = np.random.default_rng(rng_seed)
    moves = {}
    for j in range(c.n):
        if is_cent[j] or d_o[j] > cutoff:
            continue
        p = 1.0 / (1.0 + max(d_o[j], 0.0) / scale)
        if rng.random() < p:
            moves[j] = int(second[j])
    return _move(c, moves)
