"""Intensity-based starts: build the ``k`` clusters one at a time, each the
tightest cluster of its size among the points still available.

At step ``k_o`` (counting down from ``k`` to 1) with ``n_o`` points left, every
available anchor ``i`` is scored on its nearest available neighbours, read off
the precomputed :class:`~pseudocentroid.distance.NeighborOrder`.  The best
anchor and its neighbours become cluster ``C(k_o)`` and leave the pool.

The primary methods use a fixed size ``ceil(n_o / k_o)``.  The adaptive
methods let a cluster grow past that size while its neighbours stay within a
limit derived from the gaps between consecutive distances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from ._errors import BadKError, CombinatorialBlowupError, InfeasibleBoundsError
from .distance import (
    MINMAX,
    MINSUM,
    DistanceMatrix,
    NeighborOrder,
    SeparationMeasure,
    neighbor_order,
    pseudo_centroid,
    separate,
)
from .engine import Cluster, Clustering, EngineConfig, run_kpc

__all__ = [
    "SizeBounds",
    "AdaptiveParams",
    "GeneratedCluster",
    "IntensityState",
    "BestCluster",
    "primary_minmax",
    "primary_minsum",
    "adaptive_minmax",
    "adaptive_minsum",
    "cluster_size_refinement",
    "brute_force_best_cluster",
    "size_bounds",
    "BRUTE_FORCE_LIMIT",
]

BRUTE_FORCE_LIMIT = 10**6
MaxSizeRule = Literal["per_text", "per_pseudocode"]


@dataclass(frozen=True)
class SizeBounds:
    """Size limits for the cluster built at one step.

    ``max_size`` is ``n_o - global_min_size * (k_o - 1)`` under the
    ``per_text`` rule and ``n_o - min_size * (k_o - 1)`` under
    ``per_pseudocode``.
    """

    n_o: int
    k_o: int
    min_size: int
    max_size: int
    global_min_size: int

    @property
    def min_scan(self) -> int:
        return self.min_size - 1

    @property
    def max_scan(self) -> int:
        return self.max_size - 1


def size_bounds(
    n_o: int,
    k_o: int,
    global_min_size: int = 2,
    max_size_rule: MaxSizeRule = "per_text",
    allow_absorb: bool = False,
) -> SizeBounds:
    """Cluster size bounds for ``k_o`` clusters over ``n_o`` points.

    Under ``per_text``, when ``n_o`` is too small for every remaining cluster
    to reach ``global_min_size``, the upper bound is raised to ``min_size``
    (the cluster cannot grow).  ``per_pseudocode`` has no such fallback and
    raises :class:`InfeasibleBoundsError`.  ``allow_absorb`` lifts the upper
    bound to ``n_o``.
    """
    if not 1 <= k_o <= n_o:
        raise BadKError(f"cannot build {k_o} clusters from {n_o} points")
    if global_min_size < 1:
        raise ValueError("global_min_size must be >= 1")
    min_size = -(-n_o // k_o)
    if allow_absorb:
        max_size = n_o
    elif max_size_rule == "per_text":
        max_size = max(min_size, n_o - global_min_size * (k_o - 1))
    elif max_size_rule == "per_pseudocode":
        max_size = n_o - min_size * (k_o - 1)
        if max_size < min_size:
            raise InfeasibleBoundsError(
                f"max size {max_size} < min size {min_size} for n_o={n_o}, k_o={k_o}"
            )
    else:
        raise ValueError(f"unknown max_size_rule {max_size_rule!r}")
    return SizeBounds(n_o, k_o, min_size, max_size, global_min_size)


@dataclass(frozen=True)
class AdaptiveParams:
    """Limits computed by the adaptive methods' first phase at one step.

    Gap statistics belong to the winning anchor of the first phase.  The sum
    fields are only meaningful for the MinSum variant.
    """

    lam: float
    best_distance: float
    best_min_gap: float
    best_sum_gap: float
    best_mean_gap: float
    target_gap: float
    distance_limit: float
    best_sum: float | None = None
    first_sum_limit: float | None = None
    delta_sum: float | None = None
    best_scan: int = 0


@dataclass(frozen=True)
class GeneratedCluster:
    """Cluster ``C(k_o)`` and the anchor ``i*`` that produced it.

    ``span`` is ``Separate(i*, members)``; ``members`` is sorted.
    """

    k_o: int
    members: tuple[int, ...]
    centroid: int
    span: float
    bounds: SizeBounds
    params: AdaptiveParams | None = None

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class IntensityState:
    """Everything an intensity-based start produced.

    ``steps`` lists the generated clusters in generation order, so
    ``steps[0]`` is ``C(k)``.  ``available`` is what is left of ``N_o``: empty
    after a full run, non-empty when the run was interrupted.
    """

    n: int
    k: int
    kind: Literal["minmax", "minsum"]
    steps: list[GeneratedCluster] = field(default_factory=list)
    available: tuple[int, ...] = ()

    @property
    def n_o(self) -> int:
        return len(self.available)

    @property
    def k_o(self) -> int:
        """Clusters still to be generated (0 after a full run)."""
        return self.steps[-1].k_o - 1 if self.steps else self.k

    @property
    def delta(self) -> np.ndarray:
        """Availability flags: ``delta[i]`` is True iff ``i`` is still in ``N_o``."""
        out = np.zeros(self.n, dtype=bool)
        out[list(self.available)] = True
        return out

    @property
    def clusters(self) -> dict[int, GeneratedCluster]:
        return {s.k_o: s for s in self.steps}

    @property
    def centroid_list(self) -> dict[int, int]:
        return {s.k_o: s.centroid for s in self.steps}

    @property
    def sizes(self) -> list[int]:
        return [s.size for s in self.steps]

    @property
    def k_final(self) -> int:
        return len(self.steps)

    def to_clustering(self, m: DistanceMatrix) -> Clustering:
        """Clustering ready to enter the assignment step directly.

        Each cluster keeps ``i*`` as its centroid.  ``all_centroids`` is the
        full tied set when ``i*`` belongs to it, otherwise just ``i*``.
        """
        if self.available:
            raise ValueError("the start was interrupted; not every point is clustered")
        measure = MINMAX if self.kind == "minmax" else MINSUM
        out = []
        for s in self.steps:
            r = pseudo_centroid(measure, s.members, m)
            star = r.all_centroids if s.centroid in r.all_centroids else (s.centroid,)
            out.append(Cluster(s.members, s.centroid, tuple(star), s.span))
        return Clustering(tuple(out), self.n)


@dataclass(frozen=True)
class BestCluster:
    members: tuple[int, ...]
    centroid: int
    span: float


def _scalar(v):
    return v.item() if hasattr(v, "item") else v


class _Pool:
    """Available points and their compressed neighbour lists."""

    def __init__(self, m: DistanceMatrix, order: NeighborOrder):
        if order.n != m.n:
            raise ValueError("neighbour order does not match the distance matrix")
        self.m = m
        self.order = order
        self.avail = np.ones(m.n, dtype=bool)

    @property
    def rows(self) -> np.ndarray:
        return np.flatnonzero(self.avail)

    def neighbours(self, rows: np.ndarray, width: int):
        """Nearest ``width`` available neighbours of each row, with distances.

        Row ``t`` of the result lists neighbours of ``rows[t]`` in ascending
        distance, ties by index.
        """
        n_o = rows.size
        if width <= 0 or n_o < 2:
            empty = np.empty((n_o, 0), dtype=np.intp)
            return empty, np.empty((n_o, 0), dtype=self.order.dist.dtype)
        ords = self.order.order[rows]
        keep = self.avail[ords]
        idx = ords[keep].reshape(n_o, n_o - 1)[:, :width]
        dist = self.order.dist[rows][keep].reshape(n_o, n_o - 1)[:, :width]
        return idx, dist

    def take(self, members) -> None:
        self.avail[list(members)] = False


def _check_k(m: DistanceMatrix, k: int):
    if not 1 <= k <= m.n:
        raise BadKError(f"need 1 <= k <= n, got k={k}, n={m.n}")


def _prepare(m, order):
    return neighbor_order(m) if order is None else order


def _emit(state, pool, k_o, bounds, centroid, nbrs, span, params=None):
    members = tuple(sorted([int(centroid)] + [int(j) for j in nbrs]))
    pool.take(members)
    state.steps.append(GeneratedCluster(k_o, members, int(centroid), _scalar(span), bounds, params))


def _finish(state, pool):
    state.available = tuple(int(i) for i in pool.rows)
    return state


def _singleton_run(m, k, kind) -> IntensityState:
    state = IntensityState(m.n, k, kind)
    b = SizeBounds(1, 1, 1, 1, 1)
    state.steps.append(GeneratedCluster(1, (0,), 0, _scalar(m.d[0, 0]), b))
    return state


def _primary(
    m: DistanceMatrix,
    order: NeighborOrder | None,
    k: int,
    kind: str,
    cluster_sizes: Sequence[int] | None,
    interrupt_at: int | None,
    strategy: str,
    early_exit: bool,
) -> IntensityState:
    _check_k(m, k)
    if strategy not in ("vector", "scan"):
        raise ValueError(f"strategy must be 'vector' or 'scan', got {strategy!r}")
    if m.n == 1:
        return _singleton_run(m, k, kind)
    order = _prepare(m, order)
    pool = _Pool(m, order)
    state = IntensityState(m.n, k, kind)
    sizes = list(cluster_sizes or [])
    for step, k_o in enumerate(range(k, 0, -1)):
        if interrupt_at is not None and k_o < interrupt_at:
            break
        rows = pool.rows
        n_o = rows.size
        size = sizes[step] if step < len(sizes) else -(-n_o // k_o)
        if not 1 <= size <= n_o - (k_o - 1):
            raise InfeasibleBoundsError(f"cluster size {size} infeasible for n_o={n_o}, k_o={k_o}")
        bounds = SizeBounds(n_o, k_o, size, size, 1)
        scan = size - 1
        if scan == 0:
            _emit(state, pool, k_o, bounds, rows[0], [], 0)
            continue
        if strategy == "vector":
            pos, span, nbrs = _primary_vector(pool, rows, scan, kind)
        else:
            pos, span, nbrs = _primary_scan(pool, rows, scan, kind, early_exit)
        _emit(state, pool, k_o, bounds, rows[pos], nbrs, span)
    return _finish(state, pool)


def _primary_vector(pool, rows, scan, kind):
    idx, dist = pool.neighbours(rows, scan)
    key = dist[:, scan - 1] if kind == "minmax" else dist.sum(axis=1)
    pos = int(np.argmin(key))
    return pos, key[pos], idx[pos]


def _primary_scan(pool, rows, scan, kind, early_exit):
    """Anchor-by-anchor scan over the full neighbour order.

    With ``early_exit`` an anchor is abandoned as soon as it cannot beat the
    best so far: a single distance reaching the best (max) or a partial sum
    reaching it (sum, non-negative distances only).
    """
    order, dist, avail = pool.order.order, pool.order.dist, pool.avail
    nonneg = bool(np.all(pool.m.d >= 0)) if pool.m.d.dtype != object else min(pool.m.d.flat) >= 0
    best, best_pos = None, -1
    for pos, i in enumerate(rows):
        count, total, last, beaten = 0, 0, None, False
        for s in range(order.shape[1]):
            j = order[i, s]
            if not avail[j]:
                continue
            count += 1
            last = dist[i, s]
            total = total + last
            if early_exit and best is not None:
                if kind == "minmax" and last >= best:
                    beaten = True
                    break
                if kind == "minsum" and nonneg and total >= best:
                    beaten = True
                    break
            if count == scan:
                break
        if beaten:
            continue
        val = last if kind == "minmax" else total
        if best is None or val < best:
            best, best_pos = val, pos
    i = rows[best_pos]
    nbrs = [j for j in order[i] if avail[j]][:scan]
    return best_pos, best, nbrs


def primary_minmax(
    m: DistanceMatrix,
    order: NeighborOrder | None = None,
    k: int = 2,
    cluster_sizes: Sequence[int] | None = None,
    interrupt_at: int | None = None,
    strategy: Literal["vector", "scan"] = "vector",
    early_exit: bool = True,
) -> IntensityState:
    """Fixed-size clusters, each with the smallest possible MinMax span.

    At step ``k_o`` the cluster has ``ceil(n_o / k_o)`` members, or
    ``cluster_sizes[k - k_o]`` when sizes are supplied.  The anchor whose
    ``ScanSize``-th nearest available neighbour is closest wins (lowest index
    on ties); its span equals the minimum MinMax span over all subsets of the
    available points with that size.

    Parameters
    ----------
    m : DistanceMatrix
    order : NeighborOrder, optional
        Precomputed neighbour order; computed here when omitted.  Pass it in
        to reuse it across ``k`` values and methods.
    k : int
        Number of clusters, ``1 <= k <= n``.
    cluster_sizes : sequence of int, optional
        Sizes for the first steps, in generation order.
    interrupt_at : int, optional
        Stop after generating ``C(interrupt_at)``; the remaining points stay
        in ``available``.
    strategy : {"vector", "scan"}
        ``"vector"`` scores all anchors at once; ``"scan"`` walks each anchor's
        neighbour list.  Both give identical results.
    early_exit : bool
        Abandon an anchor once it cannot win (``"scan"`` only).
    """
    return _primary(m, order, k, "minmax", cluster_sizes, interrupt_at, strategy, early_exit)


def primary_minsum(
    m: DistanceMatrix,
    order: NeighborOrder | None = None,
    k: int = 2,
    cluster_sizes: Sequence[int] | None = None,
    interrupt_at: int | None = None,
    strategy: Literal["vector", "scan"] = "vector",
    early_exit: bool = True,
) -> IntensityState:
    """Fixed-size clusters, each with the smallest possible MinSum span.

    Same structure as :func:`primary_minmax` with the anchor scored by the
    sum of distances to its ``ScanSize`` nearest available neighbours.
    """
    return _primary(m, order, k, "minsum", cluster_sizes, interrupt_at, strategy, early_exit)


def _first_phase(dist: np.ndarray, min_scan: int, kind: str, lam: float):
    """Pick the best anchor at ``ScanSize = MinScan`` and derive the limits.

    ``dist`` holds each anchor's available neighbour distances, ascending.
    Returns ``(params, s_values)`` where ``s_values[t]`` is anchor ``t``'s
    distance sum over its ``MinScan`` nearest neighbours.
    """
    n_o = dist.shape[0]
    if min_scan == 0:
        # nothing scanned: treat the anchor itself as a neighbour at distance 0
        zero = _scalar(dist.dtype.type(0)) if dist.dtype != object else 0
        sums = [zero] * n_o
        params = AdaptiveParams(lam, zero, 0, 0, 0, 0, zero)
        if kind == "minsum":
            params = replace(params, best_sum=zero, first_sum_limit=zero, delta_sum=zero)
        return params, sums
    head = dist[:, :min_scan]
    last = [_scalar(v) for v in head[:, -1]]
    sums = [_scalar(v) for v in head.sum(axis=1)]
    if min_scan >= 2:
        gaps = np.diff(head, axis=1)
        min_gap = [_scalar(v) for v in gaps.min(axis=1)]
        sum_gap = [_scalar(v) for v in gaps.sum(axis=1)]
    else:
        min_gap = [math.inf] * n_o
        sum_gap = [0] * n_o
    if kind == "minmax":
        key = lambda t: (last[t], -min_gap[t], t)  # noqa: E731
    else:
        key = lambda t: (sums[t], last[t], -min_gap[t], t)  # noqa: E731
    b = min(range(n_o), key=key)
    if min_scan >= 2:
        mean_gap = sum_gap[b] / (min_scan - 1)
        target = lam * mean_gap + (1 - lam) * min_gap[b]
    else:
        # no gap observed: no slack beyond the best distance
        mean_gap, target = 0, 0
    limit = last[b] + target
    params = AdaptiveParams(lam, last[b], min_gap[b], sum_gap[b], mean_gap, target, limit)
    if kind == "minsum":
        params = replace(params, best_sum=sums[b], first_sum_limit=sums[b] + target, delta_sum=limit)
    return params, sums


def _second_phase(dist: np.ndarray, b: SizeBounds, params: AdaptiveParams, kind: str):
    """Grow every anchor past ``MinScan`` within the limits; pick the winner.

    Returns ``(pos, scan, value)`` with ``value`` the winner's max (MinMax) or
    sum (MinSum) over its ``scan`` nearest neighbours.
    """
    n_o = dist.shape[0]
    lo, hi = b.min_scan, b.max_scan
    width = hi
    if width == 0:
        return 0, 0, 0
    d = dist[:, :width]
    if kind == "minmax":
        ok = d <= params.distance_limit
    else:
        prefix = np.cumsum(d, axis=1)
        steps = np.arange(1, width + 1)
        growth = np.maximum(steps - lo, 0)
        limits = np.array([params.first_sum_limit + g * params.delta_sum for g in growth], dtype=object)
        ok = prefix <= limits if d.dtype == object else prefix <= limits.astype(float)
    ok = np.asarray(ok, dtype=bool)
    # scan length = MinScan plus the leading run of admissible steps after it;
    # an anchor whose MinScan-th neighbour already fails is not a candidate
    tail = ok[:, max(lo - 1, 0):]
    tail_run = np.where(tail.all(axis=1), tail.shape[1], np.argmin(tail, axis=1))
    run = np.where(tail[:, 0], lo - 1 + tail_run, lo - 1) if lo else tail_run
    best = None
    for t in range(n_o):
        s = int(run[t])
        if s < lo:
            continue
        if s == 0:
            val = 0
        elif kind == "minmax":
            val = _scalar(d[t, s - 1])
        else:
            val = _scalar(prefix[t, s - 1])
        cand = (-s, val, t)
        if best is None or cand < best:
            best = cand
    return best[2], -best[0], best[1]


def _adaptive(m, order, k, kind, lam, global_min_size, max_size_rule, allow_absorb) -> IntensityState:
    _check_k(m, k)
    if not 0 <= lam <= 1:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    if m.n == 1:
        return _singleton_run(m, k, kind)
    order = _prepare(m, order)
    pool = _Pool(m, order)
    state = IntensityState(m.n, k, kind)
    for k_o in range(k, 0, -1):
        rows = pool.rows
        n_o = rows.size
        if n_o == 0:
            break  # an absorbing cluster took everything
        # an absorbing cluster may leave fewer points than clusters to build
        k_eff = min(k_o, n_o) if allow_absorb else k_o
        b = size_bounds(n_o, k_eff, global_min_size, max_size_rule, allow_absorb)
        idx, dist = pool.neighbours(rows, b.max_scan)
        params, _ = _first_phase(dist, b.min_scan, kind, lam)
        pos, scan, value = _second_phase(dist, b, params, kind)
        params = replace(params, best_scan=scan)
        _emit(state, pool, k_o, b, rows[pos], idx[pos, :scan], value, params)
    return _finish(state, pool)


def adaptive_minmax(
    m: DistanceMatrix,
    order: NeighborOrder | None = None,
    k: int = 2,
    lam: float = 0.3,
    global_min_size: int = 2,
    max_size_rule: MaxSizeRule = "per_text",
    allow_absorb: bool = False,
) -> IntensityState:
    """Variable-size MinMax clusters.

    Phase one scores each anchor at the minimum size ``ceil(n_o / k_o)`` and
    takes the best one's distance plus a slack ``TargetGap`` as the
    ``DistanceLimit``.  ``TargetGap`` blends the winner's mean and smallest
    gap between consecutive neighbour distances: ``lam * mean + (1 - lam) *
    min``.  Phase two lets every anchor take neighbours while they lie within
    the limit, up to the maximum size, and picks the anchor with the most
    neighbours, then the smallest last distance, then the lowest index.

    ``allow_absorb`` lifts the maximum size to ``n_o``, so a cluster may
    swallow the rest of the points and the run ends with fewer than ``k``
    clusters (see :attr:`IntensityState.k_final`).
    """
    return _adaptive(m, order, k, "minmax", lam, global_min_size, max_size_rule, allow_absorb)


def adaptive_minsum(
    m: DistanceMatrix,
    order: NeighborOrder | None = None,
    k: int = 2,
    lam: float = 0.3,
    global_min_size: int = 2,
    max_size_rule: MaxSizeRule = "per_text",
    allow_absorb: bool = False,
) -> IntensityState:
    """Variable-size MinSum clusters.

    Phase one ranks anchors by (sum, last distance, larger smallest gap) at
    the minimum size.  Phase two grows each anchor while its running sum
    stays within ``BestSum + TargetGap``, a limit that increases by
    ``DistanceLimit`` for every neighbour beyond the minimum size.  Selection
    is by most neighbours, then smallest sum, then lowest index.
    """
    return _adaptive(m, order, k, "minsum", lam, global_min_size, max_size_rule, allow_absorb)


def _restricted_sizes(m: DistanceMatrix, state: IntensityState) -> list[int]:
    """Sizes after reassigning the clustered points to the generated centroids."""
    cents = np.array([s.centroid for s in state.steps], dtype=np.intp)
    pts = np.array(sorted(i for s in state.steps for i in s.members), dtype=np.intp)
    # argmin keeps the first row on ties, so order rows by centroid index
    rank = np.argsort(cents, kind="stable")
    lab = rank[np.argmin(m.d[np.ix_(cents[rank], pts)], axis=0)]
    lab[np.searchsorted(pts, cents)] = np.arange(cents.size)
    return sorted(np.bincount(lab, minlength=cents.size).tolist(), reverse=True)


def cluster_size_refinement(
    m: DistanceMatrix,
    order: NeighborOrder | None = None,
    k: int = 2,
    approach: Literal["approach1", "approach2"] = "approach1",
    base: Literal["minmax", "minsum"] = "minmax",
    interrupt_at: int | None = None,
    cfg: EngineConfig | None = None,
) -> IntensityState:
    """Rerun the primary start with sizes learned from a first pass.

    ``approach1`` reassigns points once to the first pass's centroids;
    ``approach2`` runs the full engine from the first pass.  The resulting
    cluster sizes, sorted descending, fix the sizes of the second pass in
    generation order.  ``interrupt_at`` (``approach1`` only) stops the first
    pass after ``C(interrupt_at)``; later steps use ``ceil(n_o / k_o)``.

    The sizes used are stored in the returned state's ``sizes``.
    """
    if k < 2:
        raise BadKError("size refinement needs k >= 2")
    _check_k(m, k)
    if approach not in ("approach1", "approach2"):
        raise ValueError(f"unknown approach {approach!r}")
    if interrupt_at is not None and approach != "approach1":
        raise ValueError("interrupt_at only applies to approach1")
    if interrupt_at is not None and not 1 <= interrupt_at <= k:
        raise BadKError(f"interrupt_at must lie in [1, {k}]")
    order = order if order is not None else neighbor_order(m)
    run = primary_minmax if base == "minmax" else primary_minsum
    first = run(m, order, k, interrupt_at=interrupt_at)
    if approach == "approach1":
        sizes = _restricted_sizes(m, first)
    else:
        measure = MINMAX if base == "minmax" else MINSUM
        cfg = replace(cfg or EngineConfig(), measure=measure)
        report = run_kpc(first.to_clustering(m), cfg, m)
        sizes = sorted((len(c) for c in report.final.clusters), reverse=True)
    return run(m, order, k, cluster_sizes=sizes[:k])


def brute_force_best_cluster(
    m: DistanceMatrix,
    N_o: Sequence[int],
    v: int,
    measure: SeparationMeasure = MINMAX,
    limit: int = BRUTE_FORCE_LIMIT,
) -> BestCluster:
    """Exhaustively find the size-``v`` subset of ``N_o`` with the smallest span.

    Ties go to the lexicographically smallest member set, and within it to
    the lowest-index centroid.  Raises :class:`CombinatorialBlowupError` when
    there are more than ``limit`` subsets.
    """
    pts = sorted(int(i) for i in N_o)
    if not 1 <= v <= len(pts):
        raise ValueError(f"need 1 <= v <= |N_o|, got v={v}, |N_o|={len(pts)}")
    total = math.comb(len(pts), v)
    if total > limit:
        raise CombinatorialBlowupError(f"{total} subsets exceed the limit of {limit}")
    if v == 1:
        return BestCluster((pts[0],), pts[0], 0)
    m_eff, measure = measure.prepare(m)
    d = m_eff.d
    best = None
    combos_iter = itertools.combinations(pts, v)
    chunk = max(1, 200_000 // (v * v))
    eye = np.eye(v, dtype=bool)
    while True:
        block = list(itertools.islice(combos_iter, chunk))
        if not block:
            break
        c = np.array(block, dtype=np.intp)
        sub = d[c[:, :, None], c[:, None, :]]
        if measure.kind == "minmax":
            if sub.dtype == object:
                sep = np.array([[max(r[j] for j in range(v) if j != a) for a, r in enumerate(s)] for s in sub], dtype=object)
            else:
                low = np.iinfo(sub.dtype).min if sub.dtype.kind in "iu" else -math.inf
                sep = np.where(eye, low, sub).max(axis=2)
        else:
            sep = sub.sum(axis=2)
        spans = sep.min(axis=1)
        t = int(np.argmin(spans))
        val = spans[t]
        if best is None or val < best[0]:
            a = int(np.argmin(sep[t]))
            best = (val, block[t], block[t][a])
    return BestCluster(tuple(best[1]), int(best[2]), _scalar(best[0]))
