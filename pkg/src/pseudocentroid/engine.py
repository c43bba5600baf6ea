"""The K-PC iteration: nearest-centroid assignment alternating with
pseudo-centroid recomputation.

State convention: a :class:`Clustering` handed around between iterations is
always "post centroid step", i.e. each cluster's ``centroid`` and
``all_centroids`` are its pseudo-centroid(s) and ``span`` is its span.  One
call of :func:`kpc_iterate` reassigns points to those centroids and then
recomputes the centroids of the new clusters.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Literal, Mapping, Sequence, Union

import numpy as np

from ._errors import (
    BadKError,
    DuplicateCentroidError,
    InconsistentSetsError,
    MatchPointDroppedError,
    NoCentroidsError,
)
from .distance import (
    MINMAX,
    CentroidResult,
    DistanceMatrix,
    SeparationMeasure,
    pseudo_centroid,
    separate,
)

__all__ = [
    "Cluster",
    "Clustering",
    "EngineConfig",
    "RunReport",
    "assign_points",
    "recompute_centroids",
    "kpc_iterate",
    "run_kpc",
    "span_objective",
    "centroid_set",
    "match_point",
    "accelerated_minmax_update",
    "accelerated_minsum_update",
]

Objective = Literal["span_sum", "span_sum_squared", "span_mean_sum"]
Termination = Literal["fixed_point", "objective_local_min"]


@dataclass(frozen=True)
class Cluster:
    """One cluster: sorted members, the centroid used for assignment, every
    tied pseudo-centroid, and ``Separate(centroid, members)``."""

    members: tuple[int, ...]
    centroid: int
    all_centroids: tuple[int, ...]
    span: float | None = None

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class Clustering:
    clusters: tuple[Cluster, ...]
    n: int

    @property
    def k(self) -> int:
        return len(self.clusters)

    @property
    def labels(self) -> np.ndarray:
        out = np.full(self.n, -1, dtype=np.intp)
        for h, c in enumerate(self.clusters):
            out[list(c.members)] = h
        return out

    @property
    def centroids(self) -> tuple[int, ...]:
        return tuple(c.centroid for c in self.clusters)

    def validate(self) -> None:
        """Raise ``AssertionError`` unless the clusters partition ``0..n-1``."""
        seen = np.zeros(self.n, dtype=int)
        for c in self.clusters:
            assert c.members, "empty cluster"
            assert c.centroid in c.members, "centroid outside its cluster"
            assert set(c.all_centroids) <= set(c.members)
            seen[list(c.members)] += 1
        assert np.all(seen == 1), "clusters do not partition the points"


@dataclass(frozen=True)
class EngineConfig:
    measure: SeparationMeasure = MINMAX
    multi_centroid: bool = False
    reassign_all: bool = False
    objective: Objective = "span_sum"
    termination: Termination = "fixed_point"
    max_iterations: int = 100
    use_accelerated_update: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.objective not in ("span_sum", "span_sum_squared", "span_mean_sum"):
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.termination not in ("fixed_point", "objective_local_min"):
            raise ValueError(f"unknown termination rule {self.termination!r}")


@dataclass
class RunReport:
    """Outcome of one engine run.

    ``trajectory`` holds the accepted clusterings, the start included, so it
    has ``iterations + 1`` entries like ``objective_trace``.
    """

    iterations: int
    objective_trace: list
    reassigned_counts: list[int]
    final: Clustering
    terminated_by: Literal["fixed_point", "local_min", "iteration_cap"]
    value_metric: float | None = None
    k_initial: int = 0
    rejected_objective: float | None = None
    selected_counts: list[int] = field(default_factory=list)
    trajectory: list[Clustering] = field(default_factory=list, repr=False)

    @property
    def k_final(self) -> int:
        return self.final.k


def centroid_set(c: Clustering, multi_centroid: bool = False) -> frozenset[int]:
    """``N*(K)``: the centroid indices, or the union of all tied ones."""
    if multi_centroid:
        return frozenset(i for cl in c.clusters for i in cl.all_centroids)
    return frozenset(cl.centroid for cl in c.clusters)


def _as_sets(centroids) -> list[tuple[int, ...]]:
    sets = []
    for item in centroids:
        if isinstance(item, Cluster):
            sets.append(tuple(item.all_centroids) if item.all_centroids else (item.centroid,))
        elif isinstance(item, (int, np.integer)):
            sets.append((int(item),))
        else:
            sets.append(tuple(int(v) for v in item))
    return sets


def assign_points(
    centroids: Sequence[Union[int, Sequence[int]]],
    m: DistanceMatrix,
    reassign_all: bool = False,
    measure: SeparationMeasure | None = None,
) -> Clustering:
    """Put every non-centroid point with its nearest centroid.

    ``centroids[h]`` is either a point index or the tuple of points making up
    ``C*(h)`` (the first entry is the cluster's main centroid).  Nearness is
    ``d[centroid, j]``; ties go to the lowest centroid index.  Centroids stay
    in their own cluster.  With ``reassign_all`` a centroid that has a
    strictly nearer foreign centroid (only possible with negative distances)
    is demoted, processing centroids in ascending index; a cluster left with
    no centroid is dissolved, so fewer clusters may come back.

    When ``measure`` is given, each cluster's ``span`` is filled in with
    ``Separate(centroid, members)``.
    """
    sets = _as_sets(centroids)
    if not sets or any(len(s) == 0 for s in sets):
        raise NoCentroidsError("at least one centroid is required")
    flat = [i for s in sets for i in s]
    if len(set(flat)) != len(flat):
        raise DuplicateCentroidError("a point appears as centroid more than once")
    n = m.n
    if min(flat) < 0 or max(flat) >= n:
        raise IndexError("centroid index out of range")
    d = m.d

    owner = {i: h for h, s in enumerate(sets) for i in s}
    alive = {h: list(s) for h, s in enumerate(sets)}
    if reassign_all:
        for p in sorted(flat):
            h = owner[p]
            own = min(d[q, p] for q in alive[h])
            foreign = [d[q, p] for g, qs in alive.items() if g != h for q in qs]
            if foreign and min(foreign) < own:
                alive[h].remove(p)
                if not alive[h]:
                    del alive[h]
    keep = sorted(alive)
    cpts = sorted(i for h in keep for i in alive[h])
    lab_of = np.array([keep.index(owner[i]) for i in cpts], dtype=np.intp)
    nearest = np.argmin(d[np.array(cpts, dtype=np.intp), :], axis=0)
    labels = lab_of[nearest]
    for pos, i in enumerate(cpts):
        labels[i] = lab_of[pos]

    clusters = []
    for pos, h in enumerate(keep):
        members = tuple(int(j) for j in np.flatnonzero(labels == pos))
        cent = tuple(alive[h])
        span = separate(measure, cent[0], members, m) if measure is not None else None
        clusters.append(Cluster(members, cent[0], cent, span))
    return Clustering(tuple(clusters), n)


def _from_result(members: Sequence[int], r: CentroidResult) -> Cluster:
    return Cluster(tuple(sorted(int(i) for i in members)), r.centroid, tuple(r.all_centroids), r.span)


def recompute_centroids(c: Clustering, cfg: EngineConfig | SeparationMeasure, m: DistanceMatrix) -> Clustering:
    """Refresh every cluster's pseudo-centroid(s) and span."""
    measure = cfg.measure if isinstance(cfg, EngineConfig) else cfg
    out = tuple(_from_result(cl.members, pseudo_centroid(measure, cl.members, m)) for cl in c.clusters)
    return Clustering(out, c.n)


def span_objective(c: Clustering, mode: Objective = "span_sum"):
    """Sum of spans, of squared spans, or of spans divided by cluster size."""
    spans = [cl.span for cl in c.clusters]
    if any(s is None for s in spans):
        raise ValueError("clustering has unevaluated spans; run recompute_centroids first")
    if mode == "span_sum":
        return sum(spans)
    if mode == "span_sum_squared":
        return sum(s * s for s in spans)
    if mode == "span_mean_sum":
        return sum(s / len(cl) for s, cl in zip(spans, c.clusters))
    raise ValueError(f"unknown objective {mode!r}")


def match_point(cluster: Cluster, m: DistanceMatrix) -> int | None:
    """A member ``j*`` with ``d[i*, j*] = MaxDist(i*)``; lowest index on ties."""
    others = [j for j in cluster.members if j != cluster.centroid]
    if not others:
        return None
    row = m.d[cluster.centroid, others]
    return others[int(np.argmax(row))]


def accelerated_minmax_update(
    previous: Cluster, match: int | None, new_members: Iterable[int], m: DistanceMatrix
) -> CentroidResult:
    """MinMax centroid of the reassigned cluster, scoring only the newcomers.

    ``previous`` is the cluster as of the last centroid step (its
    ``all_centroids`` must be the full tied set) and ``match`` its point
    ``j*``.  Raises :class:`MatchPointDroppedError` when ``j*`` left the
    cluster.  The newcomers-only comparison is exact only when no point left
    and no newcomer lies farther than the old span from an old centroid;
    otherwise this falls back to a full recomputation, so the result always
    equals :func:`pseudo_centroid` on ``new_members``.
    """
    new = sorted(set(int(i) for i in new_members))
    new_set = set(new)
    if match is not None and match not in new_set:
        raise MatchPointDroppedError(f"match point {match} is no longer in the cluster")
    old = set(previous.members)
    added = [i for i in new if i not in old]
    span = previous.span
    star = tuple(sorted(previous.all_centroids))
    d = m.d
    if old - new_set or any(d[c, j] > span for c in star for j in added):
        return pseudo_centroid(MINMAX, new, m)
    if not added:
        return CentroidResult(star[0], span, star)
    idx = np.array(new, dtype=np.intp)
    vals = []
    for i in added:
        row = d[i, idx[idx != i]]
        vals.append(row.max() if row.size else 0)
    best = min(vals)
    winners = [i for i, v in zip(added, vals) if v == best]
    if best < span:
        star, span = tuple(winners), best
    elif best == span:
        star = tuple(sorted(star + tuple(winners)))
    span = span.item() if hasattr(span, "item") else span
    return CentroidResult(star[0], span, star)


def accelerated_minsum_update(
    saved: Mapping[int, float],
    added: Iterable[int],
    dropped: Iterable[int],
    m: DistanceMatrix,
) -> dict[int, float]:
    """Carry ``SumDist`` values across a reassignment.

    ``saved`` maps each point of the old cluster ``C'`` to ``SumDist(i, C')``.
    Points that stay get ``saved[i] + sum d(i, added) - sum d(i, dropped)``;
    newcomers are summed directly.  Returns values over the new cluster.
    """
    added = sorted(set(int(i) for i in added))
    dropped = sorted(set(int(i) for i in dropped))
    old = set(saved)
    if not set(dropped) <= old:
        raise InconsistentSetsError("dropped points must belong to the old cluster")
    if set(added) & old:
        raise InconsistentSetsError("added points must not belong to the old cluster")
    d = m.d
    stay = sorted(old - set(dropped))
    new_members = np.array(sorted(stay + added), dtype=np.intp)
    a = np.array(added, dtype=np.intp)
    r = np.array(dropped, dtype=np.intp)
    out: dict[int, float] = {}
    for i in stay:
        v = saved[i]
        if a.size:
            v = v + d[i, a].sum()
        if r.size:
            v = v - d[i, r].sum()
        out[i] = v
    for i in added:
        out[i] = d[i, new_members].sum()  # d[i, i] = 0
    return out


def _result_from_sums(sums: Mapping[int, float]) -> CentroidResult:
    best = min(sums.values())
    tied = tuple(sorted(i for i, v in sums.items() if v == best))
    best = best.item() if hasattr(best, "item") else best
    return CentroidResult(tied[0], best, tied)


def _moved(before: Clustering, after: Clustering) -> int:
    # cluster identity = the centroid that did the assigning
    key_before = np.empty(before.n, dtype=np.intp)
    for cl in before.clusters:
        key_before[list(cl.members)] = cl.centroid
    key_after = np.empty(after.n, dtype=np.intp)
    for cl in after.clusters:
        key_after[list(cl.members)] = cl.centroid
    return int(np.count_nonzero(key_before != key_after))


class _Stepper:
    """One reassignment + centroid pass, optionally with incremental updates."""

    def __init__(self, cfg: EngineConfig, m: DistanceMatrix):
        self.cfg = cfg
        self.m = m
        self._sums: dict[int, dict[int, float]] = {}

    def centroid_sets(self, x: Clustering):
        if self.cfg.multi_centroid:
            return [(cl.centroid,) + tuple(i for i in cl.all_centroids if i != cl.centroid) for cl in x.clusters]
        return [cl.centroid for cl in x.clusters]

    def reassign(self, x: Clustering) -> Clustering:
        return assign_points(self.centroid_sets(x), self.m, self.cfg.reassign_all)

    def recompute(self, x: Clustering, y: Clustering) -> Clustering:
        """Centroid step on ``y``; ``x`` is the state ``y`` was derived from."""
        cfg, m = self.cfg, self.m
        if not cfg.use_accelerated_update or y.k != x.k:
            self._sums.clear()
            return recompute_centroids(y, cfg, m)
        out = []
        for h, (prev, cur) in enumerate(zip(x.clusters, y.clusters)):
            if cfg.measure.kind == "minmax":
                try:
                    r = accelerated_minmax_update(prev, match_point(prev, m), cur.members, m)
                except MatchPointDroppedError:
                    r = pseudo_centroid(cfg.measure, cur.members, m)
            else:
                saved = self._sums.get(h)
                if saved is None or set(saved) != set(prev.members):
                    saved = _direct_sums(prev.members, m)
                old = set(prev.members)
                new = set(cur.members)
                sums = accelerated_minsum_update(saved, new - old, old - new, m)
                self._sums[h] = sums
                r = _result_from_sums(sums)
            out.append(_from_result(cur.members, r))
        return Clustering(tuple(out), y.n)

    def __call__(self, x: Clustering):
        y = self.reassign(x)
        z = self.recompute(x, y)
        changed = centroid_set(z, self.cfg.multi_centroid) != centroid_set(x, self.cfg.multi_centroid)
        return z, changed, _moved(x, y)


def _direct_sums(members: Sequence[int], m: DistanceMatrix) -> dict[int, float]:
    idx = np.array(sorted(members), dtype=np.intp)
    rows = m.d[np.ix_(idx, idx)].sum(axis=1)
    return {int(i): v for i, v in zip(idx, rows)}


def kpc_iterate(c: Clustering, cfg: EngineConfig, m: DistanceMatrix) -> tuple[Clustering, bool]:
    """One reassignment + centroid pass.

    ``changed`` is False iff the centroid set ``N*(K)`` is the same set of
    indices before and after.
    """
    m, measure = cfg.measure.prepare(m)
    cfg = replace(cfg, measure=measure, use_accelerated_update=False)
    z, changed, _ = _Stepper(cfg, m)(c)
    return z, changed


def initial_state(start, cfg: EngineConfig, m: DistanceMatrix, entry: str = "step2") -> Clustering:
    """Turn a start into a post-centroid-step clustering.

    ``start`` is a sequence of seed indices (assigned, then centroids
    computed), a :class:`Clustering` from an intensity start (used as-is;
    ``entry="step2"``), or a clustering whose centroids still need computing
    (``entry="step1"``, e.g. after a diversified restart).
    """
    if isinstance(start, Clustering):
        if entry == "step1":
            return recompute_centroids(start, cfg, m)
        if entry != "step2":
            raise ValueError(f"entry must be 'step1' or 'step2', got {entry!r}")
        clusters = tuple(
            replace(cl, span=separate(cfg.measure, cl.centroid, cl.members, m)) if cl.span is None else cl
            for cl in start.clusters
        )
        return Clustering(clusters, start.n)
    seeds = [int(s) for s in start]
    return recompute_centroids(assign_points(seeds, m, cfg.reassign_all), cfg, m)


def drive(
    x0: Clustering,
    step: Callable[[Clustering], tuple],
    cfg: EngineConfig,
) -> RunReport:
    """Iterate ``step`` from ``x0`` under the configured termination rules.

    ``step(x)`` returns ``(next, changed, moved)`` and optionally a fourth
    item, a count recorded in ``selected_counts``; a fifth item ``complete``
    (default True) marks whether an unchanged centroid set may end the run.
    """
    trace = [span_objective(x0, cfg.objective)]
    counts: list[int] = []
    selected: list[int] = []
    recent = deque([centroid_set(x0, cfg.multi_centroid)], maxlen=4)
    states = [x0]
    x = x0
    terminated = "iteration_cap"
    rejected = None
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        res = step(x)
        y, changed, moved = res[:3]
        complete = res[4] if len(res) > 4 else True
        obj = span_objective(y, cfg.objective)
        if cfg.termination == "objective_local_min" and obj > trace[-1]:
            rejected = obj
            terminated = "local_min"
            it -= 1
            break
        trace.append(obj)
        counts.append(moved)
        if len(res) > 3:
            selected.append(res[3])
        x = y
        states.append(y)
        if not changed and complete:
            terminated = "fixed_point"
            break
        sig = centroid_set(y, cfg.multi_centroid)
        if changed and sig in list(recent)[:-1]:
            # revisiting an older centroid set: a cycle, not convergence
            terminated = "iteration_cap"
            break
        recent.append(sig)
    return RunReport(
        iterations=it,
        objective_trace=trace,
        reassigned_counts=counts,
        final=x,
        terminated_by=terminated,
        k_initial=x0.k,
        rejected_objective=rejected,
        selected_counts=selected,
        trajectory=states,
    )


def run_kpc(start, cfg: EngineConfig, m: DistanceMatrix, entry: str = "step2") -> RunReport:
    """Run the K-PC algorithm to a fixed point, local minimum or the cap.

    See :func:`initial_state` for the accepted ``start`` forms.  Starting
    from an intensity-based clustering skips the initial assignment and
    centroid steps.
    """
    k = start.k if isinstance(start, Clustering) else len(list(start))
    if not 1 <= k <= m.n:
        raise BadKError(f"need 1 <= k <= n, got k={k}, n={m.n}")
    m, measure = cfg.measure.prepare(m)
    cfg = replace(cfg, measure=measure)
    x0 = initial_state(start, cfg, m, entry)
    return drive(x0, _Stepper(cfg, m), cfg)
