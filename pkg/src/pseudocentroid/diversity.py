"""Diversity-based seeding: pick ``k`` mutually distant points.

All methods grow an ordered seed list ``H`` one point at a time.  ``MinD(i)``
is the distance from candidate ``i`` to its nearest chosen seed, read as
``d[i, h]``; it is kept up to date incrementally, so one selection step costs
O(n).  Ties always go to the lowest index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from ._errors import BadKCheckError, BadKError
from .distance import MINMAX, DistanceMatrix, SeparationMeasure, pseudo_centroid

__all__ = [
    "DiversityState",
    "TargetSpec",
    "simple_diversity",
    "refined_diversity",
    "compound_diversity",
    "targeted_simple",
    "targeted_tiebreak",
    "compact_maxmin",
    "successive_elimination",
    "mind_trace_report",
    "selection_trace",
    "mean_min_distance",
]


@dataclass
class DiversityState:
    """Result of a seeding run.

    ``seeds`` is ``H`` in selection order and ``remaining`` the unchosen
    points.  ``mind_trace[t]`` is ``MinD`` of the seed chosen at step
    ``t + 2``.  ``history`` records per-pass objective values for the
    restarting methods (``CurrentMaxMin`` or the target ``T``).
    """

    seeds: list[int]
    remaining: list[int]
    mind_trace: list[float]
    history: list[float] = field(default_factory=list)
    k_too_large: bool = False

    @property
    def k(self) -> int:
        return len(self.seeds)


@dataclass(frozen=True)
class TargetSpec:
    """Target distance ``T`` and slack for the targeted methods.

    The slack is ``T0`` unless ``f`` is given, in which case it is ``f * T``.
    ``t_rule`` picks how ``T`` is derived from an earlier run's trace.
    """

    T: float | None = None
    T0: float = 0.0
    f: float | None = None
    t_rule: Literal["mean", "median"] = "mean"

    def __post_init__(self):
        if self.T0 < 0 or (self.f is not None and self.f < 0):
            raise ValueError("slack must be non-negative")

    def slack(self, T: float) -> float:
        return self.f * T if self.f is not None else self.T0

    @staticmethod
    def from_trace(trace, rule: str = "mean", **kw) -> "TargetSpec":
        if not len(trace):
            raise ValueError("cannot derive a target from an empty trace")
        T = float(np.median(trace)) if rule == "median" else float(np.mean(trace))
        return TargetSpec(T=T, t_rule=rule, **kw)


def _check_k(m: DistanceMatrix, k: int, lo: int = 1):
    if not lo <= k <= m.n:
        raise BadKError(f"need {lo} <= k <= n, got k={k}, n={m.n}")


def _check_seed(m: DistanceMatrix, seed_point: int):
    if not 0 <= seed_point < m.n:
        raise IndexError(f"seed point {seed_point} out of range")


def _column(m: DistanceMatrix, j: int) -> np.ndarray:
    col = m.d[:, j]
    return col.astype(float) if col.dtype == object else col


def selection_trace(m: DistanceMatrix, seeds) -> list[float]:
    """``MinD`` of every seed after the first, against the seeds before it."""
    d = m.d
    return [min(d[s, h] for h in seeds[:t]) for t, s in enumerate(seeds) if t > 0]


def _greedy(m: DistanceMatrix, k: int, first: list[int], choose) -> list[int]:
    """Grow ``first`` to ``k`` seeds; ``choose(mind, avail, seeds)`` returns the next."""
    n = m.n
    seeds = list(first)
    avail = np.ones(n, dtype=bool)
    avail[seeds] = False
    mind = np.full(n, np.inf)
    for s in seeds:
        np.minimum(mind, _column(m, s), out=mind)
    while len(seeds) < k:
        nxt = int(choose(mind, avail, seeds))
        seeds.append(nxt)
        avail[nxt] = False
        np.minimum(mind, _column(m, nxt), out=mind)
    return seeds


def _state(m: DistanceMatrix, seeds: list[int], history=None) -> DiversityState:
    chosen = set(seeds)
    return DiversityState(
        seeds=list(seeds),
        remaining=[i for i in range(m.n) if i not in chosen],
        mind_trace=selection_trace(m, seeds),
        history=list(history or []),
    )


def _maxmin_choice(mind, avail, seeds):
    vals = np.where(avail, mind, -np.inf)
    return np.argmax(vals)


def simple_diversity(m: DistanceMatrix, k: int, seed_point: int = 0) -> DiversityState:
    """Greedy max-min dispersion: each new seed maximises ``MinD``.

    O(n k) time with incremental ``MinD`` updates.
    """
    _check_k(m, k)
    _check_seed(m, seed_point)
    return _state(m, _greedy(m, k, [seed_point], _maxmin_choice))


def _restart_index(k: int, restart_pick: str) -> int:
    if restart_pick == "last":
        return k - 1
    if restart_pick == "middle":
        return max(2, math.floor((k - 1) / 2 + 0.5)) - 1
    raise ValueError(f"restart_pick must be 'last' or 'middle', got {restart_pick!r}")


def _local_opt(m, k_first, k_check, seeds, restart_pick, max_restarts, history):
    """Extend ``seeds`` to ``k_check`` and restart from its last (or middle)
    seed while the final ``MinD`` strictly improves.  Returns the best seeds."""
    previous = -np.inf
    best = list(seeds)
    head = list(seeds[: k_first - 1])
    for _ in range(max_restarts):
        cur = _greedy(m, k_check, head, _maxmin_choice)
        current = float(np.min([m.d[cur[-1], h] for h in cur[:-1]])) if k_check > 1 else 0.0
        history.append(current)
        if current <= previous:
            break
        previous, best = current, cur
        head = [cur[_restart_index(k_check, restart_pick)]]
    return best


def refined_diversity(
    m: DistanceMatrix,
    k: int,
    seed_point: int = 0,
    restart_pick: Literal["last", "middle"] = "last",
    max_restarts: int = 10,
) -> DiversityState:
    """Max-min seeding restarted from its own last seed until the final
    ``MinD`` stops improving; the best pass is returned.

    ``max_restarts`` caps the number of passes.  ``history`` lists the final
    ``MinD`` (``CurrentMaxMin``) of every pass, the rejected one included.
    """
    _check_k(m, k, lo=2)
    _check_seed(m, seed_point)
    history: list[float] = []
    best = _local_opt(m, 2, k, [seed_point], restart_pick, max_restarts, history)
    return _state(m, best, history)


def compound_diversity(
    m: DistanceMatrix,
    k: int,
    k_check: int,
    seed_point: int = 0,
    max_restarts: int = 10,
    restart_pick: Literal["last", "middle"] = "last",
) -> DiversityState:
    """Two-stage refined seeding.

    Stage one finds a locally best ``k_check``-seed set; stage two extends
    that set to ``k`` seeds and searches for a local optimum again.  Restarts
    inside stage two rebuild from a single seed, as in the refined method.
    """
    _check_k(m, k, lo=3)
    if not 2 <= k_check <= k - 1:
        raise BadKCheckError(f"need 2 <= k_check <= k - 1, got k_check={k_check}, k={k}")
    _check_seed(m, seed_point)
    history: list[float] = []
    stage1 = _local_opt(m, 2, k_check, [seed_point], restart_pick, max_restarts, history)
    best = _local_opt_extend(m, stage1, k, restart_pick, max_restarts, history)
    return _state(m, best, history)


def _local_opt_extend(m, prefix, k, restart_pick, max_restarts, history):
    # first pass keeps the stage-one prefix, later passes restart from one seed
    previous = -np.inf
    best = list(prefix)
    head = list(prefix)
    for _ in range(max_restarts):
        cur = _greedy(m, k, head, _maxmin_choice)
        current = float(min(m.d[cur[-1], h] for h in cur[:-1]))
        history.append(current)
        if current <= previous:
            break
        previous, best = current, cur
        head = [cur[_restart_index(k, restart_pick)]]
    return best


def targeted_simple(m: DistanceMatrix, k: int, target: TargetSpec, seed_point: int = 0) -> DiversityState:
    """Each new seed minimises ``|MinD(i) - T|``."""
    _check_k(m, k, lo=2)
    _check_seed(m, seed_point)
    if target.T is None or not np.isfinite(target.T):
        raise ValueError("targeted seeding needs a finite target T")
    T = target.T

    def choose(mind, avail, seeds):
        dev = np.where(avail, np.abs(mind - T), np.inf)
        return np.argmin(dev)

    return _state(m, _greedy(m, k, [seed_point], choose))


def mean_min_distance(m: DistanceMatrix, seeds) -> tuple[float, int]:
    """``MeanMinD`` of a seed set and the seed ``i#`` whose own ``MinD_o`` is
    closest to it (first in ``seeds`` order on ties)."""
    d = m.d
    own = [min(d[i, j] for j in seeds if j != i) for i in seeds]
    mean = float(sum(own)) / len(seeds)
    dev = [abs(v - mean) for v in own]
    return mean, int(seeds[int(np.argmin(dev))])


def _compact_rule(rule: str):
    if rule not in ("maxd", "sumd"):
        raise ValueError(f"compact_rule must be 'maxd' or 'sumd', got {rule!r}")
    return rule


def _pick_compact(m: DistanceMatrix, band: np.ndarray, seeds: list[int], rule: str) -> int:
    cand = np.flatnonzero(band)
    sub = m.d[np.ix_(cand, np.array(seeds, dtype=np.intp))]
    if sub.dtype == object:
        sub = sub.astype(float)
    score = sub.max(axis=1) if rule == "maxd" else sub.sum(axis=1)
    return int(cand[int(np.argmin(score))])


def targeted_tiebreak(
    m: DistanceMatrix,
    k: int,
    target: TargetSpec,
    prior: DiversityState,
    compact_rule: Literal["maxd", "sumd"] = "maxd",
    max_rounds: int = 1,
) -> DiversityState:
    """Targeted seeding with a compactness tie-break.

    The target is ``MeanMinD`` of ``prior`` and the first seed is ``i#``.  At
    each step the candidates within ``slack`` of the smallest deviation form
    a band, and the band member with the smallest max (or sum) distance to
    the chosen seeds wins.  With ``max_rounds > 1`` the procedure is repeated
    from its own output while the target keeps increasing.
    """
    _check_k(m, k, lo=2)
    _compact_rule(compact_rule)
    if prior.k != k:
        raise BadKError(f"prior seed set has {prior.k} points, expected {k}")
    history: list[float] = []
    best = None
    last_T = -np.inf
    source = prior.seeds
    for _ in range(max(1, max_rounds)):
        T, first = mean_min_distance(m, source)
        if T <= last_T:
            break
        history.append(T)
        slack = target.slack(T)

        def choose(mind, avail, seeds, T=T, slack=slack):
            dev = np.where(avail, np.abs(mind - T), np.inf)
            band = avail & (dev <= dev.min() + slack)
            return _pick_compact(m, band, seeds, compact_rule)

        best = _greedy(m, k, [first], choose)
        last_T = T
        source = best
    return _state(m, best, history)


def compact_maxmin(
    m: DistanceMatrix,
    k: int,
    T0: float,
    seed_point: int = 0,
    compact_rule: Literal["maxd", "sumd"] = "maxd",
) -> DiversityState:
    """Max-min seeding where every candidate within ``T0`` of the best
    ``MinD`` is eligible and the most compact one (by max or sum distance to
    the seeds) is taken."""
    _check_k(m, k, lo=2)
    _check_seed(m, seed_point)
    _compact_rule(compact_rule)
    if T0 < 0:
        raise ValueError("T0 must be non-negative")

    def choose(mind, avail, seeds):
        vals = np.where(avail, mind, -np.inf)
        band = avail & (vals >= vals.max() - T0)
        return _pick_compact(m, band, seeds, compact_rule)

    return _state(m, _greedy(m, k, [seed_point], choose))


def _nearest_within(d_row: np.ndarray, pool: np.ndarray, size: int) -> np.ndarray:
    """The ``size`` points of ``pool`` nearest by ``d_row``, ties by index."""
    if size <= 0 or pool.size == 0:
        return pool[:0]
    vals = d_row[pool]
    if vals.dtype == object:
        vals = vals.astype(float)
    pos = np.lexsort((pool, vals))[:size]
    return pool[pos]


def successive_elimination(
    m: DistanceMatrix,
    k: int,
    rule: Literal["random", "span_max", "span_min", "span_mean"] = "span_max",
    measure: SeparationMeasure = MINMAX,
    iterate: bool = False,
    u_mode: bool = False,
    u_rule: Literal["mean", "max"] = "mean",
    rng: np.random.Generator | int | None = 0,
) -> DiversityState:
    """Pick a seed, strike it and its neighbourhood from the pool, repeat.

    With ``r`` seeds still to choose from a pool of ``n_o`` points, a
    point's neighbourhood is its ``ceil(n_o / r)`` nearest pool members.
    The seed is chosen by ``rule`` over the span of each candidate's
    neighbourhood: largest, smallest, closest to the mean, or at random.

    ``u_mode`` switches to radius neighbourhoods after the first step: every
    pool point within ``U`` of the candidate, where ``U`` is the mean (or max)
    distance from seeds to the points they struck so far.  ``iterate`` runs a
    second pass that starts from the final seed of the first.  If the pool
    empties early the short seed list is returned with ``k_too_large`` set.
    """
    _check_k(m, k)
    if rule not in ("random", "span_max", "span_min", "span_mean"):
        raise ValueError(f"unknown elimination rule {rule!r}")
    if u_rule not in ("mean", "max"):
        raise ValueError(f"u_rule must be 'mean' or 'max', got {u_rule!r}")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    def one_pass(first: int | None):
        d = m.d
        pool = np.arange(m.n)
        seeds: list[int] = []
        struck: list[float] = []
        for step in range(k):
            if pool.size == 0:
                return seeds, True
            r = k - step
            size = math.ceil(pool.size / r)
            radius = None
            if u_mode and struck:
                radius = float(np.mean(struck)) if u_rule == "mean" else float(np.max(struck))

            def prox(i):
                others = pool[pool != i]
                if radius is None:
                    return _nearest_within(d[i], others, size)
                vals = d[i, others]
                return others[np.asarray(vals, dtype=float) <= radius]

            if step == 0 and first is not None:
                pick = first
            elif rule == "random":
                pick = int(gen.choice(pool))
            else:
                spans = np.array([float(pseudo_centroid(measure, prox(i), m).span) if prox(i).size else 0.0 for i in pool])
                if rule == "span_max":
                    pos = int(np.argmax(spans))
                elif rule == "span_min":
                    pos = int(np.argmin(spans))
                else:
                    pos = int(np.argmin(np.abs(spans - spans.mean())))
                pick = int(pool[pos])
            hit = prox(pick)
            struck.extend(float(v) for v in d[pick, hit])
            seeds.append(pick)
            gone = set(int(j) for j in hit) | {pick}
            pool = np.array([j for j in pool if j not in gone], dtype=np.intp)
        return seeds, False

    seeds, short = one_pass(None)
    if iterate and seeds:
        seeds, short = one_pass(seeds[-1])
    st = _state(m, seeds)
    st.k_too_large = short
    return st


def mind_trace_report(state: DiversityState, min_gap_threshold: float, floor: float | None = None) -> list[int]:
    """Seed counts ``k_o`` at which ``MinD`` drops sharply or falls too low.

    Flags ``k_o`` (counting seeds from 1, so ``mind_trace[0]`` is ``k_o=2``)
    when ``MinD`` fell by more than ``min_gap_threshold`` since ``k_o - 1``,
    or when it is below ``floor``.
    """
    flags = []
    tr = state.mind_trace
    for t, v in enumerate(tr):
        ko = t + 2
        if t > 0 and tr[t - 1] - v > min_gap_threshold:
            flags.append(ko)
        elif floor is not None and v < floor:
            flags.append(ko)
    return flags
