"""Randomised equivalence checks for the intensity-based starts.

Two suites:

* ``primary``: every cluster emitted by the primary starts has the smallest
  span among all subsets of the available points with the same size
  (checked by exhaustive enumeration).
* ``adaptive``: the adaptive starts agree step by step with a plain
  re-implementation that sorts each anchor's neighbours from scratch and
  applies the limits literally.

Both are used by the test suite and by ``pseudocentroid oracle``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._errors import CombinatorialBlowupError
from .distance import MINMAX, MINSUM, DistanceMatrix, build_matrix, neighbor_order
from .intensity import (
    BRUTE_FORCE_LIMIT,
    adaptive_minmax,
    adaptive_minsum,
    brute_force_best_cluster,
    primary_minmax,
    primary_minsum,
)

log = logging.getLogger(__name__)

__all__ = [
    "random_instance",
    "check_primary",
    "reference_adaptive",
    "check_adaptive",
    "OracleSummary",
    "run_oracle_suite",
]


def random_instance(rng: np.random.Generator, n: int, lo: int = 1, hi: int = 100, distinct: bool = True) -> DistanceMatrix:
    """Symmetric integer matrix with off-diagonal entries in ``[lo, hi]``.

    With ``distinct`` the entries are drawn without replacement when the
    range is large enough.
    """
    iu = np.triu_indices(n, 1)
    pool = np.arange(lo, hi + 1)
    replace = not distinct or iu[0].size > pool.size
    vals = rng.choice(pool, size=iu[0].size, replace=replace)
    d = np.zeros((n, n), dtype=np.int64)
    d[iu] = vals
    return build_matrix(d + d.T)


def check_primary(m: DistanceMatrix, k: int, kind: str) -> list[str]:
    """Compare each primary-start cluster with the exhaustive optimum.

    Returns a list of mismatch descriptions (empty when all agree).
    """
    run = primary_minmax if kind == "minmax" else primary_minsum
    measure = MINMAX if kind == "minmax" else MINSUM
    state = run(m, neighbor_order(m), k)
    avail = set(range(m.n))
    problems = []
    for c in state.steps:
        best = brute_force_best_cluster(m, sorted(avail), c.size, measure)
        if best.span != c.span:
            problems.append(f"{kind} k_o={c.k_o}: emitted span {c.span}, optimum {best.span}")
        avail -= set(c.members)
    return problems


def _bounds(n_o, k_o, gms, rule, absorb):
    lo = math.ceil(n_o / k_o)
    if absorb:
        hi = n_o
    elif rule == "per_text":
        hi = n_o - gms * (k_o - 1)
        if hi < lo:
            hi = lo
    else:
        hi = n_o - lo * (k_o - 1)
    return lo - 1, hi - 1


def reference_adaptive(
    m: DistanceMatrix,
    k: int,
    kind: str,
    lam: float = 0.3,
    global_min_size: int = 2,
    max_size_rule: str = "per_text",
    allow_absorb: bool = False,
) -> list[tuple[int, int, float]]:
    """Straightforward adaptive start; returns ``(size, anchor, value)`` per step.

    Neighbours are re-sorted from the raw matrix at every step and each
    anchor is processed with explicit running comparisons.
    """
    d = m.d.tolist()
    avail = list(range(m.n))
    out = []
    for k_o in range(k, 0, -1):
        if not avail:
            break
        k_eff = min(k_o, len(avail)) if allow_absorb else k_o
        min_scan, max_scan = _bounds(len(avail), k_eff, global_min_size, max_size_rule, allow_absorb)
        lists = {i: [d[i][j] for j in sorted((j for j in avail if j != i), key=lambda j: (d[i][j], j))] for i in avail}

        # phase one
        best_dist = best_sum = None
        best_min_gap = best_sum_gap = 0
        for i in avail:
            a = lists[i][:min_scan]
            dist = a[-1] if a else 0
            total = sum(a)
            gaps = [a[t] - a[t - 1] for t in range(1, len(a))]
            min_gap = min(gaps) if gaps else math.inf
            if kind == "minmax":
                better = best_dist is None or dist < best_dist or (dist == best_dist and min_gap > best_min_gap)
            else:
                better = (
                    best_sum is None
                    or total < best_sum
                    or (total == best_sum and dist < best_dist)
                    or (total == best_sum and dist == best_dist and min_gap > best_min_gap)
                )
            if better:
                best_dist, best_sum, best_min_gap, best_sum_gap = dist, total, min_gap, sum(gaps)
        target = 0 if min_scan < 2 else lam * best_sum_gap / (min_scan - 1) + (1 - lam) * best_min_gap
        dist_limit = best_dist + target

        # phase two
        win = None
        for i in avail:
            a = lists[i]
            if kind == "minmax":
                scan = 0
                while scan < max_scan and a[scan] <= dist_limit:
                    scan += 1
                if scan < min_scan:
                    continue
                value = a[scan - 1] if scan else 0
            else:
                scan, total, limit = 0, 0, best_sum + target
                while scan < max_scan:
                    nxt = total + a[scan]
                    step_limit = limit + max(0, scan + 1 - min_scan) * dist_limit
                    if nxt > step_limit:
                        break
                    scan, total = scan + 1, nxt
                if scan < min_scan:
                    continue
                value = total
            if win is None or scan > win[0] or (scan == win[0] and value < win[2]):
                win = (scan, i, value)
        scan, i, value = win
        members = [i] + sorted((j for j in avail if j != i), key=lambda j: (d[i][j], j))[:scan]
        out.append((scan + 1, i, value))
        avail = [j for j in avail if j not in set(members)]
    return out


def check_adaptive(m: DistanceMatrix, k: int, kind: str, lam: float = 0.3, **kw) -> list[str]:
    run = adaptive_minmax if kind == "minmax" else adaptive_minsum
    state = run(m, neighbor_order(m), k, lam=lam, **kw)
    got = [(c.size, c.centroid, c.span) for c in state.steps]
    want = reference_adaptive(m, k, kind, lam, **kw)
    if len(got) != len(want):
        return [f"{kind} lam={lam}: {len(got)} clusters vs reference {len(want)}"]
    return [
        f"{kind} lam={lam} step {t}: got {g}, reference {w}"
        for t, (g, w) in enumerate(zip(got, want))
        if g != w
    ]


@dataclass
class OracleSummary:
    trials: int
    passed: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def failed(self) -> int:
        return self.trials - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def line(self, name: str) -> str:
        return f"{name}: {self.passed}/{self.trials} pass"


def run_oracle_suite(
    suite: str,
    trials: int = 500,
    n_min: int = 6,
    n_max: int = 12,
    k_max: int = 4,
    seed: int = 0,
    lams=(0.0, 0.3, 1.0),
) -> OracleSummary:
    """Run one randomised suite (``"primary"`` or ``"adaptive"``).

    A trial passes when every cluster of every method under test agrees.
    Raises :class:`CombinatorialBlowupError` up front when the largest
    instance would need more than the enumeration limit.
    """
    if suite not in ("primary", "adaptive"):
        raise ValueError(f"unknown suite {suite!r}")
    if not 2 <= n_min <= n_max:
        raise ValueError(f"need 2 <= n_min <= n_max, got {n_min}, {n_max}")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    worst = math.comb(n_max, n_max // 2)
    if suite == "primary" and worst > BRUTE_FORCE_LIMIT:
        raise CombinatorialBlowupError(f"n={n_max} needs {worst} subsets, above the limit of {BRUTE_FORCE_LIMIT}")
    if trials == 0:
        log.warning("zero trials requested; the %s suite passes vacuously", suite)
    rng = np.random.default_rng(seed)
    summary = OracleSummary(trials)
    for t in range(trials):
        n = int(rng.integers(n_min, n_max + 1))
        k = int(rng.integers(min(2, k_max), min(k_max, n) + 1))
        m = random_instance(rng, n)
        problems = []
        if suite == "primary":
            for kind in ("minmax", "minsum"):
                problems += check_primary(m, k, kind)
        else:
            lam = float(lams[t % len(lams)])
            for kind in ("minmax", "minsum"):
                problems += check_adaptive(m, k, kind, lam)
        if problems:
            summary.failures.append(f"trial {t} (n={n}, k={k}): " + "; ".join(problems))
        else:
            summary.passed += 1
    return summary
