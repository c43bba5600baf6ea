"""Declarative run configuration and the orchestration shared by the CLI and
the estimators: pick a start, run the engine (plain, regret-limited or with
restarts), then score the result."""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from ._errors import BadKError, ConfigError
from .distance import MINMAX, DistanceMatrix, SeparationMeasure, neighbor_order
from .diversity import (
    DiversityState,
    TargetSpec,
    compact_maxmin,
    compound_diversity,
    mind_trace_report,
    refined_diversity,
    simple_diversity,
    successive_elimination,
    targeted_simple,
    targeted_tiebreak,
)
from .engine import Clustering, EngineConfig, RunReport, run_kpc, span_objective
from .intensity import (
    IntensityState,
    adaptive_minmax,
    adaptive_minsum,
    cluster_size_refinement,
    primary_minmax,
    primary_minsum,
)
from .regret import QualityReport, diversified_restart, quality, run_regret_threshold

__all__ = ["RunConfig", "RunOutcome", "execute", "START_METHODS", "DIVERSITY_STARTS", "INTENSITY_STARTS"]

DIVERSITY_STARTS = ("simple", "refined", "compound", "targeted", "targeted_tiebreak", "compact", "elimination")
INTENSITY_STARTS = ("primary", "adaptive")
START_METHODS = DIVERSITY_STARTS + INTENSITY_STARTS + ("explicit",)

_CHOICES = {
    "algorithm": ("kminmax", "kminsum"),
    "restart_pick": ("last", "middle"),
    "t_rule": ("mean", "median"),
    "compact_rule": ("maxd", "sumd"),
    "rule": ("random", "span_max", "span_min", "span_mean"),
    "max_size_rule": ("per_text", "per_pseudocode"),
    "refine": ("none", "approach1", "approach2"),
    "objective": ("span_sum", "span_sum_squared", "span_mean_sum"),
    "termination": ("fixed_point", "objective_local_min"),
    "variant": ("plain", "regret", "restart"),
    "restart_mode": ("second", "third", "farthest"),
    "format": ("auto", "dense", "points", "lower"),
    "metric": ("euclidean", "squared_euclidean", "manhattan"),
}


@dataclass
class RunConfig:
    """Every knob of one clustering run.

    Field names double as CLI flag names (``k_check`` is ``--k-check``).
    ``seed_point=None`` means "draw one from ``rng_seed``"; the resolved
    value is written back so a saved config replays exactly.
    """

    input: Optional[str] = None
    format: str = "auto"
    metric: str = "euclidean"

    algorithm: str = "kminmax"
    k: int = 2
    p: float = 0.0

    start: str = "primary"
    seeds: Optional[list[int]] = None
    seed_point: Optional[int] = None
    restart_pick: str = "last"
    max_restarts: int = 10
    k_check: Optional[int] = None
    T: Optional[float] = None
    T0: float = 0.0
    f: Optional[float] = None
    t_rule: str = "mean"
    compact_rule: str = "maxd"
    rule: str = "span_max"
    u_mode: bool = False
    iterate: bool = False
    lam: float = 0.3
    global_min_size: int = 2
    max_size_rule: str = "per_text"
    allow_absorb: bool = False
    refine: str = "none"

    multi_centroid: bool = False
    reassign_all: bool = False
    objective: str = "span_sum"
    termination: str = "fixed_point"
    max_iterations: int = 100
    accelerated: bool = False

    variant: str = "plain"
    F: list[float] = field(default_factory=lambda: [0.2])
    max_select: Optional[int] = None
    restarts: int = 1
    restart_mode: str = "second"
    partial_fraction: float = 1.0

    rng_seed: int = 0
    output: Optional[str] = None

    def validate(self) -> "RunConfig":
        """Check option values and combinations; raises :class:`ConfigError`."""
        for name, allowed in _CHOICES.items():
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {list(allowed)}, got {getattr(self, name)!r}")
        if self.start not in START_METHODS:
            raise ConfigError(f"start must be one of {list(START_METHODS)}, got {self.start!r}")
        if not isinstance(self.k, int) or self.k < 1:
            raise ConfigError(f"k must be a positive integer, got {self.k!r}")
        if self.p < 0:
            raise ConfigError("p must be >= 0")
        if self.p and self.algorithm != "kminsum":
            raise ConfigError("the weight exponent p only applies to kminsum")
        if self.start == "explicit":
            if not self.seeds or len(self.seeds) != self.k:
                raise ConfigError(f"start=explicit needs exactly k={self.k} seeds")
            if len(set(self.seeds)) != len(self.seeds):
                raise ConfigError("explicit seeds must be distinct")
        if self.start == "compound" and self.k_check is None:
            raise ConfigError("start=compound needs k_check")
        if self.start == "refined" and self.k < 2:
            raise ConfigError("start=refined needs k >= 2")
        if self.start in ("targeted", "targeted_tiebreak", "compact") and self.k < 2:
            raise ConfigError(f"start={self.start} needs k >= 2")
        if self.refine != "none" and self.start != "primary":
            raise ConfigError("refine only applies to start=primary")
        if not 0 <= self.lam <= 1:
            raise ConfigError("lam must lie in [0, 1]")
        if self.global_min_size < 1:
            raise ConfigError("global_min_size must be >= 1")
        if self.T0 < 0 or (self.f is not None and self.f < 0):
            raise ConfigError("T0 and f must be non-negative")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if self.max_restarts < 1:
            raise ConfigError("max_restarts must be >= 1")
        if not self.F or any(not 0 < v <= 1 for v in self.F):
            raise ConfigError("every F value must lie in (0, 1]")
        if self.max_select is not None and self.max_select < 1:
            raise ConfigError("max_select must be >= 1")
        if self.variant == "regret" and self.reassign_all:
            raise ConfigError("variant=regret does not support reassign_all")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        if not 0 <= self.partial_fraction <= 1:
            raise ConfigError("partial_fraction must lie in [0, 1]")
        return self

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @property
    def measure(self) -> SeparationMeasure:
        if self.algorithm == "kminmax":
            return MINMAX
        return SeparationMeasure("minsum", float(self.p))

    def engine_config(self) -> EngineConfig:
        return EngineConfig(
            measure=self.measure,
            multi_centroid=self.multi_centroid,
            reassign_all=self.reassign_all,
            objective=self.objective,
            termination=self.termination,
            max_iterations=self.max_iterations,
            use_accelerated_update=self.accelerated,
        )


@dataclass
class RunOutcome:
    config: RunConfig
    report: RunReport
    quality: Optional[QualityReport]
    start_state: DiversityState | IntensityState | None
    mind_flags: list[int]
    timings: dict[str, float]
    restart_objectives: list = field(default_factory=list)

    @property
    def clustering(self) -> Clustering:
        return self.report.final


def resolve(cfg: RunConfig, n: int) -> RunConfig:
    """Validate against the instance size and pin down random choices."""
    cfg.validate()
    if cfg.k > n:
        raise BadKError(f"k={cfg.k} exceeds the number of points n={n}")
    out = dataclasses.replace(cfg)
    if out.seed_point is None:
        out.seed_point = int(np.random.default_rng(out.rng_seed).integers(n))
    if not 0 <= out.seed_point < n:
        raise ConfigError(f"seed_point {out.seed_point} out of range for n={n}")
    if out.seeds is not None:
        out.seeds = [int(s) for s in out.seeds]
        if any(not 0 <= s < n for s in out.seeds):
            raise ConfigError("explicit seed out of range")
    if out.k_check is not None and not 2 <= out.k_check <= out.k - 1:
        raise ConfigError(f"k_check must lie in [2, k - 1], got {out.k_check}")
    return out


def build_start(cfg: RunConfig, m: DistanceMatrix):
    """Return ``(start, state)``: what to hand to the engine plus the start's
    own record (a diversity or intensity state, or None)."""
    k, s = cfg.k, cfg.start
    if s == "explicit":
        return list(cfg.seeds), None
    if s in INTENSITY_STARTS:
        mw, _ = cfg.measure.prepare(m)
        order = neighbor_order(mw) if mw.n >= 2 else None
        minmax = cfg.algorithm == "kminmax"
        if s == "primary" and cfg.refine != "none" and k >= 2:
            base = "minmax" if minmax else "minsum"
            st = cluster_size_refinement(mw, order, k, cfg.refine, base, cfg=cfg.engine_config())
        elif s == "primary":
            st = (primary_minmax if minmax else primary_minsum)(mw, order, k)
        else:
            st = (adaptive_minmax if minmax else adaptive_minsum)(
                mw, order, k, cfg.lam, cfg.global_min_size, cfg.max_size_rule, cfg.allow_absorb
            )
        return st.to_clustering(mw), st
    if s == "simple":
        st = simple_diversity(m, k, cfg.seed_point)
    elif s == "refined":
        st = refined_diversity(m, k, cfg.seed_point, cfg.restart_pick, cfg.max_restarts)
    elif s == "compound":
        st = compound_diversity(m, k, cfg.k_check, cfg.seed_point, cfg.max_restarts, cfg.restart_pick)
    elif s == "targeted":
        st = targeted_simple(m, k, _target(cfg, m), cfg.seed_point)
    elif s == "targeted_tiebreak":
        prior = simple_diversity(m, k, cfg.seed_point)
        st = targeted_tiebreak(m, k, TargetSpec(T0=cfg.T0, f=cfg.f), prior, cfg.compact_rule)
    elif s == "compact":
        st = compact_maxmin(m, k, cfg.T0, cfg.seed_point, cfg.compact_rule)
    else:
        st = successive_elimination(m, k, cfg.rule, cfg.measure.unweighted, cfg.iterate, cfg.u_mode, rng=cfg.rng_seed)
    return list(st.seeds), st


def _target(cfg: RunConfig, m: DistanceMatrix) -> TargetSpec:
    if cfg.T is not None:
        return TargetSpec(T=cfg.T, T0=cfg.T0, f=cfg.f)
    trace = simple_diversity(m, cfg.k, cfg.seed_point).mind_trace
    return TargetSpec.from_trace(trace, cfg.t_rule, T0=cfg.T0, f=cfg.f)


def _run_engine(cfg: RunConfig, start, m: DistanceMatrix, entry: str = "step2") -> RunReport:
    ecfg = cfg.engine_config()
    if cfg.variant == "regret":
        return run_regret_threshold(start, ecfg, m, list(cfg.F), cfg.max_select, entry=entry)
    return run_kpc(start, ecfg, m, entry=entry)


def default_gap_threshold(trace) -> float:
    """Mean of the positive drops in a ``MinD`` trace (0 when there are none)."""
    drops = [a - b for a, b in zip(trace, trace[1:]) if a - b > 0]
    return float(np.mean(drops)) if drops else 0.0


def execute(cfg: RunConfig, m: DistanceMatrix, gap_threshold: float | None = None) -> RunOutcome:
    """Run one configuration on a matrix.

    ``cfg`` must already be resolved (see :func:`resolve`).  With
    ``variant="restart"`` the run is repeated ``restarts`` times from
    diversified restarts and the clustering with the lowest objective is
    kept (the earliest on ties).
    """
    timings = {}
    t0 = time.perf_counter()
    start, st = build_start(cfg, m)
    timings["start"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    report = _run_engine(cfg, start, m)
    restart_objs = []
    if cfg.variant == "restart" and report.final.k >= 2:
        best = report
        current = report
        mw, _ = cfg.measure.prepare(m)
        for _ in range(cfg.restarts):
            seeded = diversified_restart(current.final, cfg.engine_config(), mw, cfg.restart_mode, cfg.partial_fraction)
            current = _run_engine(cfg, seeded, m, entry="step1")
            restart_objs.append(current.objective_trace[-1])
            if current.objective_trace[-1] < best.objective_trace[-1]:
                best = current
        report = best
    timings["engine"] = time.perf_counter() - t0

    q = None
    if report.final.k >= 2:
        mw, _ = cfg.measure.prepare(m)
        q = quality(report.final, mw, multi_centroid=cfg.multi_centroid)
        report.value_metric = q.value

    flags: list[int] = []
    if isinstance(st, DiversityState) and st.mind_trace:
        thr = default_gap_threshold(st.mind_trace) if gap_threshold is None else gap_threshold
        flags = mind_trace_report(st, thr)
    return RunOutcome(cfg, report, q, st, flags, timings, restart_objs)


def objective_of(outcome: RunOutcome):
    return span_objective(outcome.report.final, outcome.config.objective)
