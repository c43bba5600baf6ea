import numpy as np
import pytest

from pseudocentroid import BadKError, ConfigError, RunConfig, build_matrix, execute, resolve
from pseudocentroid.pipeline import START_METHODS, default_gap_threshold
from pseudocentroid.verify import OracleSummary, random_instance

from conftest import M4_ROWS


@pytest.mark.parametrize(
    "kw",
    [
        {"k": 0},
        {"algorithm": "kmeans"},
        {"p": 1.0},
        {"start": "explicit", "seeds": [0]},
        {"start": "explicit", "k": 2, "seeds": [1, 1]},
        {"refine": "approach1", "start": "simple"},
        {"lam": 1.5},
        {"F": [0.0]},
        {"variant": "regret", "reassign_all": True},
    ],
)
def test_invalid_configs(kw):
    with pytest.raises(ConfigError):
        RunConfig(**kw).validate()


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"k": 2, "colour": "red"})
    assert RunConfig.from_dict(RunConfig(k=3).to_dict()) == RunConfig(k=3)


def test_resolve_pins_seed_point_and_checks_k():
    cfg = resolve(RunConfig(k=2, rng_seed=5), 10)
    assert cfg.seed_point == resolve(RunConfig(k=2, rng_seed=5), 10).seed_point
    with pytest.raises(BadKError):
        resolve(RunConfig(k=11), 10)
    with pytest.raises(ConfigError):
        resolve(RunConfig(k=3, start="compound", k_check=3), 10)


@pytest.mark.parametrize("start", [s for s in START_METHODS if s != "explicit"])
@pytest.mark.parametrize("algorithm", ["kminmax", "kminsum"])
def test_every_start_runs(start, algorithm):
    m = random_instance(np.random.default_rng(2), 14)
    cfg = resolve(RunConfig(k=4, start=start, algorithm=algorithm, k_check=2), m.n)
    out = execute(cfg, m)
    out.clustering.validate()
    assert out.quality is not None


def test_refined_primary_and_restart_variant():
    m = random_instance(np.random.default_rng(4), 16)
    for refine in ("approach1", "approach2"):
        out = execute(resolve(RunConfig(k=3, refine=refine), m.n), m)
        out.clustering.validate()
    out = execute(resolve(RunConfig(k=3, variant="restart", restarts=3), m.n), m)
    assert len(out.restart_objectives) == 3
    assert out.report.objective_trace[-1] <= min(out.restart_objectives)


def test_m4_defaults():
    m = build_matrix(M4_ROWS)
    out = execute(resolve(RunConfig(k=2), 4), m)
    assert [cl.members for cl in out.clustering.clusters] == [(0, 1), (2, 3)]
    assert out.quality.value == 2.0


def test_gap_threshold():
    assert default_gap_threshold([7, 3, 3, 1]) == 3.0
    assert default_gap_threshold([2, 2]) == 0.0


def test_oracle_summary_line():
    s = OracleSummary(5, 4, ["x"])
    assert s.line("primary") == "primary: 4/5 pass" and not s.ok and s.failed == 1
