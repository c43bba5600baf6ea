import csv
import io
import json

import numpy as np
import pytest

from pseudocentroid import ParseError
from pseudocentroid.cli import main
from pseudocentroid.io import dump_json, read_matrix

from conftest import M4_ROWS


@pytest.fixture
def m4_csv(tmp_path):
    p = tmp_path / "m4.csv"
    p.write_text("\n".join(",".join(map(str, r)) for r in M4_ROWS) + "\n")
    return p


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_read_layouts(tmp_path):
    lower = tmp_path / "lower.txt"
    lower.write_text("0\n1 0\n3 2 0\n7 6 4 0\n")
    assert np.array_equal(read_matrix(lower).d, M4_ROWS)
    pts = tmp_path / "pts.csv"
    pts.write_text("x\n0\n1\n3\n7\n")
    assert np.array_equal(read_matrix(pts).d, M4_ROWS)
    dense = tmp_path / "dense.csv"
    dense.write_text("a,b\n0,2\n2,0\n")
    assert read_matrix(dense).d.tolist() == [[0, 2], [2, 0]]


def test_parse_errors_name_the_line(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("0,1,2\n1,0,x\n2,1,0\n")
    with pytest.raises(ParseError, match="line 2"):
        read_matrix(bad)
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("0,1,2\n1,0\n2,1,0\n")
    with pytest.raises(ParseError, match="line 2"):
        read_matrix(ragged, "dense")


def test_run_m4_report(m4_csv, tmp_path):
    out = tmp_path / "r.json"
    assert main(["run", str(m4_csv), "-k", "2", "-o", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["schema"] == 1
    assert [(c["members"], c["span"]) for c in rep["clusters"]] == [([0, 1], 1), ([2, 3], 4)]
    assert rep["quality"]["value"] == 2.0
    assert json.loads(dump_json(rep)) == rep


def test_run_single_cluster_note(m4_csv, capsys):
    assert main(["run", str(m4_csv), "-k", "1"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["quality"]["value"] is None and "single cluster" in rep["quality"]["note"]


def test_run_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("0,1\n1,oops\n")
    assert main(["run", str(bad)]) == 3
    assert "line 2" in capsys.readouterr().err


def test_config_errors_exit_two(m4_csv, tmp_path):
    assert main(["run", str(m4_csv), "-k", "9"]) == 2
    assert main(["run", str(m4_csv), "--start", "compound", "-k", "3"]) == 2
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"input": str(m4_csv), "bogus": 1}))
    assert main(["run", "--config", str(cfg)]) == 2


def test_config_replay_with_override(m4_csv, tmp_path):
    first = tmp_path / "a.json"
    main(["run", str(m4_csv), "-k", "2", "--start", "simple", "-o", str(first)])
    second = tmp_path / "b.json"
    assert main(["run", "--config", str(first), "-k", "3", "-o", str(second)]) == 0
    rep = json.loads(second.read_text())
    assert rep["config"]["k"] == 3 and rep["config"]["start"] == "simple"


def test_compare_m4(m4_csv, capsys):
    assert main(["compare", str(m4_csv), "--starts", "primary", "simple", "-k", "2", "--no-timing"]) == 0
    rows = _rows(capsys.readouterr().out)
    by = {r["start"]: r for r in rows}
    assert int(by["primary"]["iterations"]) <= int(by["simple"]["iterations"])
    assert "seconds" not in rows[0]


def test_compare_trials_are_identical(m4_csv, capsys):
    main(["compare", str(m4_csv), "--starts", "primary", "elimination", "--rule", "random", "--trials", "3", "--no-timing"])
    rows = _rows(capsys.readouterr().out)
    for s in ("primary", "elimination"):
        got = [tuple(v for k, v in r.items() if k != "trial") for r in rows if r["start"] == s]
        assert len(set(got)) == 1


def test_compare_needs_two_starts(m4_csv):
    assert main(["compare", str(m4_csv), "--starts", "primary"]) == 2


def test_sweep_m4(m4_csv, capsys):
    assert main(["sweep", str(m4_csv), "--k-range", "1:4"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert [int(r["k"]) for r in rows] == [1, 2, 3, 4]
    assert float(rows[-1]["objective"]) == 0
    assert rows[0]["value"] == ""


def test_sweep_empty_range(m4_csv):
    assert main(["sweep", str(m4_csv), "--k-range", "3:2"]) == 2


def test_oracle_passes(capsys):
    assert main(["oracle", "--trials", "20"]) == 0
    out = capsys.readouterr().out
    assert "primary: 20/20 pass" in out and "adaptive: 20/20 pass" in out


def test_oracle_zero_trials_warns(capsys, caplog):
    assert main(["oracle", "--trials", "0", "--suite", "primary"]) == 0
    assert "primary: 0/0 pass" in capsys.readouterr().out
    assert "vacuously" in caplog.text


def test_oracle_blowup_guard():
    assert main(["oracle", "--n-max", "40", "--suite", "primary"]) == 2


def test_csv_uses_dot_decimals(m4_csv, tmp_path):
    out = tmp_path / "s.csv"
    main(["sweep", str(m4_csv), "--k-range", "2:3", "--metric", "euclidean", "-o", str(out)])
    for r in _rows(out.read_text()):
        float(r["value"])
