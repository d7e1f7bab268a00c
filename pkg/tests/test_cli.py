import csv
import json

import pytest

from siegelkit.cli import main


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_act(capsys):
    rc, out, _ = run(capsys, "act", "--matrix", '{"g":1,"entries":["0","-1","1","0"]}',
                     "--point", '{"g":1,"X":[["0"]],"Y":[["2"]]}')
    assert rc == 0
    d = json.loads(out)
    assert float(d["Y"][0][0]) == pytest.approx(0.5)


def test_reduce(capsys):
    rc, out, _ = run(capsys, "reduce", "--point", '{"g":1,"X":[["0.6"]],"Y":[["0.2"]]}')
    d = json.loads(out)
    assert rc == 0 and d["domain"]["in_domain"]
    assert float(d["reduced_point"]["Y"][0][0]) == pytest.approx(1)
    assert d["gamma"]["entries"] == ["2", "-1", "-1", "1"]


def test_reduce_from_file(capsys, tmp_path):
    p = tmp_path / "z.json"
    p.write_text('{"g":2,"X":[["0.1","0"],["0","0.2"]],"Y":[["1","0.2"],["0.2","1.5"]]}')
    rc, out, _ = run(capsys, "reduce", "--point", str(p))
    assert rc == 0 and json.loads(out)["steps"] == 0


def test_malformed_input_exit_code(capsys):
    rc, _, err = run(capsys, "reduce", "--point", '{"g":1,"X":[["0"]],"Y":[["-1"]]}')
    assert rc == 2 and "error" in err
    rc, _, _ = run(capsys, "act", "--matrix", '{"g":1,"entries":["1","1","1","1"]}',
                   "--point", '{"g":1,"X":[["0"]],"Y":[["1"]]}')
    assert rc == 2
    rc, _, _ = run(capsys, "count", "--g", "1")
    assert rc == 2


def test_volume(capsys):
    chart = '{"g":1,"entries":[[[["0","0"],["1","0"]]]],"domain":{"re":[-0.5,0.5],"im":[0.5,"inf"]}}'
    rc, out, _ = run(capsys, "volume", "--chart", chart, "--target", "1e-3")
    d = json.loads(out)
    assert rc == 0 and abs(d["value"] - 1.0471975511965976) < 5e-3


def test_volume_boundary_csv(capsys, tmp_path):
    chart = '{"g":1,"entries":[[[["0","0"],["1","0"]]]],"domain":{"re":[-64,64],"im":[0.015625,64]}}'
    rc, out, _ = run(capsys, "--out", str(tmp_path), "volume", "--chart", chart,
                     "--boundary", "4,8,16", "--target", "2e-2")
    assert rc == 0 and 1.8 <= json.loads(out)["fit"]["slope"] <= 2.2
    assert len(list(csv.reader(open(tmp_path / "boundary_volume.csv")))) == 4


def test_count(capsys, tmp_path):
    rc, out, _ = run(capsys, "count", "--g", "1", "--series", "1,2,3", "--out", str(tmp_path))
    d = json.loads(out)
    assert rc == 0 and [r["count"] for r in d["rows"]][:2] == [20, 52]
    assert (tmp_path / "count.csv").exists()
    rc, _, _ = run(capsys, "count", "--g", "1", "--T", "2", "--predicate", "nope")
    assert rc == 2
    rc, _, err = run(capsys, "count", "--g", "2", "--T", "40")
    assert rc == 2 and "budget" in err


def test_cm_survey(capsys, tmp_path):
    rc, out, _ = run(capsys, "cm-survey", "--bound", "100", "--out", str(tmp_path))
    d = json.loads(out)
    assert rc == 0 and d["total_points"] == d["class_number_sum"]
    rows = list(csv.DictReader(open(tmp_path / "cm_survey.csv")))
    assert rows[0]["D"] == "-3" and rows[0]["class_number"] == "1"


def test_suite_and_export(capsys, tmp_path):
    rc, out, _ = run(capsys, "suite", "--seed", "4", "--only", "01-group-law,10-cm-orbit-growth",
                     "--trials", "10", "--cm_bound", "300", "--out", str(tmp_path))
    assert rc == 0
    board = json.loads(out)
    assert [r["status"] for r in board["rows"]] == ["pass", "pass"] and board["seed"] == 4
    assert (tmp_path / "scoreboard.csv").exists()
    rc, out, _ = run(capsys, "export", "--board", str(tmp_path / "scoreboard.json"),
                     "--format", "markdown", "--out", str(tmp_path))
    assert rc == 0 and "H(Z)" in (tmp_path / "scoreboard.md").read_text()


def test_suite_failure_exit_code(capsys, tmp_path):
    rc, _, _ = run(capsys, "suite", "--only", "01-group-law", "--trials", "10",
                   "--action_tol", "0", "--out", str(tmp_path))
    assert rc == 1


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 11, "trials": 5}))
    rc, out, _ = run(capsys, "--config", str(cfg), "suite", "--seed", "12", "--only", "01-group-law",
                     "--out", str(tmp_path))
    assert rc == 0 and json.loads(out)["seed"] == 12
    cfg.write_text(json.dumps({"bogus": 1}))
    rc, _, _ = run(capsys, "suite", "--config", str(cfg), "--out", str(tmp_path))
    assert rc == 2
