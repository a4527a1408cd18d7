import csv
import io
import json

import pytest

from collatzpoly.cli import run
from collatzpoly.core import TrajectoryRecord, trajectory


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_step():
    code, out, _ = call("step", "--n", "27")
    assert code == 0 and json.loads(out) == {"value": "41", "q": 1}


def test_step_poly_and_family_inputs():
    assert json.loads(call("step", "--poly", "x^4+x^3+x+1")[1]) == {"value": "41", "q": 1}
    assert json.loads(call("step", "--family", "G", "--p", "2")[1]) == {"value": "13", "q": 2}
    assert json.loads(call("step", "--family", "F", "--p", "5", "--exps", "2,3")[1]) == {"value": "17", "q": 3}


def test_table1_csv():
    code, out, _ = call("table", "--which", "1", "--max", "10", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 11
    assert [int(r["degree"]) for r in rows] == [0, 1, 3, 4, 6, 7, 9, 11, 12, 14, 15]
    assert rows[3]["poly"] == "x^4+x^3+x+1"


def test_table_defaults_match_printed_ranges():
    assert len(json.loads(call("table", "--which", "1", "--format", "json")[1])) == 11
    assert len(json.loads(call("table", "--which", "2", "--format", "json")[1])) == 16
    assert len(json.loads(call("table", "--which", "3", "--format", "json")[1])) == 17


def test_traj_json():
    code, out, _ = call("traj", "--poly", "x^2+x+1", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["k"] == 5
    assert TrajectoryRecord.from_dict(d) == trajectory(7)


def test_traj_n_and_poly_agree():
    assert call("traj", "--n", "27")[1] == call("traj", "--poly", "x^4+x^3+x+1")[1]


def test_text_and_json_carry_the_same_data():
    _, js, _ = call("step", "--n", "27", "--format", "json")
    _, txt, _ = call("step", "--n", "27", "--format", "text")
    parsed = dict(line.split(": ", 1) for line in txt.strip().splitlines())
    assert {k: str(v) for k, v in json.loads(js).items()} == parsed


def test_traj_csv_has_one_row_per_step():
    rows = list(csv.DictReader(io.StringIO(call("traj", "--n", "7", "--format", "csv")[1])))
    assert [r["value"] for r in rows] == ["11", "17", "13", "5", "1"]


@pytest.mark.parametrize(
    "argv, code",
    [
        (("check", "corollary1", "--n", "7", "--j", "1"), 0),
        (("check", "g-relations", "--p", "6"), 0),
        (("check", "h-chain", "--k", "5"), 0),
        (("check", "mersenne-prefix", "--p", "4"), 0),
        (("check", "fixed-point", "--n", "3"), 0),
        (("check", "fixed-point", "--n", "1"), 3),
    ],
)
def test_check_exit_codes(argv, code):
    assert call(*argv)[0] == code


def test_check_g_relations_reports_r():
    assert json.loads(call("check", "g-relations", "--p", "14")[1])["r"] == 5


def test_domain_errors_exit_1():
    code, out, err = call("step", "--n", "4")
    assert code == 1 and out == "" and "odd" in err
    assert call("census", "--lo", "9", "--hi", "3")[0] == 1
    assert call("verify", "--lo", "9", "--hi", "3")[0] == 1
    assert call("step", "--poly", "x^1+1")[0] == 1


def test_usage_errors_exit_2():
    assert call("step", "--n", "3", "--poly", "x+1")[0] == 2
    assert call("step")[0] == 2
    assert call("frobnicate")[0] == 2
    assert call("check", "g-relations")[0] == 2
    assert call("step", "--n", "3", "--format", "dot")[0] == 2


def test_census_json():
    d = json.loads(call("census", "--lo", "3", "--hi", "11")[1])
    assert d["mean_q"] == 2.0 and d["classes"]["C3"]["q_total"] == 4


def test_drift_json():
    d = json.loads(call("drift", "--n", "27")[1])
    assert d["k"] == 41 and len(d["degrees"]) == 42


def test_family_command():
    d = json.loads(call("family", "--family", "H", "--p", "10")[1])
    assert d == {"kind": "H", "param": 10, "value": "1819", "poly": "x^10+x^9+x^8+x^4+x^3+x+1", "degree": 10}


def test_tree_dot_and_out_file(tmp_path):
    out = tmp_path / "g.dot"
    code, stdout, _ = call("tree", "--max-degree", "0", "--out", str(out))
    assert code == 0 and stdout == ""
    assert '"1" -> "1" [label="q=2"];' in out.read_text()


def test_tree_json():
    d = json.loads(call("tree", "--max-degree", "2", "--format", "json")[1])
    assert len(d["nodes"]) == 7 and len(d["edges"]) == 7


def test_verify_and_resume(tmp_path):
    ck = tmp_path / "ck.jsonl"
    code, out, _ = call("verify", "--lo", "3", "--hi", "4096", "--checkpoint", str(ck), "--upto", "2048")
    assert code == 0 and json.loads(out)["complete"] is False
    code, out, _ = call("verify", "--resume", str(ck))
    full = call("verify", "--lo", "3", "--hi", "4096")[1]
    assert code == 0 and out == full and json.loads(out)["verified"] is True


def test_verify_accepts_polynomial_bounds():
    assert call("verify", "--lo", "3", "--hi", "x^12")[1] == call("verify", "--lo", "3", "--hi", "4096")[1]


def test_worker_env_default(monkeypatch):
    monkeypatch.setenv("COLLATZPOLY_WORKERS", "2")
    code, out, _ = call("census", "--lo", "3", "--hi", "4097")
    assert code == 0 and json.loads(out)["total"] == 2047
