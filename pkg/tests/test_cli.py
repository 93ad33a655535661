import io
import json

import pytest

from fxp import fixture_path, read_model, save_model
from fxp.cli import render, run
from fxp.lab import KAPPA_I4_SPEC

DT = str(fixture_path("dt_fig1.json"))
DL = str(fixture_path("dl_fig2.json"))
K4 = str(fixture_path("tt_k4.json"))
K5 = str(fixture_path("tt_k5.json"))


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_audit_paths_table():
    code, out, _ = cli("audit-paths", "--model", DT)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split() == ["Path", "Features", "AXp", "%Red"]
    body = [line.split() for line in lines[2:]]
    assert len(body) == 8
    assert body[0] == ["<1,2,4,6>", "{1,2,3}", "{1,2,3}", "0%"]
    assert body[2] == ["<1,2,4,7,10,15>", "{1,2,3,4,5}", "{3,5}", "60%"]
    assert [r[-1] for r in body] == ["0%", "40%", "60%", "50%", "25%", "50%", "33%", "0%"]


def test_shapley_values():
    code, out, _ = cli("shapley", "--model", K4, "--instance", "0,0,1,1")
    assert code == 0
    decimals = [line.split()[-1] for line in out.splitlines()[3:]]
    assert decimals == ["-0.125", "-0.333", "0.083", "0.000"]
    assert "-1/3" in out


def test_check_correct_and_incorrect():
    code, out, _ = cli("check", "--model", K5, "--instance", "1,1,1,1", "--set", "1,2,3")
    assert code == 0 and "Correct" in out
    code, out, _ = cli("check", "--model", K5, "--instance", "1,1,1,1", "--set", "1,2")
    assert code == 1 and "Incorrect" in out and "(1,1,0,1)" in out
    code, out, _ = cli("check", "--model", K5, "--instance", "1,1,1,1", "--set", "1,2,3,4")
    assert code == 0 and "Redundant" in out and "{1,2,3}" in out


def test_explain_variants():
    assert "AXp: {3,4,6}" in cli("explain", "--model", DL, "--instance", "0,1,0,1,0,1")[1]
    assert "CXp: {2}" in cli("explain", "--model", K4, "--instance", "0,0,1,1", "--cxp")[1]
    out = cli("explain", "--model", K4, "--instance", "0,0,1,1", "--all")[1]
    assert "AXps: {1,2} {2,4}" in out and "CXps: {2} {1,4}" in out
    out = cli("explain", "--model", DT, "--instance", "0,0,1,0,1", "--seed", "1,2,3,4,5")[1]
    assert "AXp: {3,5}" in out


def test_status_and_issues():
    assert cli("status", "--model", K4, "--instance", "0,0,1,1", "--feature", "3")[1].strip().endswith(
        "feature 3: Irrelevant")
    code, out, _ = cli("issues", "--model", K5, "--instance", "1,1,1,1", "--json")
    doc = json.loads(out)
    assert code == 0
    assert doc["issues"]["I5"] == {"flag": True, "witnesses": [[4]]}


def test_duality_command():
    code, out, _ = cli("duality", "--model", DL, "--instance", "1,1,1,1,1,1")
    assert code == 0 and "MHS duality: holds" in out


def test_census_command():
    code, out, _ = cli("census", "--features", "3", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["total"] == 2032
    assert doc["counts"] == {"I1": 1056, "I2": 0, "I3": 144, "I4": 0, "I5": 0}
    code, out, _ = cli("census", "--features", "2", "--issues", "I1,I3")
    assert code == 0 and "I1" in out and "I5" not in out


def test_find_fixture_command(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps(KAPPA_I4_SPEC.to_dict()))
    code, out, _ = cli("find-fixture", "--spec", str(spec), "--json")
    doc = json.loads(out)
    assert code == 0 and doc["count"] == 1 and doc["matches"][0]["code"] == 303
    spec.write_text(json.dumps({"features": 2, "instance": [0, 0], "class": 0, "axps": [[]]}))
    code, out, _ = cli("find-fixture", "--spec", str(spec))
    assert code == 1 and out.startswith("0 matching")
    spec.write_text("[1, 2]")
    assert cli("find-fixture", "--spec", str(spec))[0] == 2


def test_reconstruct_dt_command(tmp_path, dt_fig1):
    target = tmp_path / "dt.json"
    code, out, _ = cli("reconstruct-dt", "--output", str(target))
    assert code == 0 and "root 1" in out
    assert save_model(read_model(target)) == save_model(dt_fig1)
    code, _, err = cli("reconstruct-dt", "--strict")
    assert code == 2 and "no decision tree satisfies" in err


def test_batch_check(tmp_path):
    batch = tmp_path / "batch.json"
    batch.write_text(json.dumps([{"instance": [1, 1, 1, 1], "set": [1, 2, 3]},
                                 {"instance": [1, 1, 1, 1], "set": [1, 2, 3, 4]}]))
    code, out, _ = cli("check", "--model", K5, "--batch", str(batch), "--json")
    assert code == 0
    assert [r["verdict"] for r in json.loads(out)["results"]] == ["Correct", "Redundant"]
    batch.write_text(json.dumps([{"instance": [1, 1, 1, 1], "set": [4]}]))
    assert cli("check", "--model", K5, "--batch", str(batch))[0] == 1
    batch.write_text(json.dumps({"instance": [1, 1, 1, 1]}))
    assert cli("check", "--model", K5, "--batch", str(batch))[0] == 2


@pytest.mark.parametrize("argv, needle", [
    (("shapley", "--model", K4), "--instance is required"),
    (("shapley", "--model", K4, "--instance", "0,0,x,1"), "comma-separated integers"),
    (("shapley", "--model", K4, "--instance", "0,0,1"), "4 features"),
    (("shapley", "--model", "/nonexistent.json", "--instance", "0"), "nonexistent"),
    (("explain", "--model", K4, "--instance", "0,0,1,1", "--seed", "3"), "not a weak AXp"),
    (("status", "--model", K4, "--instance", "0,0,1,1", "--feature", "7"), "7"),
    (("audit-paths", "--model", K4), "decision tree"),
    (("check", "--model", K5, "--instance", "1,1,1,1"), "--set or --batch"),
    (("census", "--features", "2", "--issues", "I8"), "unknown issues"),
])
def test_validation_errors_exit_2(argv, needle):
    code, out, err = cli(*argv)
    assert code == 2 and out == ""
    assert needle in err


def test_usage_errors_exit_2():
    assert cli()[0] == 2
    assert cli("explain", "--model", K4, "--bogus")[0] == 2
    assert cli("frobnicate")[0] == 2


ROUND_TRIP = [
    ("explain", "--model", DL, "--instance", "0,1,0,1,0,1"),
    ("explain", "--model", K4, "--instance", "0,0,1,1", "--all"),
    ("shapley", "--model", K4, "--instance", "0,0,1,1"),
    ("status", "--model", K5, "--instance", "1,1,1,1", "--feature", "4"),
    ("issues", "--model", K4, "--instance", "0,0,1,1"),
    ("audit-paths", "--model", DT),
    ("check", "--model", K5, "--instance", "1,1,1,1", "--set", "1,2"),
    ("duality", "--model", K4, "--instance", "0,0,1,1"),
    ("census", "--features", "2"),
    ("reconstruct-dt",),
]


@pytest.mark.parametrize("argv", ROUND_TRIP, ids=lambda a: a[0])
def test_json_is_stable_and_matches_human(argv):
    c1, j1, _ = cli(*argv, "--json")
    c2, j2, _ = cli(*argv, "--json")
    c3, human, _ = cli(*argv)
    assert j1 == j2
    assert c1 == c2 == c3
    assert render(json.loads(j1)) + "\n" == human
