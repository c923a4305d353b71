import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from holderlie.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
PASSING = [
    ("extract", "conjugation"), ("extract", "det"), ("extract", "heisenberg"),
    ("extract", "linear"), ("extract", "power_multiplicative"), ("extract", "identity_matrix_log"),
    ("holder", "holder_fixture"), ("holder", "holder_det"), ("bootstrap", "bootstrap"),
    ("padic", "padic_power7"), ("padic", "padic_linear"),
]


def invoke(*args):
    return CliRunner().invoke(main, list(args))


@pytest.mark.parametrize("cmd,name", PASSING)
def test_shipped_configs_pass(cmd, name):
    res = invoke(cmd, "--config", str(CONFIGS / f"{name}.json"))
    assert res.exit_code == 0, res.stderr
    doc = json.loads(res.stdout)
    assert doc["summary"]["passed"] and doc["rows"]
    assert set(doc["rows"][0]) == {"table", "probe", "scale", "lhs", "rhs", "verdict"}
    assert "PASS" in res.stderr


def test_holder_fixture_estimate():
    doc = json.loads(invoke("holder", "--config", str(CONFIGS / "holder_fixture.json")).stdout)
    (row,) = [r for r in doc["rows"] if r["table"] == "holder"]
    assert 0.65 <= row["lhs"] <= 0.75


def test_padic_power7_lambda():
    doc = json.loads(invoke("padic", "--config", str(CONFIGS / "padic_power7.json")).stdout)
    lam = [r for r in doc["rows"] if r["table"] == "lambda"]
    assert lam and all(r["lhs"] == "7" and r["verdict"] for r in lam)


def test_low_alpha_rejected_with_hint():
    res = invoke("extract", "--config", str(CONFIGS / "rejected_low_alpha.json"))
    assert res.exit_code == 2
    assert "bootstrap" in res.stderr


def test_check_failure_exits_1(tmp_path):
    cfg = json.loads((CONFIGS / "holder_fixture.json").read_text())
    cfg["expected"] = {"alpha": 0.95, "alpha_tol": 0.05}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cfg))
    res = invoke("holder", "--config", str(path))
    assert res.exit_code == 1
    assert "FAIL" in res.stderr


@pytest.mark.parametrize("text", ["{not json", '{"homomorphism": {"map": "det"}, "colour": 1}',
                                  '{"homomorphism": {"map": "nope"}}', '{"tol": -1}'])
def test_bad_configs_exit_2(tmp_path, text):
    path = tmp_path / "c.json"
    path.write_text(text)
    res = invoke("extract", "--config", str(path))
    assert res.exit_code == 2
    assert res.stderr.startswith("error:")


def test_missing_config_file(tmp_path):
    assert invoke("extract", "--config", str(tmp_path / "none.json")).exit_code == 2


def test_usage_errors():
    assert invoke("extract").exit_code == 2
    assert invoke("holder", "--config", str(CONFIGS / "det.json"), "--format", "xml").exit_code == 2
    assert invoke("frobnicate").exit_code == 2


def test_deterministic_json(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        res = invoke("extract", "--config", str(CONFIGS / "det.json"), "--seed", "7",
                     "--out", str(out))
        assert res.exit_code == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["seed"] == 7


def test_seed_changes_probes():
    a = invoke("extract", "--config", str(CONFIGS / "det.json"), "--seed", "1").stdout
    b = invoke("extract", "--config", str(CONFIGS / "det.json"), "--seed", "2").stdout
    assert a != b


def test_csv_output():
    res = invoke("padic", "--config", str(CONFIGS / "padic_power7.json"), "--format", "csv")
    assert res.exit_code == 0
    lines = res.stdout.splitlines()
    assert lines[0] == "table,probe,scale,lhs,rhs,verdict"
    assert len(lines) > 1


def test_verify_corpus(tmp_path):
    out = tmp_path / "v.json"
    res = invoke("verify", "--seed", "3", "--out", str(out))
    assert res.exit_code == 0, res.stderr
    doc = json.loads(out.read_text())
    assert doc["summary"]["passed"]
    assert {"telescoping", "lambda_reference", "padic_identity", "bootstrap_ledger"} <= set(doc["summary"]["tables"])
