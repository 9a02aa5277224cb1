import csv
import json
import subprocess
import sys

import pytest

from rikit import cli, verify


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def _run(capsys, *argv):
    code = cli.run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_rearrange_three_cells(tmp_path, capsys):
    f = _write(tmp_path, "f.json", {"cells": [{"left": 0, "right": 1, "value": 1},
                                              {"left": 1, "right": 2, "value": 3},
                                              {"left": 2, "right": 3, "value": 2}]})
    code, out, _ = _run(capsys, "rearrange", f)
    assert code == 0
    assert [c["value"] for c in json.loads(out)["cells"]] == [3, 2, 1]


def test_check_averaging_prints_constant(tmp_path, capsys):
    spec = _write(tmp_path, "w.json", {"w": {"kind": "powerlog", "a": -0.5}})
    code, out, _ = _run(capsys, "check", "averaging", spec)
    assert code == 0
    assert json.loads(out)["constant_estimate"] == pytest.approx(2.0)


def test_check_false_verdict_exits_one(tmp_path, capsys):
    spec = _write(tmp_path, "w.json", {"psi": {"kind": "powerlog", "a": 2}})
    code, out, _ = _run(capsys, "check", "quasiconcave", spec)
    assert code == 1 and json.loads(out)["verdict"] is False


def test_check_delta(tmp_path, capsys):
    spec = _write(tmp_path, "d.json", {"nu": {"kind": "power", "alpha": 2}, "endpoint": "infinity", "mode": "inf"})
    code, out, _ = _run(capsys, "check", "delta", spec)
    assert code == 0 and json.loads(out)["estimate"] == pytest.approx(4.0)


def test_malformed_json_exit_two_with_location(tmp_path, capsys):
    bad = _write(tmp_path, "bad.json", '{"w": {"kind": "powerlog",\n "a": }')
    code, _, err = _run(capsys, "check", "averaging", bad)
    assert code == 2
    assert "line 2" in err and "column" in err


def test_schema_violation_names_field(tmp_path, capsys):
    bad = _write(tmp_path, "bad.json", {"kind": "lebesgue", "p": 0.5})
    f = _write(tmp_path, "f.json", [{"left": 0, "right": 1, "value": 1}])
    code, _, err = _run(capsys, "norm", bad, f)
    assert code == 2 and "field" in err


def test_invalid_step_function_exit_two(tmp_path, capsys):
    X = _write(tmp_path, "X.json", {"kind": "lebesgue", "p": 2})
    f = _write(tmp_path, "f.json", [{"left": 0, "right": 1, "value": -1}])
    code, _, err = _run(capsys, "norm", X, f)
    assert code == 2 and "InvalidStepFunction" in err


def test_missing_file_and_bad_usage(tmp_path, capsys):
    assert _run(capsys, "rearrange", tmp_path / "nope.json")[0] == 2
    assert _run(capsys, "frobnicate")[0] == 2
    assert _run(capsys, "verify", "no-such-case", "--out", tmp_path)[0] == 2


def test_norm_and_length_mismatch(tmp_path, capsys):
    X = _write(tmp_path, "X.json", {"kind": "lebesgue", "p": 2, "L": 1})
    f = _write(tmp_path, "f.json", {"L": 4, "cells": [{"left": 0, "right": 4, "value": 1}]})
    assert _run(capsys, "norm", X, f)[0] == 2
    g = _write(tmp_path, "g.json", [{"left": 0, "right": "1/4", "value": 2}])
    code, out, _ = _run(capsys, "norm", X, g)
    assert code == 0 and json.loads(out)["norm"] == pytest.approx(1.0)


def test_apply_writes_trace(tmp_path, capsys):
    op = _write(tmp_path, "op.json", {"kind": "R", "u": {"kind": "powerlog"}, "v": {"kind": "powerlog", "a": -1},
                                      "nu": {"kind": "identity"}})
    f = _write(tmp_path, "f.json", [{"left": 0, "right": 1, "value": 1}])
    code, out, _ = _run(capsys, "apply", op, f, "--grid", 64, "--out", tmp_path / "o")
    assert code == 0
    res = json.loads(out)
    assert res["hypotheses"]["u_nonincreasing"] is False  # no monotonicity flag declared
    rows = list(csv.reader((tmp_path / "o" / "apply_trace.csv").open()))
    assert rows[0] == ["t", "value"]
    for t, val in rows[1:]:
        assert float(val) == pytest.approx(min(1.0, 1.0 / float(t)), rel=1e-12)


def test_verify_case_writes_valid_report(tmp_path, capsys):
    params = _write(tmp_path, "p.json", {"samples": 20})
    code, out, _ = _run(capsys, "verify", "duality-identity", "--params", params, "--out", tmp_path)
    assert code == 0 and "pass" in out
    data = json.loads((tmp_path / "duality-identity.json").read_text())
    assert not list(cli.validator_for("report").iter_errors(data))
    assert data["n_samples"] == 100


def test_verify_unknown_param_exit_two(tmp_path, capsys):
    params = _write(tmp_path, "p.json", {"nonsense": 1})
    assert _run(capsys, "verify", "k-formula", "--params", params, "--out", tmp_path)[0] == 2


def test_exit_code_is_max_severity(tmp_path, capsys, monkeypatch):
    def fake(verdict):
        return lambda params, seed, grid: verify.Report(f"fake-{verdict}", verdict, 1, 0, 1.0, (0, 2), {}, {},
                                                        seed=seed, grid=grid)
    monkeypatch.setattr(verify, "CASES", {"a": fake("pass"), "b": fake("fail"), "c": fake("not-applicable")})
    code, out, _ = _run(capsys, "verify", "all", "--out", tmp_path)
    assert code == 2
    rows = list(csv.DictReader((tmp_path / "summary.csv").open()))
    assert [r["verdict"] for r in rows] == ["pass", "fail", "not-applicable"]
    monkeypatch.setattr(verify, "CASES", {"a": fake("pass"), "b": fake("fail")})
    assert _run(capsys, "verify", "all", "--out", tmp_path)[0] == 1


def test_sweep_outputs(tmp_path, capsys):
    plan = _write(tmp_path, "plan.json", {"case_id": "k-formula", "seeds": [1, 2], "vary": {"samples": [3, 6]}})
    code, _, _ = _run(capsys, "sweep", plan, "--out", tmp_path)
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "sweep" / "sweep.csv").open()))
    assert [r["index"] for r in rows] == ["0", "1", "2", "3"]
    assert [r["samples"] for r in rows] == ["3", "6", "3", "6"]
    svg = (tmp_path / "sweep" / "sweep.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<circle") == 4
    first = (tmp_path / "sweep" / "0000_k-formula.json").read_text()
    _run(capsys, "sweep", plan, "--out", tmp_path)
    assert (tmp_path / "sweep" / "0000_k-formula.json").read_text() == first


def test_sweep_rejects_bad_plan(tmp_path, capsys):
    plan = _write(tmp_path, "plan.json", {"case_id": "k-formula", "extra": 1})
    assert _run(capsys, "sweep", plan, "--out", tmp_path)[0] == 2
    plan = _write(tmp_path, "plan2.json", {"case_id": "k-formula", "vary": {"bogus": [1]}})
    assert _run(capsys, "sweep", plan, "--out", tmp_path)[0] == 2


def test_stdin_input(tmp_path, monkeypatch, capsys):
    import io
    monkeypatch.setattr(sys, "stdin", io.StringIO('[{"left": 0, "right": 2, "value": 1}]'))
    code, out, _ = _run(capsys, "rearrange", "-")
    assert code == 0 and json.loads(out)["cells"][0]["right"] == 2


def test_module_entry_point(tmp_path):
    spec = _write(tmp_path, "w.json", {"w": {"kind": "powerlog", "a": -0.5}})
    proc = subprocess.run([sys.executable, "-m", "rikit", "check", "averaging", spec],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["constant_estimate"] == pytest.approx(2.0)


def test_out_directory_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RIKIT_OUT", str(tmp_path / "env"))
    params = _write(tmp_path, "p.json", {"samples": 2})
    assert _run(capsys, "verify", "k-formula", "--params", params)[0] == 0
    assert (tmp_path / "env" / "k-formula.json").exists()
