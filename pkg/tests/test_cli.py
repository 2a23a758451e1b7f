import io
import json
import math
import subprocess
import sys

import pytest

from weightcalc.cli import EXIT_INCONCLUSIVE, EXIT_INVALID_WEIGHT, EXIT_OK, EXIT_USAGE, EXIT_VIOLATED, format_table, main
from weightcalc.criteria import Status, Verdict


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_check_j_self_exponential(tmp_path):
    code, out, err = run("check-j", "--weight", "exp(r)", "--target", "exp(r)", "--domain", "plane", "--json", str(tmp_path / "j.json"))
    assert code == EXIT_OK, err
    doc = json.loads((tmp_path / "j.json").read_text())
    bounded, compact = (Verdict.from_json_dict(v) for v in doc["verdicts"])
    assert bounded.status is Status.SATISFIED and bounded.constant == pytest.approx(1.0, abs=1e-3)
    assert compact.status is Status.VIOLATED
    assert "J_BOUNDED" in out and "J_COMPACT" in out


def test_doubling_not_doubling():
    code, out, _ = run("doubling", "--weight", "exp(1/(1-r))")
    assert code == EXIT_VIOLATED
    assert "DOUBLING" in out


def test_check_d_gaussian_plane(tmp_path):
    code, _, _ = run("check-d", "--weight", "exp(r^2)", "--domain", "plane", "--p", "2", "--json", str(tmp_path / "d.json"))
    assert code == EXIT_VIOLATED
    v = json.loads((tmp_path / "d.json").read_text())["verdicts"][0]
    assert v["criterion"] == "D_SELF_PLANE"
    assert v["details"]["status_i"] == "VIOLATED" and v["details"]["constant_i"] > 100


def test_check_d_defaults_by_domain():
    assert run("check-d", "--weight", "exp(r)", "--p", "2")[0] == EXIT_OK
    code, out, _ = run("check-d", "--weight", "1/(1-r)^2", "--domain", "disk", "--p", "1")
    assert code == EXIT_OK and "D_DISK_TARGET" in out
    code, _, _ = run("check-d", "--weight", "exp(r^2)", "--domain", "plane", "--p", "0.5")
    assert code == EXIT_INCONCLUSIVE


def test_check_d_with_target():
    code, out, _ = run("check-d", "--weight", "1/(1-r)", "--target", "1/(1-r)^2", "--domain", "disk", "--p", "2")
    assert code == EXIT_OK and "D_SUFF_DISK" in out and "D_NECESSARY" in out
    code, _, _ = run("check-d", "--weight", "1/(1-r)", "--target", "1/(1-r)", "--domain", "disk", "--p", "2")
    assert code == EXIT_VIOLATED
    code, _, _ = run("check-d", "--weight", "1/(1-r)", "--target", "1/(1-r)", "--domain", "disk", "--p", "0.5")
    assert code == EXIT_INCONCLUSIVE


def test_analyze_csv_header(tmp_path):
    path = tmp_path / "a.csv"
    code, out, _ = run("analyze", "--weight", "exp(r)", "--csv", str(path))
    assert code == EXIT_OK
    lines = path.read_text().splitlines()
    assert lines[0] == "r,w,w_hat,ratio"
    assert len(lines) == 514
    assert lines[1] == "0,1,1,1"
    assert "sandwich" in out


def test_envelope_and_mp_and_oracle(tmp_path):
    code, _, _ = run("envelope", "--weight", "1/(1-r)", "--domain", "disk", "--csv", str(tmp_path / "e.csv"))
    assert code == EXIT_OK
    assert (tmp_path / "e.csv").read_text().startswith("n,a_n,t_n\n0,0,")
    code, out, _ = run("mp", "--weight", "exp(r)", "--p", "2", "--extent", "10", "--json", str(tmp_path / "m.json"))
    assert code == EXIT_OK and json.loads((tmp_path / "m.json").read_text())["sup_ratio"] > 1
    code, out, _ = run("oracle", "--weight", "exp(r)", "--p", "inf", "--extent", "30", "--json", str(tmp_path / "o.json"))
    assert code == EXIT_OK
    reports = json.loads((tmp_path / "o.json").read_text())["reports"]
    assert {r["op"] for r in reports} == {"D", "J"}
    j = next(r for r in reports if r["op"] == "J")
    assert j["lower_bound"] <= 1 + 1e-3


@pytest.mark.parametrize(
    "argv, code, kind",
    [
        (["check-j", "--weight", "exp(r)"], EXIT_USAGE, "usage"),
        (["check-d", "--weight", "exp(r)"], EXIT_USAGE, "usage"),
        (["mp", "--weight", "exp(r)"], EXIT_USAGE, "usage"),
        (["bogus"], EXIT_USAGE, "usage"),
        (["analyze"], EXIT_USAGE, "usage"),
        (["analyze", "--weight", "exp(r)", "--domain", "sphere"], EXIT_USAGE, "usage"),
        (["analyze", "--weight", "exp(r)", "--p", "0"], EXIT_USAGE, "usage"),
        (["analyze", "--weight", "exp(r)", "--grid-points", "4"], EXIT_USAGE, "usage"),
        (["doubling", "--weight", "1/(1-r)", "--domain", "plane"], EXIT_USAGE, "usage"),
        (["analyze", "--weight", "r^^2"], EXIT_INVALID_WEIGHT, "syntax"),
        (["analyze", "--weight", "sin(r)"], EXIT_INVALID_WEIGHT, "syntax"),
        (["analyze", "--weight", "1+r"], EXIT_INVALID_WEIGHT, "validation"),
        (["check-j", "--weight", "exp(r)", "--target", "1/(1+r)"], EXIT_INVALID_WEIGHT, "validation"),
    ],
)
def test_errors_are_one_line(argv, code, kind):
    got, out, err = run(*argv)
    assert got == code
    assert err.count("\n") == 1
    assert err.startswith(f"weightcalc: error: {kind}: ")


def test_failed_run_writes_no_files(tmp_path):
    csv_path, json_path = tmp_path / "x.csv", tmp_path / "x.json"
    code, _, _ = run("analyze", "--weight", "1+r", "--csv", str(csv_path), "--json", str(json_path))
    assert code == EXIT_INVALID_WEIGHT
    assert list(tmp_path.iterdir()) == []


def test_unwritable_output_is_reported(tmp_path):
    (tmp_path / "dir.json").mkdir()
    code, _, err = run("doubling", "--weight", "1/(1-r)", "--csv", str(tmp_path / "ok.csv"), "--json", str(tmp_path / "dir.json"))
    assert code == EXIT_USAGE and "io" in err
    assert not (tmp_path / "ok.csv").exists()


def test_reports_are_byte_identical(tmp_path):
    for k in (1, 2):
        run("check-j", "--weight", "exp(r)", "--target", "exp(2*r)", "--json", str(tmp_path / f"{k}.json"), "--csv", str(tmp_path / f"{k}.csv"))
    assert (tmp_path / "1.csv").read_bytes() == (tmp_path / "2.csv").read_bytes()
    a = json.loads((tmp_path / "1.json").read_text())
    b = json.loads((tmp_path / "2.json").read_text())
    for v in a["verdicts"] + b["verdicts"]:
        v.pop("evidence_csv")
    assert a == b


def test_evidence_csv_paths(tmp_path):
    path = tmp_path / "ev.csv"
    run("check-j", "--weight", "exp(r)", "--target", "exp(r)", "--csv", str(path), "--json", str(tmp_path / "v.json"))
    doc = json.loads((tmp_path / "v.json").read_text())
    paths = [v["evidence_csv"] for v in doc["verdicts"]]
    assert paths[0] == str(path)
    for p in paths:
        assert open(p).readline().strip() == "r,numerator,denominator,ratio"


def test_pretty_table_layout():
    text = format_table([("J_BOUNDED", "SATISFIED", "1", "0.0001")])
    header, rule, row = text.splitlines()
    assert header.split(" | ")[0].strip() == "criterion"
    assert [c.strip() for c in header.split("|")] == ["criterion", "status", "constant", "tail_slope"]
    assert set(rule) <= {"-", "+"}


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "weightcalc.cli", "doubling", "--weight", "1/(1-r)^2"], capture_output=True, text=True)
    assert proc.returncode == EXIT_OK
    assert "SATISFIED" in proc.stdout
