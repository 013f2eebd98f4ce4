import csv
import io
import json
import math
import subprocess
import sys

import jsonschema
import pytest

from abcgreen.cli import (
    CSV_COLUMNS,
    ERROR_SCHEMA,
    EXIT_NOT_CONVERGED,
    EXIT_POLE,
    EXIT_VALIDATION,
    REPORT_SCHEMA,
    main,
)

EVAL_ARGS = ["eval", "--alpha", "0.0073", "--beta0", "0.3", "--energy", "0.9", "--rb", "2", "--ra", "1",
             "--theta-b", "1.0", "--theta-a", "2.0", "--phi-b", "0", "--phi-a", "1.5"]


def run(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_spectrum_json(capsys):
    code, out, _ = run(capsys, ["spectrum", "--alpha", "0.3", "--q", "0", "--k", "0", "--nr-max", "2"])
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, REPORT_SCHEMA)
    assert report["config"]["nr_max"] == 2
    assert math.isclose(report["result"]["energies"][0], math.sqrt(0.9), abs_tol=1e-15)


def test_spectrum_scan_csv(capsys):
    code, out, _ = run(capsys, ["spectrum", "--alpha", "0.3", "--nr-max", "1", "--scan", "--grid", "500",
                                "--format", "csv"])
    assert code == 0
    body = [line for line in out.splitlines() if not line.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    assert list(rows[0]) == CSV_COLUMNS["spectrum"]
    closed = {r["n_r"]: float(r["energy"]) for r in rows if r["source"] == "closed"}
    scanned = {r["n_r"]: float(r["energy"]) for r in rows if r["source"] == "scan"}
    assert closed.keys() == scanned.keys() == {"0", "1"}
    for n in closed:
        assert abs(closed[n] - scanned[n]) <= 1e-12


def test_eval_report(capsys):
    code, out, _ = run(capsys, EVAL_ARGS + ["--qmax", "20", "--kmax", "25"])
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, REPORT_SCHEMA)
    value = complex(report["result"]["value"]["real"], report["result"]["value"]["imag"])
    assert abs(value) > 0
    assert report["result"]["err_estimate"] < 1e-5 * abs(value)
    assert report["config"]["truncation"] == {"q_max": 20, "k_max": 25, "tail_tol": 1e-10,
                                              "adaptive": False, "k_center": 0}


def test_eval_adaptive_not_converged_exits_3(capsys):
    code, _, err = run(capsys, EVAL_ARGS + ["--qmax", "1", "--kmax", "1", "--adaptive", "--tail-tol", "1e-300"])
    assert code == EXIT_NOT_CONVERGED
    jsonschema.validate(json.loads(err), ERROR_SCHEMA)


def test_radial_routes_agree(capsys):
    code, out, _ = run(capsys, ["radial", "--alpha", "0.3", "--energy", "0.5", "--rb", "2", "--ra", "1"])
    assert code == 0
    result = json.loads(out)["result"]
    closed = result["closed"]["value"]
    assert abs(result["integral"]["value"] / closed - 1) < 1e-9
    assert abs(result["series"]["value"] / closed - 1) < 1e-6


def test_series_csv_columns(capsys):
    code, out, _ = run(capsys, ["series", "--alpha", "0.3", "--energy", "0.5", "--rb", "2", "--ra", "1",
                                "--nmax", "4", "--format", "csv"])
    assert code == 0
    lines = out.splitlines()
    assert "# nmax=4" in lines
    body = [line for line in lines if not line.startswith("#")]
    assert body[0] == ",".join(CSV_COLUMNS["series"])
    assert len(body) == 6


def test_verify_suite_passes(capsys):
    code, out, _ = run(capsys, ["verify", "--suite", "spectrum"])
    assert code == 0
    report = json.loads(out)
    assert report["result"]["all_passed"] is True
    assert report["status"] == "ok"


def test_verify_failure_exits_1(capsys):
    code, out, _ = run(capsys, ["verify", "--suite", "spectrum", "--tol", "1e-30"])
    assert code == 1
    assert json.loads(out)["status"] == "failed"


@pytest.mark.parametrize("argv", [
    ["eval", "--alpha", "0.6", "--energy", "0.5", "--rb", "1", "--ra", "1", "--theta-b", "1", "--theta-a", "1"],
    ["eval", "--alpha", "0.1", "--energy", "1.5", "--rb", "1", "--ra", "1", "--theta-b", "1", "--theta-a", "1"],
    ["eval", "--alpha", "0.1", "--energy", "0.5", "--rb", "1", "--ra", "1", "--theta-b", "0", "--theta-a", "1"],
    ["spectrum", "--alpha", "not-a-number"],
    ["spectrum"],
    ["frobnicate"],
])
def test_validation_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, argv)
    assert code == EXIT_VALIDATION
    assert out == ""
    record = json.loads(err)
    jsonschema.validate(record, ERROR_SCHEMA)


def test_pole_exits_4(capsys):
    code, _, err = run(capsys, ["radial", "--alpha", "0.3", "--energy", repr(math.sqrt(0.9)),
                                "--rb", "1", "--ra", "2"])
    assert code == EXIT_POLE
    record = json.loads(err)
    assert record["channel"] == [0, 0] and record["n_r"] == 0


def test_out_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, ["spectrum", "--alpha", "0.2", "--out", str(target)])
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["command"] == "spectrum"


def test_reports_are_deterministic(capsys):
    argv = EVAL_ARGS + ["--qmax", "6", "--kmax", "6", "--format", "csv"]
    first = run(capsys, argv)[1]
    second = run(capsys, argv)[1]
    assert first == second


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "abcgreen", "spectrum", "--alpha", "0.3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["lam"] == pytest.approx(0.8)
