import csv
import json
import shutil
import subprocess
import sys

import pytest

from polyapprox.cli import (
    CSV_COLUMNS,
    bundled_scenarios,
    execute,
    load_scenario,
    main,
    parse_scenario,
    run_scenario,
    run_suite,
    summary_exit_code,
)
from polyapprox.errors import ParseError

BOX = {
    "name": "box-kubota",
    "operation": "volumes",
    "seed": 3,
    "body": {"dim": 3, "variant": "box", "sides": [1, 2, 3]},
    "params": {"kubota": True, "samples": 20000, "rel_tol": 0.05},
}


def write(tmp_path, doc, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc, indent=2) if isinstance(doc, dict) else doc)
    return path


@pytest.fixture(scope="module")
def suite_summary(tmp_path_factory):
    out = tmp_path_factory.mktemp("reports")
    return run_suite(bundled_scenarios(), out_dir=out), out


def test_bundled_suite_passes(suite_summary):
    summary, out = suite_summary
    assert summary["total"] == 12
    assert summary["pass"] == 12, [e for e in summary["scenarios"] if e["status"] != "pass"]
    assert summary_exit_code(summary) == 0
    assert (out / "summary.json").exists()


def test_thm2_scenario_report(suite_summary):
    _, out = suite_summary
    report = json.loads((out / "ball-d3-thm2.json").read_text())
    res = report["results"][0]
    assert res["eps_target"] == pytest.approx(0.8868, abs=1e-4)
    assert res["d_H"] < res["eps_target"]
    assert report["status"] == "pass"
    assert set(report) >= {"scenario", "results", "checks", "timing", "version"}
    for row in report["checks"]:
        assert "lower" in row and "upper" in row and "value" in row


def test_intro_certificate_report(suite_summary):
    _, out = suite_summary
    report = json.loads((out / "intro-d4-ellipsoid.json").read_text())
    cert = report["results"][0]
    assert cert["elongated"] and cert["applicable"] and cert["passed"]
    assert {r["quantity"] for r in report["checks"]} >= {"g_N", "rho_N", "f_t_eps"}


def test_csv_contract(suite_summary):
    _, out = suite_summary
    with open(out / "box-d3-kubota.csv") as fh:
        reader = csv.DictReader(fh)
        assert tuple(reader.fieldnames) == CSV_COLUMNS
        rows = list(reader)
    assert rows and all(r["seed"] == "0" for r in rows)


def test_parse_error_reports_line_and_field(tmp_path):
    doc = dict(BOX, params={"kubota": True, "samples": -5})
    path = write(tmp_path, doc)
    with pytest.raises(ParseError) as info:
        load_scenario(path)
    assert info.value.field == "samples"
    assert info.value.line == path.read_text().splitlines().index('    "samples": -5') + 1


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("seed"),
    lambda d: d.update(operation="bogus"),
    lambda d: d.update(operation="approx-eps", params={"eps": 1.5}),
    lambda d: d.update(operation="net", params={"delta": 0.0}),
    lambda d: d.update(body={"dim": 9, "variant": "ball"}),
])
def test_parse_rejects(mutate):
    doc = json.loads(json.dumps(BOX))
    mutate(doc)
    with pytest.raises(ParseError):
        parse_scenario(doc)


def test_malformed_json_exit_2(tmp_path, capsys):
    path = write(tmp_path, '{"name": "x",\n  "seed": ')
    assert main(["run", str(path), "--out", str(tmp_path / "o")]) == 2
    assert "parse error" in capsys.readouterr().err


def test_usage_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["bogus"])
    assert info.value.code == 2
    assert main(["suite", str(tmp_path / "missing")]) == 2
    assert main(["constants", "--dim", "9"]) == 2


def test_empty_suite_exit_0(tmp_path):
    (tmp_path / "empty").mkdir()
    assert main(["suite", str(tmp_path / "empty"), "--out", str(tmp_path / "o")]) == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["total"] == 0


def test_forced_failure_exit_1(tmp_path):
    suite = tmp_path / "suite"
    suite.mkdir()
    shutil.copy(bundled_scenarios() / "box-d3-kubota.json", suite)
    doc = dict(BOX, name="box-tightened", params=dict(BOX["params"], tighten=1e-3))
    write(suite, doc, "tightened.json")
    summary = run_suite(suite)
    assert summary["pass"] == 1 and summary["fail"] == 1
    assert main(["suite", str(suite), "--out", str(tmp_path / "o")]) == 1


def test_operation_error_embedded(tmp_path):
    doc = dict(BOX, operation="approx-n", params={"n": 100})
    report = execute(parse_scenario(doc))
    assert report["status"] == "error"
    assert report["error"]["type"] == "ThresholdNotMet"
    path = write(tmp_path, doc)
    assert main(["run", str(path), "--out", str(tmp_path / "o")]) == 1


def test_deterministic_reports(tmp_path):
    path = write(tmp_path, BOX)
    a = run_scenario(path)
    b = run_scenario(path)
    assert a["results"] == b["results"] and a["checks"] == b["checks"]
    c = run_scenario(path, seed=4)
    assert c["results"] != a["results"]


def test_samples_scale(tmp_path):
    path = write(tmp_path, BOX)
    assert main(["run", str(path), "--samples-scale", "0.5", "--out", str(tmp_path / "o")]) == 0
    assert main(["run", str(path), "--samples-scale", "0", "--out", str(tmp_path / "o")]) == 2


def test_constants_command(capsys):
    assert main(["constants", "--dim", "3"]) == 0
    table = json.loads(capsys.readouterr().out)
    assert table["c12bis"] == pytest.approx(35.2850493, rel=1e-8)
    assert table["j0"] == 1


def test_console_entry_point(tmp_path):
    result = subprocess.run([sys.executable, "-m", "polyapprox.cli", "constants", "--dim", "4"],
                            capture_output=True, text=True, check=True)
    assert json.loads(result.stdout)["alpha"] == 3
