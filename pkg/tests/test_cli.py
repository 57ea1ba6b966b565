"""Command-line interface: schemas, determinism, exit codes."""

import csv
import json
import subprocess
import sys

import pytest

from fbdp.cli import run


def _capture(capsys, argv):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_version():
    out = subprocess.run([sys.executable, "-m", "fbdp.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.startswith("fbdp ")


def test_ml_eval_plain(capsys):
    code, out, _ = _capture(capsys, ["ml-eval", "--alpha", "0.5",
                                     "--x", "-1.0"])
    assert code == 0
    assert float(out) == pytest.approx(0.4275835761558070, rel=1e-12)


def test_ml_eval_theta_time_form(capsys):
    code, out, _ = _capture(capsys, ["ml-eval", "--alpha", "0.5",
                                     "--theta", "1.0", "--t", "4.0"])
    assert code == 0
    assert float(out) == pytest.approx(0.2553956763105057, rel=1e-12)


def test_sample_stable_csv_schema(tmp_path):
    out = tmp_path / "draws.csv"
    code = run(["sample-stable", "--alpha", "0.6", "--n", "10",
                "--seed", "3", "--out", str(out)])
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["draw"]
    assert len(rows) == 11
    assert all(float(r[0]) > 0.0 for r in rows[1:])
    manifest = json.loads((tmp_path / "draws.csv.manifest.json").read_text())
    assert manifest["inputs"]["seed"] == 3
    assert "version" in manifest


def test_simulate_rerun_byte_identical(tmp_path):
    argv = ["simulate", "--method", "renewal", "--alpha", "0.7",
            "--lambda", "0.5", "--mu", "1.0", "--i0", "1", "--t", "1.0",
            "--n-paths", "500", "--seed", "11"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert run(argv + ["--out", str(a)]) == 0
    assert run(argv + ["--out", str(b), "--workers", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
    header = a.open().readline().strip()
    assert header == "t,state,probability,stderr,n_paths,method"


def test_transition_schema_and_value(tmp_path):
    out = tmp_path / "p.csv"
    assert run(["transition", "--alpha", "1.0", "--lambda", "0.5",
                "--mu", "1.0", "--i", "1", "--j", "1", "--t", "0.0",
                "--M", "50", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert float(rows[0]["p"]) == pytest.approx(1.0, abs=1e-12)
    assert list(rows[0].keys()) == ["i", "j", "t", "p"]


def test_survival_schema(capsys):
    code, out, _ = _capture(capsys, ["survival", "--alpha", "0.7",
                                     "--lambda", "0.5", "--mu", "1.0",
                                     "--i", "1", "--t", "1.0"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "i,t,survival"
    assert 0.0 < float(lines[1].split(",")[2]) < 1.0


def test_qld_schema(capsys):
    code, out, _ = _capture(capsys, ["qld", "--alpha", "0.7",
                                     "--lambda", "0.5", "--mu", "1.0",
                                     "--i0", "1", "--nmax", "5"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,coefficient,pmf"
    assert len(lines) == 6


def test_qld_nonexistent_is_numerical_failure(capsys):
    code, _, err = _capture(capsys, ["qld", "--alpha", "0.7",
                                     "--lambda", "1.0", "--mu", "1.0",
                                     "--i0", "1", "--nmax", "5"])
    assert code == 1
    assert "error" in err


def test_qsd_sidecar(tmp_path):
    out = tmp_path / "qsd.csv"
    assert run(["qsd", "--lambda", "0.5", "--mu", "1.0", "--theta", "0.5",
                "--nmax", "50", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0].keys()) == ["j", "nu"]
    side = json.loads((tmp_path / "qsd.csv.classification.json").read_text())
    assert side["classification"] == "family"
    assert side["outcome"] == "qsd"


def test_qsd_theta_scan(capsys):
    code, out, _ = _capture(capsys, ["qsd", "--lambda", "0.5", "--mu", "1.0",
                                     "--theta-scan", "0.1:0.7:4",
                                     "--nmax", "200"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "theta,outcome"
    outcomes = [ln.split(",")[1] for ln in lines[1:]]
    assert outcomes[:3] == ["qsd", "qsd", "qsd"]
    assert outcomes[3] != "qsd"


def test_linear_survival(capsys):
    code, out, _ = _capture(capsys, ["linear", "--alpha", "1.0",
                                     "--lambda", "1.0", "--mu", "1.0",
                                     "--what", "survival", "--t", "3.0"])
    assert code == 0
    assert float(out.strip().splitlines()[1].split(",")[1]) == \
        pytest.approx(0.25, rel=1e-12)


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("alpha = 0.5\nx = -1.0\n")
    code, out, _ = _capture(capsys, ["--config", str(cfg), "ml-eval",
                                     "--x", "-2.0"])
    assert code == 0
    assert float(out) == pytest.approx(0.2553956763105057, rel=1e-12)


def test_json_output(capsys):
    code, out, _ = _capture(capsys, ["ml-eval", "--alpha", "0.5",
                                     "--x", "-1.0", "--json"])
    assert code == 0
    payload = json.loads(out)
    assert payload["manifest"]["command"] == "ml-eval"
    assert payload["rows"][0]["value"] == pytest.approx(0.42758357615580704)


def test_usage_error_exit_two():
    out = subprocess.run([sys.executable, "-m", "fbdp.cli", "simulate",
                          "--method", "renewal", "--alpha", "0.7"],
                         capture_output=True, text=True)
    assert out.returncode == 2


def test_missing_rates_is_numerical_failure(capsys):
    code, _, err = _capture(capsys, ["transition", "--alpha", "0.7",
                                     "--i", "1", "--j", "1", "--t", "1.0"])
    assert code == 1
    assert "rates-file" in err or "lambda" in err


def test_rates_file_roundtrip(tmp_path, capsys):
    p = tmp_path / "rates.csv"
    p.write_text("i,birth,death\n0,0,0\n1,0.5,1\n2,1.0,2\n3,1.5,3\n")
    code, out, _ = _capture(capsys, ["transition", "--alpha", "0.7",
                                     "--rates-file", str(p), "--i", "1",
                                     "--j", "2", "--t", "1.0", "--M", "3"])
    assert code == 0
    assert 0.0 < float(out.strip().splitlines()[1].split(",")[3]) < 1.0


def test_selfcheck_passes():
    out = subprocess.run([sys.executable, "-m", "fbdp.cli", "selfcheck"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "all checks passed" in out.stdout
