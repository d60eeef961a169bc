"""End-to-end CLI runs in subprocesses: determinism, exit codes, schemas."""

import json
import os
import subprocess
import sys

import pytest

RFW = [sys.executable, "-m", "ritusfw.cli"]


def run_cli(*args, cwd):
    env = dict(os.environ, RFW_THREADS="1")
    return subprocess.run(RFW + list(args), capture_output=True, text=True,
                          env=env, cwd=cwd, timeout=300)


def write_config(path, **overrides):
    cfg = {
        "profile": {"kind": "uniform", "B": 1.0},
        "grid": {"N": 256},
        "n_max": 3,
        "tolerances": {"eig": 1e-4, "residual": 1e-3},
    }
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))
    return path


def test_two_identical_runs_are_byte_identical(tmp_path):
    cfg = write_config(tmp_path / "cfg.json")
    for sub in ("a", "b"):
        proc = run_cli("spectrum", "--config", str(cfg), "--out",
                       str(tmp_path / sub), cwd=tmp_path)
        assert proc.returncode == 0, proc.stderr
    rep_a = (tmp_path / "a" / "report.json").read_bytes()
    rep_b = (tmp_path / "b" / "report.json").read_bytes()
    assert rep_a == rep_b
    csv_a = (tmp_path / "a" / "spectrum.csv").read_bytes()
    assert csv_a == (tmp_path / "b" / "spectrum.csv").read_bytes()


def test_report_contents_and_csv_schema(tmp_path):
    cfg = write_config(tmp_path / "cfg.json")
    proc = run_cli("spectrum", "--config", str(cfg), "--out",
                   str(tmp_path / "out"), cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["status"] == "pass"
    assert report["command"] == "spectrum"
    assert "version" in report
    assert report["config"]["grid"]["N"] == 256
    ks = report["results"]["sigma_plus"]
    # at N=256 the zero mode resolves to ~1e-7, outside the exact-zero clamp
    assert abs(ks[0]) < 1e-6
    assert abs(ks[1] - 2.0) < 1e-3
    header = (tmp_path / "out" / "spectrum.csv").read_text().splitlines()[0]
    assert header == "sigma,n,k"


def test_tolerance_violation_exits_one_with_report(tmp_path):
    cfg = write_config(tmp_path / "cfg.json",
                       tolerances={"eig": 1e-4, "residual": 1e-12})
    proc = run_cli("verify-ritus", "--config", str(cfg), "--out",
                   str(tmp_path / "out"), cwd=tmp_path)
    assert proc.returncode == 1
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["status"] == "fail"
    assert not report["checks"]["intertwining"]["pass"]


def test_malformed_config_exits_two_without_output(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    proc = run_cli("spectrum", "--config", str(bad), "--out",
                   str(tmp_path / "out"), cwd=tmp_path)
    assert proc.returncode == 2
    assert not (tmp_path / "out").exists()
    assert "config" in proc.stderr.lower() or "malformed" in proc.stderr.lower()


def test_unknown_config_key_exits_two(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"grid": {"N": 256}, "unknown_knob": 3}))
    proc = run_cli("spectrum", "--config", str(bad), cwd=tmp_path)
    assert proc.returncode == 2
    assert "unknown_knob" in proc.stderr


def test_unknown_command_exits_two(tmp_path):
    proc = run_cli("frobnicate", cwd=tmp_path)
    assert proc.returncode == 2


def test_flag_overrides_config(tmp_path):
    cfg = write_config(tmp_path / "cfg.json")
    proc = run_cli("spectrum", "--config", str(cfg), "--eB", "2.0", "--out",
                   str(tmp_path / "out"), cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["config"]["profile"]["B"] == 2.0
    assert abs(report["results"]["sigma_plus"][1] - 4.0) < 1e-2


def test_verify_ritus_command(tmp_path):
    cfg = write_config(tmp_path / "cfg.json", grid={"N": 512})
    proc = run_cli("verify-ritus", "--config", str(cfg), "--out",
                   str(tmp_path / "out"), cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["status"] == "pass"
    levels = report["results"]["levels"]
    assert [row["n"] for row in levels] == [0, 1, 2, 3]
    header = (tmp_path / "out" / "levels.csv").read_text().splitlines()[0]
    assert header == "n,k,p0,py,E_D"


def test_stdout_report_when_no_out_dir(tmp_path):
    cfg = write_config(tmp_path / "cfg.json")
    proc = run_cli("spectrum", "--config", str(cfg), cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    report = json.loads(proc.stdout)
    assert report["command"] == "spectrum"
