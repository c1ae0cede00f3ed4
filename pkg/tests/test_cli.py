import csv
import json
import subprocess
import sys

import pytest

from linsense import cli, config

ANALYZE = """
command = "analyze"

[preset]
name = "single_passive"
params = { kappa_0 = 1.0, kappa_ex = 1.0, n_target = 100.0 }

[measurement]
tau = 1e4
"""


def read_report(path):
    lines = path.read_text().splitlines()
    header = [l for l in lines if l.startswith("#")]
    body = list(csv.DictReader(l for l in lines if not l.startswith("#")))
    return header, body


@pytest.fixture
def analyze_cfg(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text(ANALYZE)
    return p


def test_analyze_reports_critical_coupling_limit(tmp_path, analyze_cfg):
    out = tmp_path / "out"
    assert cli.run(["--config", str(analyze_cfg), "--out", str(out)]) == 0
    header, rows = read_report(out / "report.csv")
    assert any(h.startswith("# config_sha256: ") for h in header)
    assert len(rows) == 1
    assert float(rows[0]["limit"]) == pytest.approx(5e-4, rel=1e-11)
    assert float(rows[0]["bound"]) == pytest.approx(5e-4, rel=1e-11)
    assert abs(float(rows[0]["margin"])) < 1e-14
    assert not (out / "report.json").exists()


def test_header_digest_matches_resolved_config(tmp_path, analyze_cfg):
    out = tmp_path / "out"
    cli.run(["--config", str(analyze_cfg), "--out", str(out)])
    header, _ = read_report(out / "report.csv")
    sha = next(h.split(": ")[1] for h in header if h.startswith("# config_sha256"))
    resolved = json.loads(next(h.split(": ", 1)[1] for h in header if h.startswith("# config: ")))
    assert config.digest(resolved) == sha


def test_set_override_changes_result(tmp_path, analyze_cfg):
    out = tmp_path / "out"
    assert cli.run(["--config", str(analyze_cfg), "--out", str(out), "--set", "measurement.tau=2.5e3"]) == 0
    _, rows = read_report(out / "report.csv")
    assert float(rows[0]["limit"]) == pytest.approx(1e-3, rel=1e-11)


def test_json_output(tmp_path, analyze_cfg):
    out = tmp_path / "out"
    assert cli.run(["--config", str(analyze_cfg), "--out", str(out), "--format", "json"]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["command"] == "analyze"
    assert float(doc["rows"][0]["limit"]) == pytest.approx(5e-4, rel=1e-11)
    assert (out / "report.csv").exists()


def test_inline_network_with_coupling_target(tmp_path):
    cfg = tmp_path / "net.toml"
    cfg.write_text(
        """
command = "analyze"

[network]
modes = [
  { w0 = 0.0, kappa_ex = 1.0, kappa_0 = 1.0 },
  { w0 = 0.0, kappa_ex = 1.0, kappa_0 = 1.0 },
]
mu = [[0, 0.5], [0.5, 0]]

[drive]
w_in = 0.0
a_in = [[1.0, 0.0], 0.0]
n_target = 100.0

[measurement]
tau = 1e4
target = [0, 1]
ports = [0, 1]
"""
    )
    out = tmp_path / "out"
    assert cli.run(["--config", str(cfg), "--out", str(out)]) == 0
    _, rows = read_report(out / "report.csv")
    assert [r["port"] for r in rows] == ["0", "1"]
    assert all(r["target"] == "0;1" for r in rows)
    assert all(float(r["margin"]) >= 0 for r in rows)


@pytest.mark.parametrize(
    "text, extra",
    [
        ("command = \"analyze\"\n[preset\n", []),
        (ANALYZE.replace("tau = 1e4", "tau = \"long\""), []),
        (ANALYZE + "\n[bogus]\nx = 1\n", []),
        (ANALYZE.replace('"single_passive"', '"nope"'), []),
        (ANALYZE, ["--set", "measurement.tau=10"]),
        (ANALYZE, ["--set", "novalue"]),
        (ANALYZE + '\n[network]\nmodes = [{ w0 = 0.0, kappa_ex = 1.0, kappa_0 = 1.0 }]\n', []),
        (ANALYZE.replace("kappa_0 = 1.0", "kappa_0 = -1.0"), []),
    ],
)
def test_invalid_input_exit_2_and_no_output(tmp_path, text, extra):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(text)
    out = tmp_path / "out"
    assert cli.run(["--config", str(cfg), "--out", str(out), *extra]) == 2
    assert not out.exists()


def test_missing_config_file_exit_2(tmp_path):
    assert cli.run(["--config", str(tmp_path / "absent.toml"), "--out", str(tmp_path / "o")]) == 2


def test_above_threshold_exit_3(tmp_path):
    cfg = tmp_path / "gain.toml"
    cfg.write_text(
        """
command = "analyze"

[network]
modes = [{ w0 = 0.0, kappa_ex = 1.0, kappa_0 = 1.0, g = 2.5 }]

[drive]
w_in = 0.0
a_in = [1.0]

[measurement]
tau = 1e4
"""
    )
    out = tmp_path / "out"
    assert cli.run(["--config", str(cfg), "--out", str(out)]) == 3
    assert not out.exists()


def test_sweep_command(tmp_path):
    cfg = tmp_path / "sweep.toml"
    cfg.write_text(
        """
command = "sweep"

[preset]
name = "single_active"
params = { kappa_0 = 1.0, kappa_ex = 1.0 }

[sweep]
parameter = "g"
grid = [0.0, 0.5, 1.0, 2.0]

[measurement]
tau = 1e4
"""
    )
    out = tmp_path / "out"
    assert cli.run(["--config", str(cfg), "--out", str(out)]) == 0
    _, rows = read_report(out / "report.csv")
    assert [r["skipped"] for r in rows] == ["false", "false", "false", "true"]
    assert all(float(r["margin"]) >= 0 for r in rows[:3])


def test_phase_command(tmp_path):
    cfg = tmp_path / "phase.toml"
    cfg.write_text('command = "phase"\n[phase]\nkappa = 1.0\nn = 100.0\ntau = 200.0\ntrials = 2000\n')
    out = tmp_path / "out"
    assert cli.run(["--config", str(cfg), "--out", str(out), "--seed", "3"]) == 0
    _, rows = read_report(out / "report.csv")
    assert float(rows[0]["expected_var_phase"]) == pytest.approx(1.0)
    assert float(rows[0]["var_phase"]) == pytest.approx(1.0, rel=0.15)


def test_simulate_command(tmp_path):
    cfg = tmp_path / "sim.toml"
    cfg.write_text(
        ANALYZE.replace('command = "analyze"', 'command = "simulate"').replace("tau = 1e4", "tau = 100.0")
        + "\n[simulation]\ndt = 0.005\nt_total = 310.0\nburn_in = 10.0\nn_traj = 4\n"
    )
    out = tmp_path / "out"
    assert cli.run(["--config", str(cfg), "--out", str(out), "--seed", "2"]) == 0
    first = (out / "report.csv").read_text()
    _, rows = read_report(out / "report.csv")
    assert int(rows[0]["n_samples"]) == 12
    assert float(rows[0]["analytic_variance"]) == pytest.approx(0.01)
    assert cli.run(["--config", str(cfg), "--out", str(out), "--seed", "2"]) == 0
    assert (out / "report.csv").read_text() == first


def test_verify_small_run_deterministic(tmp_path):
    args = ["verify", "--seed", "4", "--set", "verify.count=30"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.run([*args, "--out", str(a)]) == 0
    assert cli.run([*args, "--out", str(b)]) == 0
    assert (a / "report.csv").read_bytes() == (b / "report.csv").read_bytes()
    _, rows = read_report(a / "report.csv")
    assert len(rows) == 60
    assert all(r["passed"] == "true" for r in rows)


def test_console_entry_point(tmp_path, analyze_cfg):
    res = subprocess.run(
        [sys.executable, "-m", "linsense", "--config", str(analyze_cfg), "--out", str(tmp_path / "o")],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0, res.stderr
    bad = subprocess.run(
        [sys.executable, "-m", "linsense", "--config", str(tmp_path / "missing.toml")],
        capture_output=True,
        text=True,
    )
    assert bad.returncode == 2
    assert bad.stderr.startswith("error: validation")


def test_bound_violation_exit_4(tmp_path, monkeypatch):
    from linsense import scenarios

    real = scenarios.verify_bounds

    def tampered(seed, count=500, kind="frequency", rtol=1e-9):
        checks = real(seed, count, kind, rtol)
        bad = checks[0]
        return [scenarios.BoundCheck(bad.index, bad.instance, bad.report, passed=False, skipped=False), *checks[1:]]

    monkeypatch.setattr(scenarios, "verify_bounds", tampered)
    out = tmp_path / "out"
    assert cli.run(["verify", "--set", "verify.count=3", "--out", str(out)]) == 4
    # the report is still written so the offending instance can be inspected
    _, rows = read_report(out / "report.csv")
    assert rows[0]["passed"] == "false"
