"""Command-line interface: exit codes, JSON determinism, outputs."""

import json
import subprocess
import sys

import pytest

from dlwlab.cli import main


def run_cli(args):
    return main(args)


def test_symmetry_verify_exit_zero(capsys):
    assert run_cli(["symmetry", "verify"]) == 0
    out = capsys.readouterr().out
    assert "determining-X1" in out


def test_adjoint_bracket_filtered(capsys):
    assert run_cli(["adjoint", "bracket", "--fix", "Q1"]) == 0
    out = capsys.readouterr().out
    assert "bracket-fixQ1" in out
    assert "bracket-fixQ3" not in out


def test_conslaw_sets(capsys):
    assert run_cli(["conslaw", "verify", "--set", "noether"]) == 0
    out = capsys.readouterr().out
    assert "divergence-eq54" in out
    assert "divergence-eq67" not in out


def test_conslaw_hamiltonian(capsys):
    assert run_cli(["conslaw", "hamiltonian"]) == 0
    out = capsys.readouterr().out
    assert "hamiltonian-gradient" in out
    assert "presymplectic-P4" in out


def test_waves_family_json(capsys):
    assert run_cli(["waves", "verify", "--family", "eq93", "--binding", "mu=1.0"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["max_residual"] < 1e-10


def test_waves_first_integrals(capsys):
    assert run_cli(["waves", "first-integrals", "--mu", "1"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert len(rows) == 4
    assert all(r["constant_along_flow"] for r in rows)


def test_waves_profile_csv(tmp_path, capsys):
    out = tmp_path / "kink.csv"
    assert run_cli([
        "waves", "profile", "--family", "eq93", "--binding", "mu=1.0", "--out", str(out),
    ]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "xi,U,V"
    assert len(lines) == 202


def test_report_json_deterministic(tmp_path):
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    assert run_cli(["--reproducible", "--json", str(p1), "symmetry", "optimal", "--samples", "40"]) == 0
    assert run_cli(["--reproducible", "--json", str(p2), "symmetry", "optimal", "--samples", "40"]) == 0
    assert p1.read_bytes() == p2.read_bytes()


def test_sim_run_outputs(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "x_min=-20\nx_max=20\nn=64\nt_end=0.05\nboundary=exact\n"
        "family=eq93\nparam.mu=1.0\nmonitors=eq32,eq33\noutput_stride=10\n"
    )
    assert run_cli(["sim", "run", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["outcome"] == "completed"
    assert (tmp_path / "monitor_eq32.csv").exists()
    assert (tmp_path / "snapshot.csv").exists()
    snap = (tmp_path / "snapshot.csv").read_text().splitlines()
    assert snap[0] == "x,u,v"
    assert len(snap) == 65


def test_sim_run_records_blowup(tmp_path, capsys):
    cfg = tmp_path / "blow.cfg"
    cfg.write_text(
        "x_min=-20\nx_max=20\nn=512\nt_end=1.0\nboundary=exact\n"
        "family=eq93\nparam.mu=1.0\n"
    )
    assert run_cli(["sim", "run", "--config", str(cfg)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["outcome"] == "blowup"
    assert 0.0 < summary["blowup_time"] < 1.0


def test_usage_error_exit_two():
    with pytest.raises(SystemExit) as err:
        main(["report", "nonsense"])
    assert err.value.code == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "dlwlab", "symmetry", "verify"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert "determining-X4" in proc.stdout
