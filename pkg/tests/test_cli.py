"""End-to-end runs of the command-line entry point."""

import hashlib
import json
import subprocess
import sys

import pytest

from spherevortex.io import check_manifest

CONFIG = {
    "gamma": 0.5,
    "vortices": [
        {"position": [0.0, 0.0, 1.0], "strength": 1.0},
        {"position": [0.0, 0.0, -1.0], "strength": -1.0},
    ],
    "blob": {"eps": 0.1, "particles_per_blob": 20, "beta": 0.4},
}


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "spherevortex.cli", *args],
        capture_output=True, text=True, cwd=cwd,
    )


def sha256(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(CONFIG), encoding="utf-8")
    return path


def test_simulate_writes_outputs_and_manifest(tmp_path, config_path):
    out = tmp_path / "run"
    result = run_cli("simulate", str(config_path), "--dt", "1e-2",
                     "--t-end", "0.2", "--out-dir", str(out))
    assert result.returncode == 0, result.stderr
    assert "master seed: 0" in result.stdout
    assert (out / "trajectory.csv").exists()
    assert (out / "invariants.csv").exists()
    assert check_manifest(out / "run_manifest.json") == []
    doc = json.loads((out / "run_manifest.json").read_text(encoding="utf-8"))
    assert doc["command"] == "simulate"
    assert doc["master_seed"] == 0


def test_simulate_is_deterministic(tmp_path, config_path):
    digests = []
    for name in ("one", "two"):
        out = tmp_path / name
        result = run_cli("simulate", str(config_path), "--dt", "1e-2",
                         "--t-end", "0.2", "--out-dir", str(out))
        assert result.returncode == 0, result.stderr
        digests.append(sha256(out / "trajectory.csv"))
    assert digests[0] == digests[1]


def test_stability_family_run(tmp_path):
    out = tmp_path / "stab"
    result = run_cli("stability", "--family", "four-vortex", "--a", "1.0",
                     "--gamma", "0.5", "--out-dir", str(out))
    assert result.returncode == 0, result.stderr
    summary = (out / "summary.csv").read_text(encoding="utf-8").splitlines()
    assert summary[0] == "max_real_part,Omega,eq_residual"
    max_real = float(summary[1].split(",")[0])
    assert abs(max_real - 0.0491) < 1e-3
    spectrum_rows = (out / "spectrum.csv").read_text(
        encoding="utf-8").splitlines()
    assert len(spectrum_rows) == 9


def test_sweep_grid_and_failed_rows(tmp_path):
    out = tmp_path / "sweep"
    result = run_cli("sweep", "--family", "four-vortex",
                     "--a", "0.5", "1.5", "--gamma", "-1:1:3",
                     "--out-dir", str(out))
    assert result.returncode == 0, result.stderr
    lines = (out / "sweep.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 7
    assert "failed: 3" in result.stdout
    assert "must lie" in result.stderr


def test_montecarlo_replay_identical_files(tmp_path):
    digests = []
    for name in ("one", "two"):
        out = tmp_path / name
        result = run_cli("montecarlo", "--n", "3", "--eps", "0.3", "0.2",
                         "--tau", "0.2", "--trials", "20", "--dt", "0.02",
                         "--seed", "5", "--out-dir", str(out))
        assert result.returncode == 0, result.stderr
        assert "master seed: 5" in result.stdout
        digests.append(sha256(out / "collisions.csv"))
    assert digests[0] == digests[1]


def test_blob_uses_config_block(tmp_path, config_path):
    out = tmp_path / "blob"
    result = run_cli("blob", str(config_path), "--dt", "1e-2",
                     "--t-end", "0.1", "--out-dir", str(out))
    assert result.returncode == 0, result.stderr
    lines = (out / "moments.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,blob,cx,cy,cz,I,m1,m2,m3,R,exit_time"
    params = json.loads((out / "run_manifest.json").read_text(
        encoding="utf-8"))["parameters"]
    assert params["particles_per_blob"] == 20
    assert params["eps"] == 0.1


def test_validation_errors_exit_one(tmp_path, config_path):
    assert run_cli("simulate", "missing.json").returncode == 1
    assert run_cli("sweep", "--family", "four-vortex",
                   "--gamma", "0:1").returncode == 1
    assert run_cli("blob", "--eps", "0.1").returncode == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "gamma": 0.0,
        "vortices": [
            {"position": [0.0, 0.0, 1.0], "strength": 1.0},
            {"position": [0.0, 0.0, -1.0], "strength": -0.5},
        ],
    }), encoding="utf-8")
    assert run_cli("simulate", str(bad)).returncode == 1
    relaxed = run_cli("simulate", str(bad), "--no-strict-gauss",
                      "--dt", "0.1", "--t-end", "0.1",
                      "--out-dir", str(tmp_path / "relaxed"))
    assert relaxed.returncode == 0, relaxed.stderr


def test_thread_cap_env_is_honored(tmp_path, config_path):
    import os

    env = dict(os.environ, SPHEREVORTEX_THREADS="1")
    result = subprocess.run(
        [sys.executable, "-c",
         "import os; import spherevortex.cli; "
         "print(os.environ['OMP_NUM_THREADS'])"],
        capture_output=True, text=True, env=env,
    )
    assert result.returncode == 0, result.stderr
    assert result.stdout.strip() == "1"
