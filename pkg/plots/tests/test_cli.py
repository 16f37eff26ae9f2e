"""Command line behavior: argument handling, exit codes, messages."""

import subprocess
import sys

from conftest import MOMENTS_HEADER, SWEEP_HEADER, moments_rows, sweep_rows, write_rows


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "spherevortex_plots.cli", *args],
        capture_output=True, text=True,
    )


def test_sweep_command_writes_image(tmp_path):
    table = write_rows(tmp_path / "sweep.csv", SWEEP_HEADER, sweep_rows())
    out = tmp_path / "sweep.png"
    result = run_cli("sweep", str(table), str(out))
    assert result.returncode == 0, result.stderr
    assert f"wrote {out}" in result.stdout
    assert out.stat().st_size > 0


def test_blob_command_writes_image(tmp_path):
    table = write_rows(tmp_path / "m.csv", MOMENTS_HEADER, moments_rows())
    out = tmp_path / "m.svg"
    result = run_cli("blob", str(table), str(out), "--title", "moments")
    assert result.returncode == 0, result.stderr
    assert ">moments<" in out.read_text(encoding="utf-8")


def test_missing_table_exits_1(tmp_path):
    result = run_cli("sweep", str(tmp_path / "nope.csv"), str(tmp_path / "x.png"))
    assert result.returncode == 1
    assert "no such table" in result.stderr


def test_empty_table_exits_1_with_message(tmp_path):
    table = write_rows(tmp_path / "empty.csv", SWEEP_HEADER, [])
    result = run_cli("sweep", str(table), str(tmp_path / "x.png"))
    assert result.returncode == 1
    assert "empty table" in result.stderr


def test_bad_extension_exits_1(tmp_path):
    table = write_rows(tmp_path / "sweep.csv", SWEEP_HEADER, sweep_rows())
    result = run_cli("sweep", str(table), str(tmp_path / "x.gif"))
    assert result.returncode == 1
    assert ".png or .svg" in result.stderr


def test_unknown_subcommand_exits_2(tmp_path):
    result = run_cli("surface", "a", "b")
    assert result.returncode == 2
    assert "usage" in result.stderr


def test_cli_rerun_byte_identical(tmp_path):
    table = write_rows(tmp_path / "sweep.csv", SWEEP_HEADER, sweep_rows())
    out1, out2 = tmp_path / "r1.png", tmp_path / "r2.png"
    assert run_cli("sweep", str(table), str(out1)).returncode == 0
    assert run_cli("sweep", str(table), str(out2)).returncode == 0
    assert out1.read_bytes() == out2.read_bytes()
