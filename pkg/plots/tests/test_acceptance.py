"""Acceptance: render real simulation outputs within the time budget.

These tests drive the simulation CLI in a subprocess and consume only
its documented CSV outputs; they are skipped when that package is not
installed.
"""

import importlib.util
import subprocess
import sys
import time

import pytest

pytestmark = pytest.mark.skipif(
    importlib.util.find_spec("spherevortex") is None,
    reason="simulation package not installed",
)


def run_module(module, *args):
    return subprocess.run(
        [sys.executable, "-m", module, *args],
        capture_output=True, text=True,
    )


def test_sweep_figure_from_simulation_output(tmp_path):
    start = time.monotonic()
    sim = run_module(
        "spherevortex.cli", "sweep", "--family", "four-vortex",
        "--a", "0.1", "0.3", "--gamma", "-2:2:81",
        "--out-dir", str(tmp_path),
    )
    assert sim.returncode == 0, sim.stderr
    table = tmp_path / "sweep.csv"
    assert table.is_file()

    png = tmp_path / "sweep.png"
    rendered = run_module("spherevortex_plots.cli", "sweep", str(table), str(png))
    assert rendered.returncode == 0, rendered.stderr
    assert png.read_bytes().startswith(b"\x89PNG")
    assert png.stat().st_size > 1000

    svg = tmp_path / "sweep.svg"
    rendered = run_module("spherevortex_plots.cli", "sweep", str(table), str(svg))
    assert rendered.returncode == 0, rendered.stderr
    text = svg.read_text(encoding="utf-8")
    # one curve per ring radius, and only those two
    assert text.count("a = 0.1") == 1
    assert text.count("a = 0.3") == 1
    assert text.count("a = ") == 2

    elapsed = time.monotonic() - start
    print(f"[PASS] sweep figure: two curves, {png.stat().st_size} byte png "
          f"({elapsed:.1f}s)")
    assert elapsed < 30.0


def test_blob_figure_exit_marker_iff_present(tmp_path):
    start = time.monotonic()
    sim = run_module(
        "spherevortex.cli", "blob", "--family", "polar-pair",
        "--eps", "0.1", "--n", "20", "--beta", "0.4",
        "--dt", "2e-3", "--t-end", "2.0", "--out-dir", str(tmp_path),
    )
    assert sim.returncode == 0, sim.stderr
    series = tmp_path / "moments.csv"
    assert series.is_file()

    # the stable pair records no exit, so no marker may appear
    out = tmp_path / "moments.svg"
    rendered = run_module("spherevortex_plots.cli", "blob", str(series), str(out))
    assert rendered.returncode == 0, rendered.stderr
    text = out.read_text(encoding="utf-8")
    assert "I (blob 1)" in text and "R (blob 2)" in text
    assert "exit_time (" not in text

    # the same series with a recorded exit for blob 1 gains exactly one
    lines = series.read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    blob_col = header.index("blob")
    exit_col = header.index("exit_time")
    patched = [lines[0]]
    for line in lines[1:]:
        cells = line.split(",")
        if cells[blob_col] == "1":
            cells[exit_col] = "1.6"
        patched.append(",".join(cells))
    marked = tmp_path / "moments_exit.csv"
    marked.write_text("\n".join(patched) + "\n", encoding="utf-8")

    out2 = tmp_path / "moments_exit.svg"
    rendered = run_module("spherevortex_plots.cli", "blob", str(marked), str(out2))
    assert rendered.returncode == 0, rendered.stderr
    text2 = out2.read_text(encoding="utf-8")
    assert text2.count("exit_time (blob 1)") == 1
    assert "exit_time (blob 2)" not in text2

    elapsed = time.monotonic() - start
    print(f"[PASS] blob figure: marker iff exit recorded ({elapsed:.1f}s)")
    assert elapsed < 30.0
