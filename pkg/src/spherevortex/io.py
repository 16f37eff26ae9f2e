"""Bit-stable delimited output, run-configuration parsing, and manifests.

Every writer fixes the column order, uses 17-significant-digit
scientific notation for reals (round-trip exact for binary64), writes
"\\n" line endings, and encodes UTF-8, so identical runs produce
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import Trajectory, VortexConfig
from .errors import ConfigError
from .experiments import CollisionStats, MomentReport, SweepRow
from .sphere import normalize
from .stability import SpectrumReport

FLOAT_FMT = "%.16e"


def format_value(v) -> str:
    """Fixed-format cell: reals scientific 17 digits, ints plain, text as-is."""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % float(v)
    return str(v)


def write_table(path, header: list[str], rows) -> None:
    """Write rows of cells as comma-separated text with a fixed header."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")


# --- Schema writers ---


def write_trajectory(traj: Trajectory, path) -> None:
    """Per-sample, per-vortex positions and velocities.

    Columns: t,i,x,y,z,gx,gy,gz with i the 0-based vortex index.
    """
    def rows():
        for k in range(traj.n_samples):
            t = float(traj.times[k])
            for i in range(traj.states.shape[1]):
                x, y, z = traj.states[k, i]
                gx, gy, gz = traj.velocities[k, i]
                yield (t, i, float(x), float(y), float(z),
                       float(gx), float(gy), float(gz))

    write_table(path, ["t", "i", "x", "y", "z", "gx", "gy", "gz"], rows())


def write_invariants(traj: Trajectory, path) -> None:
    """Per-sample energy, vertical moment, and strength sum."""
    gauss = traj.config.gauss_sum

    def rows():
        for k in range(traj.n_samples):
            yield (float(traj.times[k]), float(traj.energy[k]),
                   float(traj.moment[k]), gauss)

    write_table(path, ["t", "H", "M3", "gauss_sum"], rows())


def write_spectrum(report: SpectrumReport, path) -> None:
    """Eigenvalues in report order with their residual certificates."""
    rows = (
        (float(v.real), float(v.imag), float(r))
        for v, r in zip(report.eigenvalues, report.residuals)
    )
    write_table(path, ["re", "im", "residual"], rows)


def write_stability_summary(
    report: SpectrumReport, omega: float, eq_residual: float, path
) -> None:
    """One-row companion of a spectrum file."""
    write_table(
        path,
        ["max_real_part", "Omega", "eq_residual"],
        [(report.max_real_part, float(omega), float(eq_residual))],
    )


def write_matrix(matrix: np.ndarray, path) -> None:
    """A dense real matrix, one CSV row per matrix row."""
    matrix = np.asarray(matrix, dtype=float)
    header = [f"c{j}" for j in range(matrix.shape[1])]
    write_table(path, header, (tuple(float(v) for v in row) for row in matrix))


def write_sweep_table(rows: list[SweepRow], path) -> None:
    """Stability-sweep grid results (failed rows carry nan metrics)."""
    write_table(
        path,
        ["family", "N", "a", "kappa", "gamma", "eq_residual",
         "max_real_part", "Omega"],
        (
            (r.family, r.N, r.a, r.kappa, r.gamma, r.eq_residual,
             r.max_real_part, r.Omega)
            for r in rows
        ),
    )


def write_collision_stats(stats: CollisionStats, path) -> None:
    """One row per eps with counts, fraction, and binomial standard error."""
    rows = (
        (
            stats.eps_grid[e],
            stats.trials,
            int(np.count_nonzero(stats.collided[e])),
            float(stats.fractions[e]),
            float(stats.stderrs[e]),
        )
        for e in range(len(stats.eps_grid))
    )
    write_table(path, ["eps", "trials", "collided", "fraction", "stderr"], rows)


def write_moments(report: MomentReport, path) -> None:
    """Blob diagnostics time series.

    Columns: t,blob,cx,cy,cz,I,m1,m2,m3,R,exit_time where blob is the
    1-based blob id and exit_time repeats the run-level exit time on
    every row (empty when the run never exited).
    """
    orders = sorted(report.higher_moments)
    header = ["t", "blob", "cx", "cy", "cz", "I"]
    header += [f"m{n}" for n in orders]
    header += ["R", "exit_time"]
    exit_cell = "" if report.exit_time is None else format_value(report.exit_time)

    def rows():
        nblob = report.centers.shape[1]
        for k in range(len(report.times)):
            for b in range(nblob):
                row = [
                    float(report.times[k]),
                    b + 1,
                    float(report.centers[k, b, 0]),
                    float(report.centers[k, b, 1]),
                    float(report.centers[k, b, 2]),
                    float(report.second_moment[k, b]),
                ]
                row += [float(report.higher_moments[n][k, b]) for n in orders]
                row += [float(report.support_radius[k, b]), exit_cell]
                yield tuple(row)

    write_table(path, header, rows())


# --- Manifests ---


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(
    out_dir, command: str, parameters: dict, master_seed: int,
    outputs: list, wall_time_s: float,
) -> Path:
    """Record a run's inputs and output digests beside its outputs.

    Replaying the manifest's command and parameters reproduces the
    listed files byte for byte (wall_time_s excepted).
    """
    out_dir = Path(out_dir)
    manifest = {
        "command": command,
        "parameters": parameters,
        "master_seed": int(master_seed),
        "version": __version__,
        "wall_time_s": wall_time_s,
        "outputs": [
            {"path": Path(p).name, "sha256": sha256_file(p)} for p in outputs
        ],
    }
    path = out_dir / "run_manifest.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def check_manifest(manifest_path) -> list[str]:
    """Names of manifest outputs whose current digest no longer matches."""
    manifest_path = Path(manifest_path)
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    stale = []
    for entry in manifest.get("outputs", []):
        target = manifest_path.parent / entry["path"]
        if not target.exists() or sha256_file(target) != entry["sha256"]:
            stale.append(entry["path"])
    return stale


# --- Run configuration documents ---


@dataclass(frozen=True)
class BlobRequest:
    """Blob block of a config document."""

    eps: float
    particles_per_blob: int
    beta: float


@dataclass(frozen=True)
class ConfigDocument:
    """Parsed run configuration: a vortex system plus optional blob block."""

    config: VortexConfig
    blob: BlobRequest | None


def _need(mapping, key, where: str):
    if key not in mapping:
        raise ConfigError(f"{where}: missing required field {key!r}")
    return mapping[key]


def _as_real(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"{where}: must be finite, got {value!r}")
    return v


def read_config(path, strict_gauss: bool | None = None) -> ConfigDocument:
    """Parse a JSON run configuration.

    Schema: {"gamma": real, "strict_gauss": bool (default true),
    "vortices": [{"position": [x, y, z], "strength": real}, ...],
    "blob": {"eps": real, "particles_per_blob": int, "beta": real}
    (optional)}.  Positions are renormalized to the sphere; deviations
    beyond 1e-6 in |x| - 1 draw a warning.  The strict_gauss argument,
    when given, overrides the document.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")

    gamma = _as_real(_need(doc, "gamma", "config"), "gamma")
    strict = doc.get("strict_gauss", True)
    if not isinstance(strict, bool):
        raise ConfigError("strict_gauss: expected true or false")
    if strict_gauss is not None:
        strict = strict_gauss

    vortices = _need(doc, "vortices", "config")
    if not isinstance(vortices, list) or len(vortices) < 2:
        raise ConfigError("vortices: expected a list of at least 2 entries")
    points = np.empty((len(vortices), 3))
    strengths = np.empty(len(vortices))
    for k, entry in enumerate(vortices):
        where = f"vortices[{k}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where}: expected an object")
        pos = _need(entry, "position", where)
        if not isinstance(pos, list) or len(pos) != 3:
            raise ConfigError(f"{where}.position: expected a list of 3 numbers")
        points[k] = [_as_real(c, f"{where}.position[{j}]") for j, c in enumerate(pos)]
        norm = float(np.linalg.norm(points[k]))
        if norm < 1e-12:
            raise ConfigError(f"{where}.position: zero vector cannot be normalized")
        if abs(norm - 1.0) > 1e-6:
            warnings.warn(
                f"{where}.position off the sphere by {abs(norm - 1.0):.3e}; renormalizing",
                stacklevel=2,
            )
        strengths[k] = _as_real(_need(entry, "strength", where), f"{where}.strength")
    points = normalize(points)

    blob = None
    if "blob" in doc:
        bl = doc["blob"]
        if not isinstance(bl, dict):
            raise ConfigError("blob: expected an object")
        m = _need(bl, "particles_per_blob", "blob")
        if isinstance(m, bool) or not isinstance(m, int) or m < 1:
            raise ConfigError("blob.particles_per_blob: expected an integer >= 1")
        blob = BlobRequest(
            eps=_as_real(_need(bl, "eps", "blob"), "blob.eps"),
            particles_per_blob=m,
            beta=_as_real(_need(bl, "beta", "blob"), "blob.beta"),
        )

    try:
        cfg = VortexConfig(
            points=points, strengths=strengths, gamma=gamma, strict_gauss=strict
        )
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return ConfigDocument(config=cfg, blob=blob)
