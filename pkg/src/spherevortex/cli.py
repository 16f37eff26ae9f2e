"""Command-line surface: simulate, stability, sweep, montecarlo, blob, verify.

Exit codes: 0 success, 1 validation error, 2 numerical failure.  The
master seed is printed on every run; all randomness derives from it.
"""

from __future__ import annotations

import os

# Cap BLAS pools before any numpy-backed module loads them.
_threads = os.environ.get("SPHEREVORTEX_THREADS", "")
if _threads.isdigit() and int(_threads) > 0:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(_var, _threads)

import argparse
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import VortexConfig, integrate
from .equilibria import four_vortex, polar_pair, vortex_crystal
from .errors import (
    ConfigError,
    DistanceUnderflow,
    NoConvergence,
    OverlappingCaps,
    SphereVortexError,
)
from .experiments import (
    blob_evolve,
    blob_initialize,
    montecarlo_collisions,
    stability_sweep,
    substream,
)
from .io import (
    read_config,
    write_collision_stats,
    write_invariants,
    write_manifest,
    write_matrix,
    write_moments,
    write_spectrum,
    write_stability_summary,
    write_sweep_table,
    write_trajectory,
)
from .stability import jacobian, relative_equilibrium_residual, spectrum


def parse_grid(tokens) -> list[float]:
    """Expand grid tokens: plain reals or lo:hi:count linspace ranges."""
    values: list[float] = []
    for tok in tokens:
        tok = str(tok)
        if ":" in tok:
            parts = tok.split(":")
            if len(parts) != 3:
                raise ConfigError(f"bad grid token {tok!r}; expected lo:hi:count")
            try:
                lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
            except ValueError:
                raise ConfigError(f"bad grid token {tok!r}; expected lo:hi:count") from None
            if count < 1:
                raise ConfigError(f"grid count must be >= 1 in {tok!r}")
            values.extend(float(v) for v in np.linspace(lo, hi, count))
        else:
            try:
                values.append(float(tok))
            except ValueError:
                raise ConfigError(f"bad grid value {tok!r}") from None
    return values


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 1."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # Let grid tokens such as -1:1:5 parse as values, not flags.
        self._negative_number_matcher = re.compile(r"^-\d")

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="master seed (default 0)")
    common.add_argument("--out-dir", default=".",
                        help="directory for output files (default .)")

    top = _Parser(prog="spherevortex",
                  description="Point-vortex dynamics on the rotating sphere")
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common],
                       help="integrate a configuration file")
    p.add_argument("config", help="JSON run configuration")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--eps", type=float, default=None,
                   help="integrate the regularized field at this eps")
    p.add_argument("--strict-gauss", action=argparse.BooleanOptionalAction,
                   default=None, help="override the document's strict_gauss")

    p = sub.add_parser("stability", parents=[common],
                       help="Jacobian and spectrum of one configuration")
    p.add_argument("config", nargs="?", default=None,
                   help="JSON run configuration (alternative to --family)")
    p.add_argument("--family",
                   choices=["four-vortex", "vortex-crystal", "polar-pair"])
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--n", type=int, default=8,
                   help="vortex count for vortex-crystal")

    p = sub.add_parser("sweep", parents=[common],
                       help="stability sweep over parameter grids")
    p.add_argument("--family", required=True,
                   choices=["four-vortex", "vortex-crystal", "polar-pair"])
    p.add_argument("--a", nargs="+", default=[],
                   help="grid: reals or lo:hi:count")
    p.add_argument("--gamma", nargs="+", default=[],
                   help="grid: reals or lo:hi:count")
    p.add_argument("--kappa", nargs="+", default=[],
                   help="grid: reals or lo:hi:count")
    p.add_argument("--n", type=int, default=8,
                   help="vortex count for vortex-crystal")

    p = sub.add_parser("montecarlo", parents=[common],
                       help="collision fractions for random configurations")
    p.add_argument("config", nargs="?", default=None,
                   help="JSON configuration supplying strengths and gamma")
    p.add_argument("--n", type=int, default=3,
                   help="vortex count when no config file is given")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--eps", nargs="+", required=True,
                   help="decreasing eps grid")
    p.add_argument("--tau", type=float, default=5.0)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--dt", type=float, default=2e-3)

    p = sub.add_parser("blob", parents=[common],
                       help="desingularized blob confinement run")
    p.add_argument("config", nargs="?", default=None,
                   help="JSON run configuration (alternative to --family)")
    p.add_argument("--family", choices=["four-vortex", "polar-pair"])
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--eps", type=float, default=None, help="blob cap radius")
    p.add_argument("--beta", type=float, default=None,
                   help="exit-radius exponent in (0,1)")
    p.add_argument("--n", type=int, default=None,
                   help="particles per blob (default 200)")
    p.add_argument("--dt", type=float, default=2e-3)
    p.add_argument("--t-end", type=float, default=50.0)

    sub.add_parser("verify", parents=[common],
                   help="run the built-in reproduction suite")
    return top


def _finish(args, command: str, parameters: dict, outputs: list[Path],
            t0: float) -> None:
    manifest = write_manifest(
        Path(args.out_dir), command, parameters, args.seed,
        outputs, wall_time_s=round(time.time() - t0, 3),
    )
    for p in [*outputs, manifest]:
        print(f"wrote {p}")


def _out_dir(args) -> Path:
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_simulate(args) -> int:
    t0 = time.time()
    out = _out_dir(args)
    doc = read_config(args.config, strict_gauss=args.strict_gauss)
    traj = integrate(doc.config, dt=args.dt, t_end=args.t_end, eps=args.eps)
    paths = [out / "trajectory.csv", out / "invariants.csv"]
    write_trajectory(traj, paths[0])
    write_invariants(traj, paths[1])
    _finish(args, "simulate", {
        "config": str(args.config), "dt": args.dt, "t_end": args.t_end,
        "eps": args.eps,
    }, paths, t0)
    if traj.aborted:
        print(f"integration aborted at t={traj.abort_time}: {traj.abort_reason}",
              file=sys.stderr)
        return 2
    drift_h = float(np.max(np.abs(traj.energy - traj.energy[0])))
    drift_m = float(np.max(np.abs(traj.moment - traj.moment[0])))
    print(f"samples: {traj.n_samples}  H drift: {drift_h:.3e}  "
          f"M3 drift: {drift_m:.3e}")
    return 0


def _build_family(args) -> VortexConfig:
    if args.family == "four-vortex":
        return four_vortex(args.a, args.gamma)
    if args.family == "vortex-crystal":
        return vortex_crystal(args.n, args.a, args.kappa, args.gamma)
    if args.family == "polar-pair":
        return polar_pair(1.0, args.gamma)
    raise ConfigError("pass --family or a config file")


def cmd_stability(args) -> int:
    t0 = time.time()
    out = _out_dir(args)
    if args.config is not None:
        cfg = read_config(args.config).config
    else:
        cfg = _build_family(args)
    omega, eq_res = relative_equilibrium_residual(cfg)
    tmap = jacobian(cfg)
    rep = spectrum(tmap.assembled)
    paths = [out / "jacobian.csv", out / "spectrum.csv", out / "summary.csv"]
    write_matrix(tmap.assembled, paths[0])
    write_spectrum(rep, paths[1])
    write_stability_summary(rep, omega, eq_res, paths[2])
    _finish(args, "stability", {
        "config": args.config, "family": args.family, "a": args.a,
        "gamma": args.gamma, "kappa": args.kappa, "n": args.n,
    }, paths, t0)
    print(f"max_real_part: {rep.max_real_part:.6e}  Omega: {omega:.6e}  "
          f"eq_residual: {eq_res:.3e}")
    return 0


def cmd_sweep(args) -> int:
    t0 = time.time()
    out = _out_dir(args)
    rows = stability_sweep(
        args.family,
        a_values=parse_grid(args.a),
        gamma_values=parse_grid(args.gamma),
        kappa_values=parse_grid(args.kappa) or None,
        n=args.n,
    )
    failed = [r for r in rows if r.error]
    path = out / "sweep.csv"
    write_sweep_table(rows, path)
    _finish(args, "sweep", {
        "family": args.family, "a": args.a, "gamma": args.gamma,
        "kappa": args.kappa, "n": args.n,
    }, [path], t0)
    print(f"rows: {len(rows)}  failed: {len(failed)}")
    for r in failed:
        print(f"  a={r.a} kappa={r.kappa} gamma={r.gamma}: {r.error}",
              file=sys.stderr)
    return 0


def cmd_montecarlo(args) -> int:
    t0 = time.time()
    out = _out_dir(args)
    if args.config is not None:
        cfg = read_config(args.config).config
        n, strengths, gamma = cfg.n, cfg.strengths, cfg.gamma
    else:
        n = args.n
        if n < 2:
            raise ConfigError(f"--n must be >= 2, got {n}")
        strengths = np.concatenate([np.ones(n - 1), [-(n - 1.0)]])
        gamma = args.gamma
    stats = montecarlo_collisions(
        n, strengths, gamma, parse_grid(args.eps),
        tau=args.tau, trials=args.trials, dt=args.dt, master_seed=args.seed,
    )
    path = out / "collisions.csv"
    write_collision_stats(stats, path)
    _finish(args, "montecarlo", {
        "config": args.config, "n": int(n), "gamma": float(gamma),
        "strengths": [float(s) for s in strengths],
        "eps": list(stats.eps_grid), "tau": args.tau,
        "trials": args.trials, "dt": args.dt,
    }, [path], t0)
    for e, eps in enumerate(stats.eps_grid):
        print(f"eps={eps:g}: fraction {stats.fractions[e]:.4f} "
              f"+- {stats.stderrs[e]:.4f}")
    return 0


def cmd_blob(args) -> int:
    t0 = time.time()
    out = _out_dir(args)
    blob_doc = None
    if args.config is not None:
        doc = read_config(args.config)
        cfg = doc.config
        blob_doc = doc.blob
    else:
        if args.family is None:
            raise ConfigError("pass --family or a config file")
        cfg = _build_family(args)

    def pick(flag_value, doc_value, default):
        if flag_value is not None:
            return flag_value
        if doc_value is not None:
            return doc_value
        return default

    eps = pick(args.eps, blob_doc.eps if blob_doc else None, 0.1)
    beta = pick(args.beta, blob_doc.beta if blob_doc else None, 0.4)
    m = int(pick(args.n, blob_doc.particles_per_blob if blob_doc else None, 200))

    cloud = blob_initialize(cfg, eps=eps, particles_per_blob=m, beta=beta,
                            rng=substream(args.seed, 0))
    report = blob_evolve(cloud, dt=args.dt, t_end=args.t_end)
    path = out / "moments.csv"
    write_moments(report, path)
    _finish(args, "blob", {
        "config": args.config, "family": args.family, "a": args.a,
        "gamma": args.gamma, "eps": eps, "beta": beta,
        "particles_per_blob": m, "dt": args.dt, "t_end": args.t_end,
    }, [path], t0)
    if report.exit_time is None:
        print(f"no exit by t={args.t_end} (radius {report.exit_radius:.4f})")
    else:
        print(f"exit at t={report.exit_time:g} (blob {report.exit_blob}, "
              f"radius {report.exit_radius:.4f})")
    return 0


def cmd_verify(args) -> int:
    from .verify import run_all

    out = _out_dir(args)
    results = run_all(out, master_seed=args.seed)
    width = max(len(r.name) for r in results)
    ok = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        ok = ok and r.passed
        print(f"[{status}] {r.name:<{width}}  {r.detail}  ({r.seconds:.2f}s)")
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return 0 if ok else 2


_DISPATCH = {
    "simulate": cmd_simulate,
    "stability": cmd_stability,
    "sweep": cmd_sweep,
    "montecarlo": cmd_montecarlo,
    "blob": cmd_blob,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    print(f"master seed: {args.seed}")
    try:
        return _DISPATCH[args.command](args)
    except (ConfigError, OverlappingCaps) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DistanceUnderflow, NoConvergence) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except SphereVortexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
