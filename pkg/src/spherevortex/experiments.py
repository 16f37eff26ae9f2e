"""Experiment drivers: stability sweeps, collision Monte Carlo, blob runs.

Every random quantity is drawn from a substream derived from a master
seed and the work item's indices, so results are reproducible and
independent of execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    DIST_FLOOR,
    TWO_PI,
    VortexConfig,
    _renormalized,
    _step_schedule,
    integrate,
)
from .equilibria import four_vortex, polar_pair, vortex_crystal
from .errors import ConfigError, OverlappingCaps, SphereVortexError
from .sphere import E3, sample_cap, sample_uniform
from .stability import jacobian, relative_equilibrium_residual, spectrum


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one work item.

    Streams for distinct keys never collide, and the mapping does not
    depend on the order work items are processed in.
    """
    ss = np.random.SeedSequence(
        entropy=int(master_seed), spawn_key=tuple(int(k) for k in key)
    )
    return np.random.default_rng(ss)


# --- Stability sweeps ---

SWEEP_FAMILIES = ("four_vortex", "vortex_crystal", "polar_pair")


@dataclass
class SweepRow:
    """One grid point of a stability sweep (metrics are nan on failure)."""

    family: str
    N: int
    a: float
    kappa: float
    gamma: float
    eq_residual: float
    max_real_part: float
    Omega: float
    error: str = ""


def _sweep_row(family: str, N: int, a: float, kappa: float, gamma: float,
               build) -> SweepRow:
    try:
        cfg = build()
        if family == "four_vortex":
            kappa = float(cfg.strengths[0])
        omega, eq_res = relative_equilibrium_residual(cfg)
        rep = spectrum(jacobian(cfg).assembled)
        return SweepRow(
            family=family,
            N=N,
            a=a,
            kappa=kappa,
            gamma=gamma,
            eq_residual=eq_res,
            max_real_part=rep.max_real_part,
            Omega=omega,
        )
    except (SphereVortexError, np.linalg.LinAlgError) as exc:
        return SweepRow(
            family=family,
            N=N,
            a=a,
            kappa=kappa,
            gamma=gamma,
            eq_residual=math.nan,
            max_real_part=math.nan,
            Omega=math.nan,
            error=str(exc),
        )


def stability_sweep(
    family: str,
    a_values=(),
    gamma_values=(),
    kappa_values=None,
    n: int | None = None,
) -> list[SweepRow]:
    """Equilibrium residual and spectral abscissa over a parameter grid.

    Families: four_vortex (grid a x gamma, kappa solved per point),
    vortex_crystal (grid a x kappa x gamma, n ring+pole count), and
    polar_pair (grid over gamma; a and kappa columns are written as 0).
    Rows are emitted in deterministic grid order; per-row failures are
    recorded in the row's error field and the sweep continues.
    """
    family = family.replace("-", "_")
    if family not in SWEEP_FAMILIES:
        raise ConfigError(
            f"unknown sweep family {family!r}; expected one of {SWEEP_FAMILIES}"
        )
    gamma_values = [float(g) for g in gamma_values]
    if not gamma_values:
        raise ConfigError("sweep needs at least one gamma value")

    rows: list[SweepRow] = []
    if family == "polar_pair":
        for g in gamma_values:
            rows.append(
                _sweep_row(family, 2, 0.0, 0.0, g, lambda g=g: polar_pair(1.0, g))
            )
        return rows

    a_values = [float(a) for a in a_values]
    if not a_values:
        raise ConfigError("sweep needs at least one a value")

    if family == "four_vortex":
        for a in a_values:
            for g in gamma_values:
                rows.append(
                    _sweep_row(
                        family, 4, a, math.nan, g,
                        lambda a=a, g=g: four_vortex(a, g),
                    )
                )
        return rows

    if kappa_values is None or not list(kappa_values):
        raise ConfigError("vortex_crystal sweep needs kappa values")
    kappa_values = [float(k) for k in kappa_values]
    if n is None:
        raise ConfigError("vortex_crystal sweep needs the vortex count n")
    for a in a_values:
        for kap in kappa_values:
            for g in gamma_values:
                rows.append(
                    _sweep_row(
                        family, int(n), a, kap, g,
                        lambda a=a, kap=kap, g=g: vortex_crystal(int(n), a, kap, g),
                    )
                )
    return rows


# --- Monte Carlo collision statistics ---


@dataclass
class CollisionStats:
    """Collision fractions per eps with binomial standard errors."""

    eps_grid: tuple[float, ...]
    trials: int
    tau: float
    dt: float
    gamma: float
    strengths: np.ndarray
    fractions: np.ndarray
    stderrs: np.ndarray
    collided: np.ndarray  # (len(eps_grid), trials) bool
    master_seed: int


def _batch_reg_rhs(S: np.ndarray, s: np.ndarray, gamma: float, eps: float) -> np.ndarray:
    """Regularized velocities for a batch of independent configurations."""
    diff = S[:, :, None, :] - S[:, None, :, :]
    d2 = np.einsum("bijc,bijc->bij", diff, diff)
    n = S.shape[1]
    d2[:, np.arange(n), np.arange(n)] = np.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        w_far = s[None, None, :] / (TWO_PI * d2)
        w_near = s[None, None, :] / (TWO_PI * eps * np.sqrt(d2))
    W = np.where(d2 >= eps * eps, w_far, w_near)
    W[d2 < DIST_FLOOR * DIST_FLOOR] = 0.0
    V = np.cross(S, np.einsum("bij,bjk->bik", W, S))
    if gamma != 0.0:
        V += gamma * np.cross(E3, S)
    return V


def _batch_min_d2(S: np.ndarray) -> np.ndarray:
    diff = S[:, :, None, :] - S[:, None, :, :]
    d2 = np.einsum("bijc,bijc->bij", diff, diff)
    n = S.shape[1]
    d2[:, np.arange(n), np.arange(n)] = np.inf
    return d2.min(axis=(1, 2))


def _batch_rk4_step(S: np.ndarray, dt: float, f) -> np.ndarray:
    k1 = f(S)
    k2 = f(_renormalized(S + (0.5 * dt) * k1))
    k3 = f(_renormalized(S + (0.5 * dt) * k2))
    k4 = f(_renormalized(S + dt * k3))
    return _renormalized(S + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def montecarlo_collisions(
    N: int,
    strengths,
    gamma: float,
    eps_grid,
    tau: float,
    trials: int,
    dt: float,
    master_seed: int = 0,
) -> CollisionStats:
    """Fraction of uniform random configurations that eps-collide by tau.

    For every (eps, trial) pair, N starting points are drawn i.i.d.
    uniform on the sphere from substream(master_seed, eps_index, trial),
    the regularized dynamics at that eps is integrated to tau, and the
    trial counts as collided when the minimum pairwise distance reaches
    eps at any sample (t = 0 included).
    """
    N = int(N)
    if N < 2:
        raise ConfigError(f"N must be >= 2, got {N}")
    s = np.asarray(strengths, dtype=float).reshape(-1)
    if s.shape[0] != N:
        raise ConfigError(f"got {s.shape[0]} strengths for N={N}")
    if not np.all(np.isfinite(s)):
        raise ConfigError("strengths contain non-finite entries")
    if abs(math.fsum(s.tolist())) > 1e-12:
        raise ConfigError(f"strengths must satisfy the Gauss constraint, sum={math.fsum(s.tolist()):.3e}")
    eps_grid = tuple(float(e) for e in eps_grid)
    if not eps_grid:
        raise ConfigError("eps_grid must be nonempty")
    if any(not 0.0 < e < 2.0 for e in eps_grid):
        raise ConfigError("every eps must lie in (0, 2)")
    if any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ConfigError("eps_grid must be strictly decreasing")
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    if dt <= 0.0 or tau <= 0.0:
        raise ConfigError("dt and tau must be positive")

    n_full, remainder = _step_schedule(dt, tau)
    collided = np.zeros((len(eps_grid), trials), dtype=bool)
    for e, eps in enumerate(eps_grid):
        S = np.empty((trials, N, 3))
        for t in range(trials):
            rng = substream(master_seed, e, t)
            S[t] = [sample_uniform(rng) for _ in range(N)]
        hit = _batch_min_d2(S) <= eps * eps
        f = lambda P: _batch_reg_rhs(P, s, gamma, eps)
        for _ in range(n_full):
            S = _batch_rk4_step(S, dt, f)
            hit |= _batch_min_d2(S) <= eps * eps
        if remainder > 0.0:
            S = _batch_rk4_step(S, remainder, f)
            hit |= _batch_min_d2(S) <= eps * eps
        collided[e] = hit

    fractions = collided.mean(axis=1)
    stderrs = np.sqrt(fractions * (1.0 - fractions) / trials)
    return CollisionStats(
        eps_grid=eps_grid,
        trials=trials,
        tau=tau,
        dt=dt,
        gamma=float(gamma),
        strengths=s,
        fractions=fractions,
        stderrs=stderrs,
        collided=collided,
        master_seed=int(master_seed),
    )


# --- Vortex blob clouds ---


@dataclass
class BlobCloud:
    """Particle discretization of point vortices: one cap-shaped blob each.

    Particles are stored blob-contiguously; blob ids are 1-based to match
    the file schema.
    """

    positions: np.ndarray     # (N*m, 3)
    circulations: np.ndarray  # (N*m,)
    blob_ids: np.ndarray      # (N*m,) ints in 1..N
    eps: float
    beta: float
    reference: VortexConfig
    particles_per_blob: int


@dataclass
class MomentReport:
    """Blob diagnostics sampled at diagnostic times.

    Arrays are indexed (time, blob).  exit_time is the first diagnostic
    time at which any particle of blob i left the ball of radius
    eps^beta around the reference trajectory point x_i(t), or None.
    """

    times: np.ndarray
    centers: np.ndarray                    # (D, N, 3)
    second_moment: np.ndarray              # (D, N)
    higher_moments: dict[int, np.ndarray]  # order n -> (D, N)
    support_radius: np.ndarray             # (D, N)
    mass_outside: dict[float, np.ndarray]  # radius -> (D, N)
    exit_time: float | None
    exit_blob: int | None
    exit_radius: float
    eps: float
    beta: float
    underflow_events: int


def blob_initialize(
    reference: VortexConfig,
    eps: float,
    particles_per_blob: int,
    beta: float,
    rng: np.random.Generator,
) -> BlobCloud:
    """m particles of circulation Gamma_i/m uniform on each cap C(x_i, eps).

    The caps must be pairwise disjoint (geodesic test) and every
    reference vortex must have nonzero strength.
    """
    m = int(particles_per_blob)
    if m < 1:
        raise ConfigError(f"particles_per_blob must be >= 1, got {m}")
    if not 0.0 < eps < 2.0:
        raise ConfigError(f"eps must lie in (0, 2), got {eps}")
    if not 0.0 < beta < 1.0:
        raise ConfigError(f"beta must lie in (0, 1), got {beta}")
    if np.any(reference.strengths == 0.0):
        raise ConfigError("every blob needs a nonzero reference strength")

    pts = reference.points
    cap_geo = 2.0 * math.asin(min(1.0, eps / 2.0))
    for i in range(reference.n):
        for j in range(i + 1, reference.n):
            gap = float(np.linalg.norm(pts[i] - pts[j]))
            geo = 2.0 * math.asin(min(1.0, gap / 2.0))
            if geo <= 2.0 * cap_geo:
                raise OverlappingCaps(
                    f"caps of radius eps={eps} around vortices {i} and {j} intersect"
                )

    n = reference.n
    positions = np.empty((n * m, 3))
    circulations = np.empty(n * m)
    blob_ids = np.empty(n * m, dtype=int)
    for i in range(n):
        sl = slice(i * m, (i + 1) * m)
        positions[sl] = [sample_cap(pts[i], eps, rng) for _ in range(m)]
        circulations[sl] = reference.strengths[i] / m
        blob_ids[sl] = i + 1
    return BlobCloud(
        positions=positions,
        circulations=circulations,
        blob_ids=blob_ids,
        eps=float(eps),
        beta=float(beta),
        reference=reference.copy(),
        particles_per_blob=m,
    )


def _cloud_rhs(P: np.ndarray, circ: np.ndarray, gamma: float, events: list) -> np.ndarray:
    """Exact-kernel particle velocities; below-floor pair terms dropped.

    Hot loop of the blob runs: the weight matrix is built in place on
    the Gram buffer and the cross product is unrolled, which roughly
    halves the cost of a step at a few hundred particles.
    """
    d2 = P @ P.T
    d2 *= -2.0
    d2 += 2.0
    np.fill_diagonal(d2, np.inf)
    if float(d2.min()) < DIST_FLOOR * DIST_FLOOR:
        np.maximum(d2, 0.0, out=d2)
        drop = d2 < DIST_FLOOR * DIST_FLOOR
        events[0] += int(np.count_nonzero(drop))
        d2[drop] = np.inf
    np.divide(1.0, d2, out=d2)
    d2 *= circ[None, :] / TWO_PI
    Q = d2 @ P
    V = np.empty_like(P)
    p0, p1, p2 = P[:, 0], P[:, 1], P[:, 2]
    q0, q1, q2 = Q[:, 0], Q[:, 1], Q[:, 2]
    V[:, 0] = p1 * q2 - p2 * q1
    V[:, 1] = p2 * q0 - p0 * q2
    V[:, 2] = p0 * q1 - p1 * q0
    if gamma != 0.0:
        # rotation term gamma e3 ^ x = gamma (-y, x, 0)
        V[:, 0] -= gamma * p1
        V[:, 1] += gamma * p0
    return V


def _blob_moments(
    positions: np.ndarray,
    circulations: np.ndarray,
    blob_slices: list[slice],
    strengths: np.ndarray,
    moment_orders: tuple[int, ...],
    outside_radii: tuple[float, ...],
):
    """Per-blob center, moments, support radius, and outside-mass fractions.

    The center uses compensated summation so its value does not depend on
    particle ordering.
    """
    nblob = len(blob_slices)
    centers = np.empty((nblob, 3))
    second = np.empty(nblob)
    higher = {n: np.empty(nblob) for n in moment_orders}
    radius = np.empty(nblob)
    outside = {r: np.empty(nblob) for r in outside_radii}
    for i, sl in enumerate(blob_slices):
        g = circulations[sl]
        p = positions[sl]
        G_i = strengths[i]
        centers[i] = [
            math.fsum((g * p[:, c]).tolist()) / G_i for c in range(3)
        ]
        dv = p - centers[i]
        r2 = np.einsum("pc,pc->p", dv, dv)
        r = np.sqrt(r2)
        second[i] = math.fsum((g * r2).tolist()) / G_i
        for nn in moment_orders:
            higher[nn][i] = math.fsum((g * r2 ** (2 * nn)).tolist()) / G_i
        radius[i] = float(np.max(r)) if r.size else 0.0
        for rad in outside_radii:
            outside[rad][i] = math.fsum((g[r > rad]).tolist()) / G_i
    return centers, second, higher, radius, outside


def blob_evolve(
    cloud: BlobCloud,
    dt: float,
    t_end: float,
    diagnostic_times=None,
    moment_orders: tuple[int, ...] = (1, 2, 3),
    outside_radii: tuple[float, ...] = (),
    stop_on_exit: bool = False,
) -> MomentReport:
    """Evolve all particles under the exact kernel and sample diagnostics.

    The reference point-vortex trajectory is integrated alongside;
    diagnostics default to every 10th step (plus start and end).  The
    exit time compares blob supports against balls of radius eps^beta
    around the reference points; with stop_on_exit the run ends at the
    first exit instead of continuing to t_end.
    """
    if dt <= 0.0 or t_end < 0.0:
        raise ConfigError("dt must be positive and t_end nonnegative")
    n_full, remainder = _step_schedule(dt, t_end)
    n_samples = n_full + (1 if remainder > 0.0 else 0)

    # Step indices at which diagnostics run.
    if diagnostic_times is None:
        diag = set(range(0, n_full + 1, 10))
    else:
        diag = set()
        for t in diagnostic_times:
            if not 0.0 <= t <= t_end + 1e-12:
                raise ConfigError(f"diagnostic time {t} outside [0, t_end]")
            diag.add(min(n_samples, int(round(t / dt))))
    diag |= {0, n_samples}

    ref = integrate(cloud.reference, dt, t_end, record_every=1)
    if ref.aborted:
        raise ConfigError(
            f"reference trajectory aborted at t={ref.abort_time}: {ref.abort_reason}"
        )

    nblob = cloud.reference.n
    m = cloud.particles_per_blob
    blob_slices = [slice(i * m, (i + 1) * m) for i in range(nblob)]
    exit_radius = cloud.eps ** cloud.beta
    events = [0]
    f = lambda P: _cloud_rhs(P, cloud.circulations, cloud.reference.gamma, events)

    times: list[float] = []
    centers: list[np.ndarray] = []
    second: list[np.ndarray] = []
    higher: dict[int, list] = {n: [] for n in moment_orders}
    radius: list[np.ndarray] = []
    outside: dict[float, list] = {r: [] for r in outside_radii}
    exit_time: float | None = None
    exit_blob: int | None = None

    P = cloud.positions.copy()

    def diagnose(k: int, t: float) -> bool:
        nonlocal exit_time, exit_blob
        c, s2, hi, rad, out = _blob_moments(
            P, cloud.circulations, blob_slices, cloud.reference.strengths,
            tuple(moment_orders), tuple(outside_radii),
        )
        times.append(t)
        centers.append(c)
        second.append(s2)
        for nn in moment_orders:
            higher[nn].append(hi[nn])
        radius.append(rad)
        for rr in outside_radii:
            outside[rr].append(out[rr])
        if exit_time is None:
            xref = ref.states[k]
            for i, sl in enumerate(blob_slices):
                gap = np.linalg.norm(P[sl] - xref[i], axis=1)
                if float(np.max(gap)) > exit_radius:
                    exit_time = t
                    exit_blob = i + 1
                    break
        return exit_time is not None

    exited = diagnose(0, 0.0)
    if not (stop_on_exit and exited):
        for k in range(1, n_full + 1):
            P = _rk4_cloud_step(P, dt, f)
            if k in diag:
                exited = diagnose(k, k * dt)
                if stop_on_exit and exited:
                    break
        else:
            if remainder > 0.0:
                P = _rk4_cloud_step(P, remainder, f)
                diagnose(n_samples, t_end)

    hi_arr = {n: np.array(v) for n, v in higher.items()}
    out_arr = {r: np.array(v) for r, v in outside.items()}
    return MomentReport(
        times=np.array(times),
        centers=np.array(centers),
        second_moment=np.array(second),
        higher_moments=hi_arr,
        support_radius=np.array(radius),
        mass_outside=out_arr,
        exit_time=exit_time,
        exit_blob=exit_blob,
        exit_radius=exit_radius,
        eps=cloud.eps,
        beta=cloud.beta,
        underflow_events=events[0],
    )


def _rk4_cloud_step(P: np.ndarray, dt: float, f) -> np.ndarray:
    k1 = f(P)
    k2 = f(_renormalized(P + (0.5 * dt) * k1))
    k3 = f(_renormalized(P + (0.5 * dt) * k2))
    k4 = f(_renormalized(P + dt * k3))
    return _renormalized(P + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
