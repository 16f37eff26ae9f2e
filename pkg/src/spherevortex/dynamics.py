"""Point-vortex dynamics on the rotating sphere.

The exact vector field, its conserved quantities, fixed-step integration
with renormalization, the log-regularized dynamics, and epsilon-collision
detection.  Positions are (N, 3) arrays of unit rows; velocities are rows
tangent to the corresponding positions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DistanceUnderflow
from .sphere import E3, check_unit, pairwise_sq_distances

TWO_PI = 2.0 * math.pi

# Exact-kernel distance floor: closer pairs abort rather than silently
# regularize.  The regularized field instead drops the offending term.
DIST_FLOOR = 1e-14


# --- Configuration ---


@dataclass
class VortexConfig:
    """N sphere points with circulations and a planet rotation rate.

    The Gauss constraint sum(strengths) = 0 is enforced to gauss_tol when
    strict_gauss is set (the default); otherwise the sum is recorded and a
    warning is emitted if it is violated.  Zero strengths are accepted (a
    zero-circulation vortex is advected but induces nothing).
    """

    points: np.ndarray
    strengths: np.ndarray
    gamma: float = 0.0
    strict_gauss: bool = True
    gauss_tol: float = 1e-12

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ConfigError(f"points must have shape (N, 3), got {pts.shape}")
        if pts.shape[0] < 2:
            raise ConfigError("a configuration needs at least 2 vortices")
        if not np.all(np.isfinite(pts)):
            raise ConfigError("points contain non-finite entries")
        self.points = check_unit(pts)

        s = np.asarray(self.strengths, dtype=float).reshape(-1)
        if s.shape[0] != pts.shape[0]:
            raise ConfigError(
                f"got {s.shape[0]} strengths for {pts.shape[0]} points"
            )
        if not np.all(np.isfinite(s)):
            raise ConfigError("strengths contain non-finite entries")
        self.strengths = s

        if not math.isfinite(self.gamma):
            raise ConfigError("gamma must be finite")
        self.gamma = float(self.gamma)

        d2 = pairwise_sq_distances(self.points)
        np.fill_diagonal(d2, np.inf)
        if np.min(d2) <= 0.0:
            i, j = divmod(int(np.argmin(d2)), d2.shape[1])
            raise ConfigError(f"points {i} and {j} coincide")

        g = self.gauss_sum
        if abs(g) > self.gauss_tol:
            if self.strict_gauss:
                raise ConfigError(
                    f"Gauss constraint violated: sum of strengths is {g:.3e}"
                )
            warnings.warn(
                f"sum of strengths is {g:.3e}; running unconstrained",
                stacklevel=2,
            )

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def gauss_sum(self) -> float:
        return math.fsum(self.strengths.tolist())

    def copy(self) -> "VortexConfig":
        return VortexConfig(
            points=self.points.copy(),
            strengths=self.strengths.copy(),
            gamma=self.gamma,
            strict_gauss=self.strict_gauss,
            gauss_tol=self.gauss_tol,
        )


# --- Kernel and vector fields ---


def biot_savart_kernel(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Velocity kernel (x ^ y) / |x - y|^2; orthogonal to x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d2 = float(np.sum((x - y) ** 2))
    if d2 < DIST_FLOOR * DIST_FLOOR:
        raise DistanceUnderflow(math.sqrt(d2))
    return np.cross(x, y) / d2


def _interaction_weights(points: np.ndarray, strengths: np.ndarray) -> np.ndarray:
    """W[i, j] = Gamma_j / (2 pi |x_i - x_j|^2), zero diagonal.

    Raises DistanceUnderflow on any off-diagonal pair below the floor.
    """
    d2 = pairwise_sq_distances(points)
    np.fill_diagonal(d2, np.inf)
    m = float(np.min(d2))
    if m < DIST_FLOOR * DIST_FLOOR:
        i, j = divmod(int(np.argmin(d2)), d2.shape[1])
        raise DistanceUnderflow(math.sqrt(m), (i, j))
    return strengths[None, :] / (TWO_PI * d2)


def vortex_rhs(cfg: VortexConfig) -> np.ndarray:
    """Velocities of all vortices under the exact dynamics.

    Row i is sum_{j != i} Gamma_j/(2 pi) (x_i ^ x_j)/|x_i - x_j|^2
    + gamma e3 ^ x_i, tangent to x_i.
    """
    return _rhs_exact(cfg.points, cfg.strengths, cfg.gamma)


def _rhs_exact(points: np.ndarray, strengths: np.ndarray, gamma: float) -> np.ndarray:
    W = _interaction_weights(points, strengths)
    # sum_j W_ij (x_i ^ x_j) = x_i ^ (W x)_i by bilinearity of the wedge
    v = np.cross(points, W @ points)
    if gamma != 0.0:
        v += gamma * np.cross(E3, points)
    return v


def _energy_moment(
    points: np.ndarray, strengths: np.ndarray, gamma: float, floor_check: bool
) -> tuple[float, float]:
    d2 = pairwise_sq_distances(points)
    iu, ju = np.triu_indices(points.shape[0], k=1)
    pair_d2 = d2[iu, ju]
    if floor_check and np.min(pair_d2) < DIST_FLOOR * DIST_FLOOR:
        k = int(np.argmin(pair_d2))
        raise DistanceUnderflow(math.sqrt(float(pair_d2[k])), (int(iu[k]), int(ju[k])))
    with np.errstate(divide="ignore"):
        terms = strengths[iu] * strengths[ju] * 0.5 * np.log(pair_d2) / TWO_PI
    m3 = math.fsum((strengths * points[:, 2]).tolist())
    return math.fsum(terms.tolist()) + gamma * m3, m3


def hamiltonian(cfg: VortexConfig) -> float:
    """Conserved energy: pair term sum_{i<j} Gamma_i Gamma_j ln|x_i-x_j| / (2 pi)
    plus the rotation term gamma e3 . sum Gamma_i x_i."""
    H, _ = _energy_moment(cfg.points, cfg.strengths, cfg.gamma, floor_check=True)
    return H


def vertical_moment(cfg: VortexConfig) -> float:
    """e3 . sum_i Gamma_i x_i, conserved along trajectories."""
    return math.fsum((cfg.strengths * cfg.points[:, 2]).tolist())


def weighted_centroid(cfg: VortexConfig) -> np.ndarray:
    """sum_i Gamma_i x_i; the full vector is conserved when gamma = 0."""
    return np.array(
        [math.fsum((cfg.strengths * cfg.points[:, c]).tolist()) for c in range(3)]
    )


# --- Regularized dynamics ---


def regularized_log(r, eps: float):
    """Smoothed logarithm ln_eps and its derivative.

    ln_eps(r) = ln r for r >= eps and ln(eps) - (1 - r/eps) below (a C^1
    blend).  It is non-decreasing, satisfies |ln_eps(r)| <= |ln r| for
    r > 0 and ln_eps'(r) <= 1/r.  Accepts scalars or arrays.

    Returns:
        (value, derivative), shaped like r.
    """
    if not 0.0 < eps < 1.0:
        raise ConfigError(f"eps must lie in (0, 1), got {eps}")
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0.0):
        raise ConfigError("distances must be non-negative")
    below = arr < eps
    safe = np.where(below, eps, arr)
    value = np.where(below, math.log(eps) - (1.0 - arr / eps), np.log(safe))
    deriv = np.where(below, 1.0 / eps, 1.0 / safe)
    if np.isscalar(r) or arr.ndim == 0:
        return float(value), float(deriv)
    return value, deriv


def _reg_weights(points: np.ndarray, strengths: np.ndarray, eps: float) -> np.ndarray:
    """W[i, j] = Gamma_j/(2 pi) ln_eps'(d_ij)/d_ij, zero diagonal.

    Matches the exact weights bit for bit where d >= eps (same expression,
    same evaluation order); pairs below the distance floor contribute zero
    instead of raising.
    """
    d2 = pairwise_sq_distances(points)
    np.fill_diagonal(d2, np.inf)
    S = np.broadcast_to(strengths[None, :], d2.shape)
    w = np.zeros_like(d2)
    far = d2 >= eps * eps
    w[far] = S[far] / (TWO_PI * d2[far])
    near = ~far
    d_near = np.sqrt(d2[near])
    with np.errstate(divide="ignore", invalid="ignore"):
        w[near] = S[near] / (TWO_PI * eps * d_near)
    dropped = d2 < DIST_FLOOR * DIST_FLOOR
    if np.any(dropped):
        w[dropped] = 0.0
    return w


def regularized_rhs(cfg: VortexConfig, eps: float) -> np.ndarray:
    """Velocities under the log-regularized dynamics.

    Row i is sum_{j != i} Gamma_j/(2 pi) ln_eps'(d_ij) (x_i ^ x_j)/d_ij
    + gamma e3 ^ x_i; globally bounded by sum|Gamma_j|/(2 pi eps) + |gamma|
    and identical to the exact field while all distances stay >= eps.
    """
    if not 0.0 < eps < 1.0:
        raise ConfigError(f"eps must lie in (0, 1), got {eps}")
    return _rhs_regularized(cfg.points, cfg.strengths, cfg.gamma, eps)


def _rhs_regularized(
    points: np.ndarray, strengths: np.ndarray, gamma: float, eps: float
) -> np.ndarray:
    W = _reg_weights(points, strengths, eps)
    v = np.cross(points, W @ points)
    if gamma != 0.0:
        v += gamma * np.cross(E3, points)
    return v


def phi_eps(cfg: VortexConfig, eps: float, eta: float) -> float:
    """Collision indicator sum_{i != j} exp(-eta ln_eps(|x_i - x_j|))."""
    if not 0.0 < eta < 1.0:
        raise ConfigError(f"eta must lie in (0, 1), got {eta}")
    d2 = pairwise_sq_distances(cfg.points)
    iu, ju = np.triu_indices(cfg.n, k=1)
    d = np.sqrt(d2[iu, ju])
    value, _ = regularized_log(d, eps)
    return 2.0 * math.fsum(np.exp(-eta * value).tolist())


# --- Integration ---


@dataclass
class Trajectory:
    """Sampled integration output with per-sample invariants."""

    times: np.ndarray
    states: np.ndarray      # (T, N, 3)
    velocities: np.ndarray  # (T, N, 3)
    energy: np.ndarray      # (T,)
    moment: np.ndarray      # (T,)
    config: VortexConfig    # initial configuration
    dt: float
    eps: float | None = None
    aborted: bool = False
    abort_time: float | None = None
    abort_reason: str = ""

    @property
    def n_samples(self) -> int:
        return len(self.times)


def _renormalized(points: np.ndarray) -> np.ndarray:
    return points / np.linalg.norm(points, axis=-1, keepdims=True)


def _step_schedule(dt: float, t_end: float) -> tuple[int, float]:
    """Number of full dt steps and the final shorter step (0 if exact).

    The 1e-9 slop absorbs representation error when t_end is meant to be
    a whole number of steps.
    """
    n_full = int(math.floor(t_end / dt + 1e-9))
    remainder = t_end - n_full * dt
    if remainder < 1e-9 * dt:
        remainder = 0.0
    return n_full, remainder


def _rk4_step(X: np.ndarray, k1: np.ndarray, dt: float, f) -> np.ndarray:
    """One classical RK4 step with per-stage renormalization.

    k1 = f(X) is passed in (the caller already has it from recording or
    from the previous step's end).  Returns the renormalized end state.
    """
    k2 = f(_renormalized(X + (0.5 * dt) * k1))
    k3 = f(_renormalized(X + (0.5 * dt) * k2))
    k4 = f(_renormalized(X + dt * k3))
    return _renormalized(X + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def integrate(
    cfg: VortexConfig,
    dt: float,
    t_end: float,
    record_every: int = 1,
    eps: float | None = None,
) -> Trajectory:
    """Fixed-step RK4 on the sphere from t = 0 to t_end.

    Every stage and every step renormalizes each point.  Samples (state,
    velocity, energy, vertical moment) are recorded at step 0, every
    record_every-th step, and at t_end.  When t_end is not a whole number
    of steps, one shorter final step lands on it exactly.  With eps set,
    the regularized field is integrated instead of the exact one; the
    exact field aborts on DistanceUnderflow, flagging a partial
    trajectory that keeps the last valid state.
    """
    if dt <= 0.0 or not math.isfinite(dt):
        raise ConfigError(f"dt must be positive, got {dt}")
    if t_end < 0.0 or not math.isfinite(t_end):
        raise ConfigError(f"t_end must be non-negative, got {t_end}")
    if record_every < 1:
        raise ConfigError(f"record_every must be >= 1, got {record_every}")

    strengths = cfg.strengths
    gamma = cfg.gamma
    if eps is None:
        f = lambda P: _rhs_exact(P, strengths, gamma)
    else:
        if not 0.0 < eps < 1.0:
            raise ConfigError(f"eps must lie in (0, 1), got {eps}")
        f = lambda P: _rhs_regularized(P, strengths, gamma, eps)

    n_full, remainder = _step_schedule(dt, t_end)
    X = cfg.points.copy()

    times: list[float] = []
    states: list[np.ndarray] = []
    velocities: list[np.ndarray] = []
    energy: list[float] = []
    moment: list[float] = []
    aborted = False
    abort_time: float | None = None
    abort_reason = ""

    # The exact field enforces the distance floor in the energy too; the
    # regularized field never aborts, so its records tolerate any gap.
    floor_check = eps is None

    def record(t: float, P: np.ndarray, V: np.ndarray):
        H, M3 = _energy_moment(P, strengths, gamma, floor_check)
        times.append(t)
        states.append(P.copy())
        velocities.append(V.copy())
        energy.append(H)
        moment.append(M3)

    t_good = 0.0
    t_recorded = -1.0
    try:
        V = f(X)
        record(0.0, X, V)
        t_recorded = 0.0
        for k in range(1, n_full + 1):
            X_next = _rk4_step(X, V, dt, f)
            V_next = f(X_next)
            X, V, t_good = X_next, V_next, k * dt
            if k % record_every == 0 or (k == n_full and remainder == 0.0):
                record(t_good, X, V)
                t_recorded = t_good
        if remainder > 0.0:
            X = _rk4_step(X, V, remainder, f)
            V = f(X)
            t_good = t_end
            record(t_end, X, V)
            t_recorded = t_end
    except DistanceUnderflow as exc:
        aborted = True
        abort_reason = str(exc)
        # X, V still hold the last state whose field evaluation succeeded
        # (unless the very first evaluation failed and nothing was recorded).
        if 0.0 <= t_recorded < t_good:
            record(t_good, X, V)
        abort_time = t_good

    T = len(times)
    shape = (T, cfg.n, 3)
    return Trajectory(
        times=np.array(times),
        states=np.array(states).reshape(shape),
        velocities=np.array(velocities).reshape(shape),
        energy=np.array(energy),
        moment=np.array(moment),
        config=cfg.copy(),
        dt=dt,
        eps=eps,
        aborted=aborted,
        abort_time=abort_time,
        abort_reason=abort_reason,
    )


# --- Collision detection ---


@dataclass
class CollisionReport:
    """First time the minimum pairwise distance dips to eps, if it does."""

    eps: float
    first_collision_time: float | None
    colliding_pair: tuple[int, int] | None
    times: np.ndarray
    min_distance_series: np.ndarray


def min_distance_series(traj: Trajectory) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Per-sample minimum pairwise distance and the achieving pair."""
    mins = np.empty(traj.n_samples)
    pairs: list[tuple[int, int]] = []
    for k, state in enumerate(traj.states):
        d2 = pairwise_sq_distances(state)
        np.fill_diagonal(d2, np.inf)
        flat = int(np.argmin(d2))
        i, j = divmod(flat, d2.shape[1])
        mins[k] = math.sqrt(float(d2[i, j]))
        pairs.append((i, j))
    return mins, pairs


def first_eps_collision(traj: Trajectory, eps: float) -> CollisionReport:
    """Scan a trajectory for the first eps-collision.

    The crossing time is linearly interpolated between the last sample
    above eps and the first sample at or below it.
    """
    if traj.n_samples == 0:
        raise ConfigError("trajectory has no samples")
    mins, pairs = min_distance_series(traj)
    below = np.nonzero(mins <= eps)[0]
    if below.size == 0:
        return CollisionReport(eps, None, None, traj.times.copy(), mins)
    k = int(below[0])
    if k == 0:
        t_hit = float(traj.times[0])
    else:
        m0, m1 = float(mins[k - 1]), float(mins[k])
        t0, t1 = float(traj.times[k - 1]), float(traj.times[k])
        # m0 > eps >= m1; linear interpolation of the dip
        t_hit = t0 + (m0 - eps) / (m0 - m1) * (t1 - t0)
    return CollisionReport(eps, t_hit, pairs[k], traj.times.copy(), mins)
