"""Constructors for the stationary and rigidly rotating vortex families.

All constructors return VortexConfig instances that satisfy the Gauss
constraint exactly (strict mode on), so they can be integrated or
linearized directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import VortexConfig
from .errors import ConfigError
from .sphere import E3, normalize, rotation_z


# --- Polar pair ---


def polar_pair(Gamma: float, gamma: float = 0.0) -> VortexConfig:
    """Counter-rotating vortices of strength +-Gamma at the poles.

    Stationary for every (Gamma, gamma) pair.
    """
    if Gamma == 0.0 or not math.isfinite(Gamma):
        raise ConfigError("polar pair needs a nonzero finite strength")
    return VortexConfig(
        points=np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]),
        strengths=np.array([Gamma, -Gamma]),
        gamma=gamma,
    )


# --- Stationary four-vortex family ---


@dataclass(frozen=True)
class FourVortexParams:
    """Parameters of the two-poles-plus-ring stationary family.

    s, alpha_minus, alpha_plus and upsilon are the derived quantities of
    the pole-strength equation
        kappa (alpha_- + alpha_+) = -2 s upsilon - 2 alpha_+ + 2 pi gamma / Gamma.
    """

    a: float
    gamma: float
    Gamma: float
    kappa: float
    s: float
    alpha_minus: float
    alpha_plus: float
    upsilon: float


def four_vortex_params(a: float, gamma: float, Gamma: float = 1.0) -> FourVortexParams:
    """Solve the pole-strength equation for the ring parameter a."""
    if not 0.0 < a <= 1.0:
        raise ConfigError(f"ring parameter a must lie in (0, 1], got {a}")
    if Gamma == 0.0 or not math.isfinite(Gamma):
        raise ConfigError("ring strength Gamma must be nonzero and finite")
    if not math.isfinite(gamma):
        raise ConfigError("gamma must be finite")
    s = math.sqrt(max(0.0, 1.0 - a * a))
    alpha_minus = 1.0 / (2.0 * (1.0 - s))
    alpha_plus = 1.0 / (2.0 * (1.0 + s))
    upsilon = 1.0 / (4.0 * a * a)
    kappa = (-2.0 * s * upsilon - 2.0 * alpha_plus + 2.0 * math.pi * gamma / Gamma) / (
        alpha_minus + alpha_plus
    )
    return FourVortexParams(
        a=a,
        gamma=gamma,
        Gamma=Gamma,
        kappa=kappa,
        s=s,
        alpha_minus=alpha_minus,
        alpha_plus=alpha_plus,
        upsilon=upsilon,
    )


def kappa_stationary(a: float, gamma: float, Gamma: float = 1.0) -> float:
    """Unique pole-strength ratio making the four-vortex family stationary."""
    return four_vortex_params(a, gamma, Gamma).kappa


def four_vortex(a: float, gamma: float, Gamma: float = 1.0) -> VortexConfig:
    """Stationary configuration: poles (kappa, -(2+kappa)) plus a 2-ring.

    Points are (e3, -e3, (a, 0, s), (-a, 0, s)) with s = sqrt(1 - a^2);
    strengths are Gamma (kappa, -(2+kappa), 1, 1).
    """
    p = four_vortex_params(a, gamma, Gamma)
    points = np.array(
        [
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
            [a, 0.0, p.s],
            [-a, 0.0, p.s],
        ]
    )
    strengths = Gamma * np.array([p.kappa, -(2.0 + p.kappa), 1.0, 1.0])
    return VortexConfig(points=normalize(points), strengths=strengths, gamma=gamma)


# --- Rotating crystals ---


def vortex_crystal(N: int, a: float, kappa: float, gamma: float = 0.0) -> VortexConfig:
    """N-2 equal ring vortices plus poles (kappa, -(N-2)-kappa).

    Ring points sit at angle increments 2 pi/(N-2) on the circle of chord
    parameter a; the configuration is a relative equilibrium for every
    admissible (N, a, kappa).
    """
    if int(N) != N or N < 4:
        raise ConfigError(f"N must be an integer >= 4, got {N}")
    N = int(N)
    if not 0.0 < a < 1.0:
        raise ConfigError(f"ring parameter a must lie in (0, 1), got {a}")
    if not (math.isfinite(kappa) and math.isfinite(gamma)):
        raise ConfigError("kappa and gamma must be finite")
    s = math.sqrt(1.0 - a * a)
    seed = np.array([a, 0.0, s])
    ring = np.array(
        [rotation_z(2.0 * math.pi * i / (N - 2)) @ seed for i in range(N - 2)]
    )
    points = np.vstack([ring, E3, -E3])
    strengths = np.concatenate(
        [np.ones(N - 2), [kappa, -(N - 2.0) - kappa]]
    )
    return VortexConfig(points=normalize(points), strengths=strengths, gamma=gamma)


# --- Perturbations ---


def perturb(cfg: VortexConfig, delta: float, rng: np.random.Generator) -> VortexConfig:
    """Move every point <= delta (chordal) along a random tangent direction.

    Strengths and gamma are unchanged; the output is renormalized to the
    sphere, which can only shrink the displacement.
    """
    if delta < 0.0 or not math.isfinite(delta):
        raise ConfigError(f"delta must be >= 0, got {delta}")
    if delta == 0.0:
        return cfg.copy()
    moved = np.empty_like(cfg.points)
    for i, x in enumerate(cfg.points):
        raw = rng.standard_normal(3)
        t = raw - (raw @ x) * x
        tn = float(np.linalg.norm(t))
        while tn < 1e-12:  # resample a direction nearly parallel to x
            raw = rng.standard_normal(3)
            t = raw - (raw @ x) * x
            tn = float(np.linalg.norm(t))
        step = delta * rng.uniform(0.0, 1.0)
        moved[i] = x + (step / tn) * t
    return VortexConfig(
        points=normalize(moved),
        strengths=cfg.strengths.copy(),
        gamma=cfg.gamma,
        strict_gauss=cfg.strict_gauss,
        gauss_tol=cfg.gauss_tol,
    )
