"""Geometric primitives on the unit sphere embedded in R^3.

Points are plain numpy arrays of shape (3,) with unit Euclidean norm;
collections of points are arrays of shape (N, 3) with unit rows.  The
canonical metric is the chordal (ambient R^3) distance; the geodesic
distance is provided only as a conversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# |x|^2 may deviate from 1 by at most this much for a valid sphere point.
UNIT_NORM_TOL = 1e-12

# |x . e3| >= 1 - POLE_THRESHOLD selects the explicit pole branch of
# tangent_basis, keeping e3 ^ x safely away from zero on the other branch.
POLE_THRESHOLD = 1e-9

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


# --- Points and normalization ---


def normalize(v: np.ndarray) -> np.ndarray:
    """Return v / |v|.

    Args:
        v: 3-vector (or array of row vectors with shape (..., 3)).

    Raises:
        ConfigError: if any norm is too small to normalize reliably.
    """
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n < 1e-12) or not np.all(np.isfinite(n)):
        raise ConfigError("cannot normalize a (near-)zero or non-finite vector")
    return v / n


def check_unit(x: np.ndarray, tol: float = UNIT_NORM_TOL) -> np.ndarray:
    """Validate that x (shape (3,) or (N, 3)) has unit rows; returns x."""
    x = np.asarray(x, dtype=float)
    err = np.abs(np.sum(x * x, axis=-1) - 1.0)
    if np.any(err > tol):
        raise ConfigError(f"point is off the unit sphere by {float(np.max(err)):.3e} in |x|^2")
    return x


def chordal_distance(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(x, float) - np.asarray(y, float)))


def chordal_to_geodesic(r: float) -> float:
    """Geodesic (great-circle) distance for a chordal distance r in [0, 2]."""
    return 2.0 * math.asin(min(1.0, max(-1.0, r / 2.0)))


def geodesic_to_chordal(d: float) -> float:
    return 2.0 * math.sin(d / 2.0)


def pairwise_sq_distances(points: np.ndarray) -> np.ndarray:
    """All squared chordal distances |x_i - x_j|^2 as an (N, N) matrix."""
    points = np.asarray(points, dtype=float)
    diff = points[:, None, :] - points[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def min_pairwise_distance(points: np.ndarray) -> tuple[float, tuple[int, int]]:
    """Smallest chordal distance among distinct rows and the achieving pair."""
    d2 = pairwise_sq_distances(points)
    np.fill_diagonal(d2, np.inf)
    flat = int(np.argmin(d2))
    i, j = divmod(flat, d2.shape[1])
    return math.sqrt(float(d2[i, j])), (i, j)


# --- Rotations and projections ---


def rotation_z(theta: float) -> np.ndarray:
    """Direct rotation matrix of angle theta around the vertical axis."""
    if not math.isfinite(theta):
        raise ConfigError("rotation angle must be finite")
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def project_tangent(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Orthogonal projection of v onto the tangent plane at x: v - (x.v) x."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return v - np.dot(x, v) * x


# --- Tangent frames ---


@dataclass(frozen=True)
class TangentBasis:
    """Orthonormal pair (b1, b2) with (base, b1, b2) a direct triple."""

    base: np.ndarray
    b1: np.ndarray
    b2: np.ndarray

    def coords(self, v: np.ndarray) -> np.ndarray:
        """Coordinates of an ambient vector in (b1, b2) after tangent projection."""
        return np.array([np.dot(self.b1, v), np.dot(self.b2, v)])

    def from_coords(self, c) -> np.ndarray:
        return c[0] * self.b1 + c[1] * self.b2


def tangent_basis(x: np.ndarray) -> TangentBasis:
    """Deterministic direct orthonormal basis of the tangent plane at x.

    Away from the poles b1 is the normalized e3 ^ x and b2 = x ^ b1; at the
    poles the basis is pinned to (e1, e2) for e3 and (e1, -e2) for -e3 so the
    orientation invariant base . (b1 ^ b2) = +1 always holds.
    """
    x = check_unit(x)
    if abs(x[2]) >= 1.0 - POLE_THRESHOLD:
        if x[2] > 0.0:
            return TangentBasis(base=x, b1=E1.copy(), b2=E2.copy())
        return TangentBasis(base=x, b1=E1.copy(), b2=-E2)
    b1 = normalize(np.cross(E3, x))
    b2 = np.cross(x, b1)
    return TangentBasis(base=x, b1=b1, b2=b2)


# --- Caps ---


def cap_area(r: float) -> float:
    """Surface area of the spherical cap of chordal radius r: pi r^2."""
    if not 0.0 <= r <= 2.0:
        raise ConfigError(f"cap radius must lie in [0, 2], got {r}")
    return math.pi * r * r


def in_cap(points: np.ndarray, center: np.ndarray, r: float) -> np.ndarray:
    """Boolean mask of rows within chordal distance r of center."""
    points = np.asarray(points, dtype=float)
    d2 = np.sum((points - np.asarray(center, float)) ** 2, axis=-1)
    return d2 <= r * r


# --- Sampling ---


def sample_uniform(rng: np.random.Generator) -> np.ndarray:
    """One point uniform on the sphere: normalized standard-normal triple."""
    while True:
        v = rng.standard_normal(3)
        n = float(np.linalg.norm(v))
        if n >= 1e-6:
            return v / n


def sample_cap(center: np.ndarray, r: float, rng: np.random.Generator) -> np.ndarray:
    """One point uniform on the cap of chordal radius r around center.

    The height u = y . center of a uniform point is itself uniform, so the
    cap law is u ~ U[1 - r^2/2, 1] with an independent uniform azimuth.
    """
    if not 0.0 < r <= 2.0:
        raise ConfigError(f"cap radius must lie in (0, 2], got {r}")
    frame = tangent_basis(center)
    u = rng.uniform(1.0 - r * r / 2.0, 1.0)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    rho = math.sqrt(max(0.0, 1.0 - u * u))
    p = u * frame.base + rho * (math.cos(phi) * frame.b1 + math.sin(phi) * frame.b2)
    return normalize(p)


# --- Singular moment integral ---


def singular_moment_integral(alpha: float) -> float:
    """The integral of |N - y|^(-alpha) over the sphere, alpha in [0, 2).

    Closed form 2^(3-alpha) pi / (2 - alpha); the integral diverges for
    alpha >= 2.
    """
    if not 0.0 <= alpha < 2.0:
        raise ConfigError(f"moment exponent must lie in [0, 2), got {alpha}")
    return 2.0 ** (3.0 - alpha) * math.pi / (2.0 - alpha)
