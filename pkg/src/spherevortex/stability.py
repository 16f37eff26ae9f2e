"""Linearization of the vortex field and spectral stability checks.

The differential is assembled per vortex pair in ambient coordinates and
expressed in a chosen orthonormal tangent basis at every vortex, giving a
2N x 2N real matrix whose spectrum decides linear stability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import DIST_FLOOR, TWO_PI, VortexConfig
from .errors import ConfigError, DistanceUnderflow, NoConvergence
from .sphere import E3, TangentBasis, project_tangent, tangent_basis

# Matrix of h -> x ^ h restricted to T_x, in any direct orthonormal basis.
J2 = np.array([[0.0, -1.0], [1.0, 0.0]])

# Certified spectra keep ||A v - lambda v|| below this times ||A||.
EIG_TOL = 1e-9


# --- Kernel differentials ---


def _checked_gap(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    d2 = float(diff @ diff)
    if d2 < DIST_FLOOR * DIST_FLOOR:
        raise DistanceUnderflow(math.sqrt(d2))
    return diff, d2


def d1k(x: np.ndarray, y: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Derivative of the velocity kernel in its first argument, along h.

    Returns h^y/|x-y|^2 - 2(h.(x-y)) x^y/|x-y|^4 for ambient h.
    """
    diff, d2 = _checked_gap(x, y)
    h = np.asarray(h, dtype=float)
    return np.cross(h, y) / d2 - (2.0 * (h @ diff) / (d2 * d2)) * np.cross(x, y)


def d2k(x: np.ndarray, y: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Derivative of the velocity kernel in its second argument, along k.

    Returns x^k/|x-y|^2 + 2(k.(x-y)) x^y/|x-y|^4 for ambient k.
    """
    diff, d2 = _checked_gap(x, y)
    k = np.asarray(k, dtype=float)
    return np.cross(x, k) / d2 + (2.0 * (k @ diff) / (d2 * d2)) * np.cross(x, y)


# --- Jacobian in tangent coordinates ---


@dataclass
class TangentMap:
    """Differential of the vortex field in per-vortex tangent bases."""

    bases: list[TangentBasis]
    blocks: np.ndarray     # (N, N, 2, 2)
    assembled: np.ndarray  # (2N, 2N)


def _validate_bases(cfg: VortexConfig, bases: list[TangentBasis]) -> None:
    if len(bases) != cfg.n:
        raise ConfigError(f"got {len(bases)} bases for {cfg.n} vortices")
    for i, b in enumerate(bases):
        x = cfg.points[i]
        if not np.allclose(b.base, x, rtol=0.0, atol=1e-12):
            raise ConfigError(f"basis {i} is anchored off its vortex")
        gram_err = max(
            abs(float(b.b1 @ b.b1) - 1.0),
            abs(float(b.b2 @ b.b2) - 1.0),
            abs(float(b.b1 @ b.b2)),
            abs(float(b.b1 @ x)),
            abs(float(b.b2 @ x)),
        )
        if gram_err > 1e-10:
            raise ConfigError(f"basis {i} is not orthonormal tangent (err {gram_err:.3e})")


def jacobian(cfg: VortexConfig, bases: list[TangentBasis] | None = None) -> TangentMap:
    """Differential of the vortex field, as 2x2 blocks between tangent planes.

    Block (i, j) is the map T_{x_j} -> T_{x_i} obtained by differentiating
    vortex i's velocity in vortex j's position and projecting onto T_{x_i},
    written in the given (default canonical) orthonormal tangent bases.
    The diagonal block also carries the rotation term gamma (e3.x_i) J.
    """
    if bases is None:
        bases = [tangent_basis(x) for x in cfg.points]
    else:
        _validate_bases(cfg, bases)

    n = cfg.n
    pts = cfg.points
    s = cfg.strengths
    blocks = np.zeros((n, n, 2, 2))
    for i in range(n):
        xi = pts[i]
        bi = bases[i]
        for col, h in enumerate((bi.b1, bi.b2)):
            amb = cfg.gamma * np.cross(E3, h)
            for k in range(n):
                if k != i:
                    amb = amb + (s[k] / TWO_PI) * d1k(xi, pts[k], h)
            blocks[i, i, :, col] = bi.coords(project_tangent(xi, amb))
        for j in range(n):
            if j == i:
                continue
            bj = bases[j]
            for col, k_vec in enumerate((bj.b1, bj.b2)):
                amb = (s[j] / TWO_PI) * d2k(xi, pts[j], k_vec)
                blocks[i, j, :, col] = bi.coords(project_tangent(xi, amb))

    assembled = blocks.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)
    return TangentMap(bases=list(bases), blocks=blocks, assembled=assembled)


# --- Spectra ---


@dataclass
class SpectrumReport:
    """Eigenvalues sorted by (Re desc, Im desc) with residual certificates."""

    eigenvalues: np.ndarray  # complex
    residuals: np.ndarray
    max_real_part: float
    matrix_norm: float


def spectrum(matrix: np.ndarray, eig_tol: float = EIG_TOL) -> SpectrumReport:
    """Certified dense spectrum of a small real matrix.

    Every eigenpair must satisfy ||A v - lambda v|| <= eig_tol * ||A||;
    a pair that does not (or an eigensolver breakdown) raises
    NoConvergence.
    """
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ConfigError(f"matrix must be square, got shape {A.shape}")
    if A.shape[0] > 64:
        raise ConfigError(f"dimension {A.shape[0]} exceeds the supported 64")
    if not np.all(np.isfinite(A)):
        raise ConfigError("matrix contains non-finite entries")

    try:
        vals, vecs = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigensolver failed: {exc}") from None

    norm = float(np.linalg.norm(A, 2))
    rnorm = norm if norm > 0.0 else 1.0
    residuals = np.linalg.norm(A @ vecs - vecs * vals[None, :], axis=0)
    residuals = residuals / np.linalg.norm(vecs, axis=0)
    if np.any(residuals > eig_tol * rnorm):
        worst = float(np.max(residuals))
        raise NoConvergence(
            f"eigenpair residual {worst:.3e} exceeds {eig_tol:.1e} * ||A||"
        )

    order = np.lexsort((-vals.imag, -vals.real))
    vals = vals[order]
    residuals = residuals[order]
    return SpectrumReport(
        eigenvalues=vals,
        residuals=residuals,
        max_real_part=float(np.max(vals.real)),
        matrix_norm=norm,
    )


def char_poly_check(
    cfg: VortexConfig, lambdas
) -> list[tuple[float, float]]:
    """det(lambda I - A) from an LU factorization vs the closed form.

    The closed form
        (1/512 pi^2) lambda^2 (4 lambda^2 + 1)
        (128 pi^2 lambda^4 + (32 + 8 pi^2) lambda^2 + 3)
    is specific to the four-vortex configuration with a = 1, gamma = 1/2
    and unit strength scale; pass that configuration.
    """
    A = jacobian(cfg).assembled
    dim = A.shape[0]
    out: list[tuple[float, float]] = []
    for lam in np.asarray(lambdas, dtype=float).reshape(-1):
        if not math.isfinite(lam):
            raise ConfigError("lambda values must be finite")
        det = float(np.linalg.det(lam * np.eye(dim) - A))
        l2 = lam * lam
        formula = (
            l2
            * (4.0 * l2 + 1.0)
            * (128.0 * math.pi**2 * l2 * l2 + (32.0 + 8.0 * math.pi**2) * l2 + 3.0)
            / (512.0 * math.pi**2)
        )
        out.append((det, formula))
    return out


# --- Stability criteria ---


def check_supstable(cfg: VortexConfig, tol: float = 1e-12) -> tuple[bool, np.ndarray]:
    """Residuals of the zero-quadratic-form stationarity hypothesis.

    For each vortex i the ambient 3x3 matrix sum_{j != i} Gamma_j
    D1K(x_i, x_j) must have vanishing quadratic form, equivalently a zero
    symmetric part; the residual is that part's Frobenius norm.

    Returns:
        (all residuals <= tol, per-vortex residual array).
    """
    n = cfg.n
    residuals = np.empty(n)
    eye = np.eye(3)
    for i in range(n):
        M = np.zeros((3, 3))
        for j in range(n):
            if j == i:
                continue
            cols = [cfg.strengths[j] * d1k(cfg.points[i], cfg.points[j], e) for e in eye]
            M += np.column_stack(cols)
        sym = 0.5 * (M + M.T)
        residuals[i] = float(np.linalg.norm(sym, "fro"))
    return bool(np.all(residuals <= tol)), residuals


def check_dissipative(tmap: TangentMap, tol: float = 1e-12) -> tuple[bool, float]:
    """Largest eigenvalue of the symmetrized differential; passes iff <= tol."""
    A = tmap.assembled
    sym = 0.5 * (A + A.T)
    top = float(np.max(np.linalg.eigvalsh(sym)))
    return top <= tol, top


def relative_equilibrium_residual(cfg: VortexConfig) -> tuple[float, float]:
    """Best uniform rotation speed Omega and the RMS defect of the fit.

    A configuration rotates rigidly at Omega iff
    (Omega - gamma) e3 ^ x_i equals the interaction velocity of every
    vortex; Omega is fitted by least squares over all vortices.  When
    every point is on the axis the fit is degenerate: Omega = gamma is
    returned with the RMS stationarity defect as residual.
    """
    from .dynamics import _rhs_exact

    u = _rhs_exact(cfg.points, cfg.strengths, 0.0)  # interaction only
    a = np.cross(E3, cfg.points)
    denom = float(np.sum(a * a))
    if denom < 1e-20:
        omega_rel = 0.0
    else:
        omega_rel = float(np.sum(a * u)) / denom
    defect = omega_rel * a - u
    residual = math.sqrt(float(np.sum(defect * defect)) / cfg.n)
    return cfg.gamma + omega_rel, residual
