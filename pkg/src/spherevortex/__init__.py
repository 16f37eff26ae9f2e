"""Point-vortex dynamics on the rotating unit sphere.

Exact and regularized velocity fields, a structure-aware RK4
integrator, equilibrium families with their linear stability spectra,
and the statistical experiments built on top of them: collision
fraction Monte Carlo and desingularized vortex-blob confinement runs.
"""

from .dynamics import (
    CollisionReport,
    Trajectory,
    VortexConfig,
    biot_savart_kernel,
    first_eps_collision,
    hamiltonian,
    integrate,
    min_distance_series,
    phi_eps,
    regularized_log,
    regularized_rhs,
    vertical_moment,
    vortex_rhs,
    weighted_centroid,
)
from .equilibria import (
    FourVortexParams,
    four_vortex,
    four_vortex_params,
    kappa_stationary,
    perturb,
    polar_pair,
    vortex_crystal,
)
from .errors import (
    ConfigError,
    DistanceUnderflow,
    NoConvergence,
    OverlappingCaps,
    SphereVortexError,
)
from .experiments import (
    BlobCloud,
    CollisionStats,
    MomentReport,
    SweepRow,
    blob_evolve,
    blob_initialize,
    montecarlo_collisions,
    stability_sweep,
    substream,
)
from .stability import (
    SpectrumReport,
    TangentMap,
    char_poly_check,
    check_dissipative,
    check_supstable,
    jacobian,
    relative_equilibrium_residual,
    spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "BlobCloud",
    "CollisionReport",
    "CollisionStats",
    "ConfigError",
    "DistanceUnderflow",
    "FourVortexParams",
    "MomentReport",
    "NoConvergence",
    "OverlappingCaps",
    "SpectrumReport",
    "SphereVortexError",
    "SweepRow",
    "TangentMap",
    "Trajectory",
    "VortexConfig",
    "biot_savart_kernel",
    "blob_evolve",
    "blob_initialize",
    "char_poly_check",
    "check_dissipative",
    "check_supstable",
    "first_eps_collision",
    "four_vortex",
    "four_vortex_params",
    "hamiltonian",
    "integrate",
    "jacobian",
    "kappa_stationary",
    "min_distance_series",
    "montecarlo_collisions",
    "perturb",
    "phi_eps",
    "polar_pair",
    "regularized_log",
    "regularized_rhs",
    "relative_equilibrium_residual",
    "spectrum",
    "stability_sweep",
    "substream",
    "vertical_moment",
    "vortex_crystal",
    "vortex_rhs",
    "weighted_centroid",
    "__version__",
]
