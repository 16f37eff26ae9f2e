"""Exception types shared across the package."""


class SphereVortexError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SphereVortexError):
    """A configuration or argument failed validation."""


class DistanceUnderflow(SphereVortexError):
    """Two points came closer than the exact-kernel distance floor."""

    def __init__(self, distance: float, pair: tuple[int, int] | None = None):
        self.distance = distance
        self.pair = pair
        where = f" between vortices {pair[0]} and {pair[1]}" if pair else ""
        super().__init__(
            f"pairwise distance {distance:.3e}{where} is below the exact-kernel floor"
        )


class NoConvergence(SphereVortexError):
    """An iterative numerical routine failed to converge."""


class OverlappingCaps(SphereVortexError):
    """Requested blob caps intersect, so the cloud cannot be initialized."""
