"""Planet-scale viewing geometry: ray-to-ground distances on a flat or
spherical planet, horizon angle, and the apparent atmosphere band used to
shade the sky as altitude climbs toward space.

Angles are measured from the nadir (straight down = 0). Everything is pure
float math; the scale mismatch between planet radius (1e6 m) and altitude
(1e0..1e5 m) is exactly why these run in 64-bit floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS = 6_371_000.0          # m
ATMOSPHERE_THICKNESS = 100_000.0    # m, altitude at which space begins

# h/r thresholds for switching between the flat-ground and spherical models.
PLANAR_RATIO = 0.001
SPHERICAL_RATIO = 0.01


class NoIntersectionError(ValueError):
    """The ray from this altitude and angle never reaches the ground."""


def planar_ground_distance(altitude: float, alpha: float) -> float:
    """Distance along a ray to flat ground: h / cos(alpha).

    Valid for alpha in [0, pi/2); grows without bound toward the horizon.
    """
    if altitude < 0.0:
        raise ValueError(f"altitude must be >= 0, got {altitude}")
    c = math.cos(alpha)
    if c <= 0.0:
        raise NoIntersectionError(f"ray at alpha={alpha} never reaches flat ground")
    return altitude / c


def spherical_ground_distance(altitude: float, alpha: float,
                              radius: float = EARTH_RADIUS) -> float:
    """Distance along a ray to the surface of a sphere.

    d = cos(alpha)*(r+h) - r*sin(acos(sin(alpha)*(r+h)/r)). Rays that miss
    the sphere (sin(alpha)*(r+h)/r > 1) raise NoIntersectionError, which is
    a distinct condition, not a numeric overflow.
    """
    if altitude < 0.0:
        raise ValueError(f"altitude must be >= 0, got {altitude}")
    arg = math.sin(alpha) * (radius + altitude) / radius
    if arg > 1.0:
        raise NoIntersectionError(
            f"ray at alpha={alpha} from h={altitude} misses the planet"
        )
    return math.cos(alpha) * (radius + altitude) - radius * math.sin(math.acos(arg))


def ground_distance(altitude: float, alpha: float,
                    radius: float = EARTH_RADIUS) -> float:
    """Ground distance blending the flat and spherical models by h/r.

    Below PLANAR_RATIO the flat model applies, above SPHERICAL_RATIO the
    spherical one; in between the two are linearly interpolated, which keeps
    the result continuous at both thresholds.
    """
    ratio = altitude / radius
    if ratio < PLANAR_RATIO:
        return planar_ground_distance(altitude, alpha)
    if ratio > SPHERICAL_RATIO:
        return spherical_ground_distance(altitude, alpha, radius)
    t = (ratio - PLANAR_RATIO) / (SPHERICAL_RATIO - PLANAR_RATIO)
    planar = planar_ground_distance(altitude, alpha)
    spherical = spherical_ground_distance(altitude, alpha, radius)
    return (1.0 - t) * planar + t * spherical


def horizon_angle(altitude: float, radius: float = EARTH_RADIUS) -> float:
    """Nadir angle of the horizon: pi/2 - atan(sqrt(h*(h+2r))/r).

    Exactly pi/2 at the surface, strictly decreasing as altitude climbs.
    """
    if altitude < 0.0:
        raise ValueError(f"altitude must be >= 0, got {altitude}")
    return math.pi / 2.0 - math.atan(math.sqrt(altitude * (altitude + 2.0 * radius)) / radius)


def atmosphere_angle(altitude: float, radius: float = EARTH_RADIUS,
                     thickness: float = ATMOSPHERE_THICKNESS) -> float:
    """Apparent angular height of the atmosphere band above the horizon.

    With F = h / thickness:
      F <= 1: pi*(1-F) + (pi/2)*F - horizon_angle(h)
      F >  1: the horizon angle of the atmosphere shell (radius r+thickness,
              height h-thickness above it) minus horizon_angle(h).
    Both branches meet at F = 1.
    """
    if altitude < 0.0:
        raise ValueError(f"altitude must be >= 0, got {altitude}")
    f = altitude / thickness
    horizon = horizon_angle(altitude, radius)
    if f <= 1.0:
        return math.pi * (1.0 - f) + (math.pi / 2.0) * f - horizon
    h_over = altitude - thickness
    shell = radius + thickness
    shell_horizon = math.pi / 2.0 - math.atan(
        math.sqrt(h_over * (h_over + 2.0 * shell)) / shell
    )
    return shell_horizon - horizon


@dataclass(frozen=True, slots=True)
class SkyPalette:
    """Endpoint colors for the altitude blend, RGB in [0, 1]."""

    upper_atmosphere: tuple[float, float, float] = (0.45, 0.65, 1.0)
    space: tuple[float, float, float] = (0.0, 0.0, 0.0)


def space_color(altitude: float, palette: SkyPalette = SkyPalette(),
                thickness: float = ATMOSPHERE_THICKNESS) -> tuple[float, float, float]:
    """Sky color lerped from upper-atmosphere to space by F = h / thickness,
    clamped so everything above the shell is plain space."""
    f = altitude / thickness
    f = 0.0 if f < 0.0 else 1.0 if f > 1.0 else f
    a, b = palette.upper_atmosphere, palette.space
    return (
        a[0] + (b[0] - a[0]) * f,
        a[1] + (b[1] - a[1]) * f,
        a[2] + (b[2] - a[2]) * f,
    )
