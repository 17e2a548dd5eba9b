"""Viewing-geometry tests.

The spherical-distance oracle is an independent ray-sphere intersection
solved via the quadratic, not the closed form under test.
"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aircombat.geometry import (
    ATMOSPHERE_THICKNESS,
    EARTH_RADIUS,
    PLANAR_RATIO,
    SPHERICAL_RATIO,
    NoIntersectionError,
    SkyPalette,
    atmosphere_angle,
    ground_distance,
    horizon_angle,
    planar_ground_distance,
    space_color,
    spherical_ground_distance,
)


def oracle_spherical(h: float, alpha: float, r: float) -> float:
    # Observer at (0, r+h, 0), ray (sin a, -cos a, 0): nearest root of
    # |o + t*d|^2 = r^2.
    oy = r + h
    b = -oy * math.cos(alpha)
    c = oy * oy - r * r
    disc = b * b - c
    if disc < 0.0:
        raise NoIntersectionError("oracle: ray misses sphere")
    return -b - math.sqrt(disc)


class TestPlanar:
    def test_nadir_is_altitude(self):
        assert planar_ground_distance(1234.5, 0.0) == 1234.5

    def test_sixty_degrees_doubles(self):
        assert planar_ground_distance(100.0, math.pi / 3.0) == pytest.approx(200.0, rel=1e-12)

    def test_horizontal_never_lands(self):
        # Float pi/2 has cos ~ 6e-17 > 0, so the distance is merely huge;
        # anything past it raises the distinct no-intersection error.
        assert planar_ground_distance(100.0, math.pi / 2.0) > 1e17
        with pytest.raises(NoIntersectionError):
            planar_ground_distance(100.0, math.pi / 2.0 + 1e-9)

    def test_negative_altitude_rejected(self):
        with pytest.raises(ValueError):
            planar_ground_distance(-1.0, 0.0)


class TestSpherical:
    @pytest.mark.parametrize("h,alpha", [
        (100.0, 0.0), (100.0, math.pi / 3.0), (1000.0, 1.0),
        (10000.0, 1.4), (50000.0, 1.2), (0.0, 0.7), (300000.0, 0.5),
    ])
    def test_matches_quadratic_oracle(self, h, alpha):
        got = spherical_ground_distance(h, alpha)
        want = oracle_spherical(h, alpha, EARTH_RADIUS)
        assert got == pytest.approx(want, rel=1e-9)

    def test_frozen_value(self):
        # Quadratic oracle at h=1000, alpha=1: 1851.1681661452167.
        assert spherical_ground_distance(1000.0, 1.0) == pytest.approx(
            1851.1681661452167, rel=1e-9)

    def test_surface_is_zero(self):
        assert spherical_ground_distance(0.0, 0.9) == pytest.approx(0.0, abs=1e-6)

    def test_nadir_is_altitude(self):
        assert spherical_ground_distance(5000.0, 0.0) == pytest.approx(5000.0, rel=1e-12)

    def test_miss_is_distinct_error(self):
        # Just past the horizon angle the ray misses; that is not overflow.
        h = 10000.0
        alpha = horizon_angle(h) + 1e-4
        with pytest.raises(NoIntersectionError):
            spherical_ground_distance(h, alpha)

    @given(st.floats(min_value=1.0, max_value=600.0),
           st.floats(min_value=0.0, max_value=0.5))
    def test_close_to_planar_when_low(self, h, alpha):
        # h << r: the flat model is within 1% of the spherical one.
        planar = planar_ground_distance(h, alpha)
        spherical = spherical_ground_distance(h, alpha)
        assert abs(spherical - planar) / planar < 0.01


class TestBlend:
    def test_planar_regime(self):
        h = EARTH_RADIUS * PLANAR_RATIO * 0.5
        assert ground_distance(h, 0.4) == planar_ground_distance(h, 0.4)

    def test_spherical_regime(self):
        h = EARTH_RADIUS * SPHERICAL_RATIO * 2.0
        assert ground_distance(h, 0.4) == spherical_ground_distance(h, 0.4)

    def test_midpoint_is_mean(self):
        ratio = (PLANAR_RATIO + SPHERICAL_RATIO) / 2.0
        h = EARTH_RADIUS * ratio
        mean = (planar_ground_distance(h, 0.3) + spherical_ground_distance(h, 0.3)) / 2.0
        assert ground_distance(h, 0.3) == pytest.approx(mean, rel=1e-12)

    @pytest.mark.parametrize("ratio", [PLANAR_RATIO, SPHERICAL_RATIO])
    def test_continuous_at_thresholds(self, ratio):
        alpha = 0.45
        h = EARTH_RADIUS * ratio
        at = ground_distance(h, alpha)
        below = ground_distance(h * (1.0 - 1e-9), alpha)
        above = ground_distance(h * (1.0 + 1e-9), alpha)
        assert below == pytest.approx(at, rel=1e-6)
        assert above == pytest.approx(at, rel=1e-6)

    @given(st.floats(min_value=0.0, max_value=1.2),
           st.floats(min_value=1.0, max_value=150000.0))
    def test_blend_bracketed_by_models(self, alpha, h):
        try:
            planar = planar_ground_distance(h, alpha)
            spherical = spherical_ground_distance(h, alpha)
            blended = ground_distance(h, alpha)
        except NoIntersectionError:
            return
        lo, hi = min(planar, spherical), max(planar, spherical)
        assert lo - 1e-9 <= blended <= hi + 1e-9


class TestHorizon:
    def test_surface_horizon_is_level(self):
        assert horizon_angle(0.0) == math.pi / 2.0

    def test_frozen_values(self):
        assert horizon_angle(10000.0) == pytest.approx(1.5148041490751118, rel=1e-12)
        assert horizon_angle(100000.0) == pytest.approx(1.394764914914023, rel=1e-12)

    @given(st.floats(min_value=0.0, max_value=500000.0),
           st.floats(min_value=1.0, max_value=500000.0))
    def test_strictly_decreasing(self, h, dh):
        assert horizon_angle(h + dh) < horizon_angle(h)


class TestAtmosphereAngle:
    def test_surface_value(self):
        # F=0: pi - pi/2 = pi/2 band above the horizon.
        assert atmosphere_angle(0.0) == pytest.approx(math.pi / 2.0, rel=1e-12)

    def test_branches_agree_at_threshold(self):
        h = ATMOSPHERE_THICKNESS
        inner = math.pi * (1.0 - 1.0) + (math.pi / 2.0) * 1.0 - horizon_angle(h)
        # Outer branch evaluated at its boundary (zero height above the shell).
        shell = EARTH_RADIUS + ATMOSPHERE_THICKNESS
        outer = (math.pi / 2.0 - math.atan(math.sqrt(0.0 * (0.0 + 2.0 * shell)) / shell)
                 - horizon_angle(h))
        assert atmosphere_angle(h) == pytest.approx(inner, rel=1e-12)
        assert outer == pytest.approx(inner, abs=1e-9)
        # Both reduce to pi/2 - horizon at h = thickness.
        assert atmosphere_angle(h) == pytest.approx(math.pi / 2.0 - horizon_angle(h),
                                                    rel=1e-9)

    def test_two_sided_continuity(self):
        # The shell horizon has a vertical tangent at F=1, so two-sided
        # differences scale with sqrt(delta); 1 um steps stay under 1e-5 rad.
        h = ATMOSPHERE_THICKNESS
        at = atmosphere_angle(h)
        assert atmosphere_angle(h - 1e-6) == pytest.approx(at, abs=1e-5)
        assert atmosphere_angle(h + 1e-6) == pytest.approx(at, abs=1e-5)

    def test_shrinks_from_space(self):
        assert atmosphere_angle(400000.0) < atmosphere_angle(150000.0) < atmosphere_angle(0.0)


class TestSpaceColor:
    def test_endpoints(self):
        pal = SkyPalette()
        assert space_color(0.0, pal) == pal.upper_atmosphere
        assert space_color(ATMOSPHERE_THICKNESS, pal) == pal.space

    def test_clamped_above_shell(self):
        pal = SkyPalette()
        assert space_color(ATMOSPHERE_THICKNESS * 3.0, pal) == pal.space

    def test_midpoint_mix(self):
        pal = SkyPalette(upper_atmosphere=(1.0, 0.5, 0.0), space=(0.0, 0.5, 1.0))
        mid = space_color(ATMOSPHERE_THICKNESS / 2.0, pal)
        assert mid == pytest.approx((0.5, 0.5, 0.5), rel=1e-12)

    @given(st.floats(min_value=0.0, max_value=1e7))
    def test_components_stay_in_range(self, h):
        c = space_color(h)
        assert all(0.0 <= v <= 1.0 for v in c)


class TestPrecision:
    def test_float32_breaks_down_at_low_altitude(self):
        # (r+h) - r style cancellation: float32 keeps ~7 digits, so a 100 m
        # altitude against a 6.371e6 m radius loses the answer; float64 holds
        # it to 1e-9. This is the reason the engine is 64-bit end to end.
        h, alpha, r = 100.0, 0.3, EARTH_RADIUS
        exact = oracle_spherical(h, alpha, r)
        f32 = np.float32
        arg32 = np.sin(f32(alpha)) * (f32(r) + f32(h)) / f32(r)
        d32 = float(np.cos(f32(alpha)) * (f32(r) + f32(h))
                    - f32(r) * np.sin(np.arccos(np.minimum(arg32, f32(1.0)))))
        rel32 = abs(d32 - exact) / exact
        rel64 = abs(spherical_ground_distance(h, alpha) - exact) / exact
        assert rel32 > 1e-4
        assert rel64 < 1e-9
