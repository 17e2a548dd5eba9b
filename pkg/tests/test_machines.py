"""Catalog fidelity, weapon geometry, loadout order, and missile guidance."""

import json
import math

import pytest

from aircombat.machines import (
    Aircraft,
    GUN_HALF_ANGLE,
    GUN_RANGE,
    LOCK_HALF_ANGLE,
    LOCK_RANGE,
    Missile,
    PROXIMITY_FUSE_RADIUS,
    SpecError,
    gun_in_cone,
    load_specs,
    lock_allowed,
    missile_guidance_step,
    parse_aircraft_spec,
    parse_missile_spec,
    proximity_triggered,
    roll_damage,
)
from aircombat.physics import BodyState


# ---------------------------------------------------------------------------
# Catalog fidelity. One row per machine, frozen from the performance sheets:
# (thrust, post_combustion, angular_frictions, speed_ceiling, max_safe_alt,
#  max_alt, missile_number, loadout in firing order).

AIRCRAFT_TABLE = {
    "TFX": (20.0, 20.0, 0.000175, 2500.0, 25000.0, 30000.0, 4,
            (("AIM-120", 4),)),
    "Rafale": (15.0, 7.5, 0.000165, 2200.0, 15240.0, 25240.0, 6,
               (("Mica", 2), ("Meteor", 4))),
    "F16": (15.0, 15.0, 0.000175, 1750.0, 15700.0, 25700.0, 12,
            (("Karaoke", 8), ("AIM-120", 2), ("CFT", 2))),
    "F14": (10.0, 5.0, 0.000175, 1750.0, 15700.0, 25700.0, 4,
            (("Sidewinder", 4),)),
    "Eurofighter": (13.0, 9.0, 0.00019, 2500.0, 16800.0, 26800.0, 6,
                    (("Meteor", 2), ("Mica", 4))),
}

# (category, thrust, endurance, damage_min, damage_max, angular_frictions)
MISSILE_TABLE = {
    "Mica": ("AAM", 150.0, 15.0, 20, 30, 0.00014),
    "Karaoke": ("AAM", 70.0, 35.0, 50, 70, 0.00005),
    "Sidewinder": ("AAM", 100.0, 20.0, 30, 40, 0.00008),
    "Meteor": ("AAM", 80.0, 40.0, 40, 60, 0.00005),
    "AIM-120": ("AAM", 120.0, 20.0, 25, 35, 0.00008),
    "S-400": ("SAM", 200.0, 210.0, 100, 100, 0.000025),
}


@pytest.fixture(scope="module")
def catalog():
    return load_specs()


class TestCatalog:
    def test_all_aircraft_present(self, catalog):
        assert set(catalog.aircraft) == set(AIRCRAFT_TABLE)

    def test_all_missiles_present(self, catalog):
        assert set(catalog.missiles) == set(MISSILE_TABLE) | {"CFT"}

    @pytest.mark.parametrize("name", sorted(AIRCRAFT_TABLE))
    def test_aircraft_fields(self, catalog, name):
        spec = catalog.aircraft_spec(name)
        row = AIRCRAFT_TABLE[name]
        assert spec.thrust_force == row[0]
        assert spec.post_combustion_force == row[1]
        assert spec.angular_frictions == row[2]
        assert spec.speed_ceiling_force == row[3]
        assert spec.max_safe_altitude == row[4]
        assert spec.max_altitude == row[5]
        assert spec.missile_number == row[6]
        assert spec.missile_config == row[7]

    @pytest.mark.parametrize("name", sorted(MISSILE_TABLE))
    def test_missile_fields(self, catalog, name):
        spec = catalog.missile_spec(name)
        cat, thrust, endurance, lo, hi, frictions = MISSILE_TABLE[name]
        assert spec.category == cat
        assert spec.thrust_force == thrust
        assert spec.endurance == endurance
        assert (spec.damage_min, spec.damage_max) == (lo, hi)
        assert spec.angular_frictions == frictions
        assert spec.drag_coeff == 0.0003
        assert spec.alias_of is None

    def test_cft_is_a_karaoke_alias(self, catalog):
        cft = catalog.missile_spec("CFT")
        karaoke = catalog.missile_spec("Karaoke")
        assert cft.alias_of == "Karaoke"
        assert cft.name == "CFT"
        for fld in ("category", "thrust_force", "endurance", "damage_min",
                    "damage_max", "angular_frictions", "drag_coeff"):
            assert getattr(cft, fld) == getattr(karaoke, fld)

    def test_loadouts_total_missile_number(self, catalog):
        for spec in catalog.aircraft.values():
            assert sum(c for _, c in spec.missile_config) == spec.missile_number

    def test_aero_blocks_are_positive(self, catalog):
        for spec in catalog.aircraft.values():
            aero = spec.aero
            assert aero.wings_lift > 0
            assert aero.drag_coeff > 0
            assert aero.wings_geometry_friction > 0
            assert aero.pitch_friction > 0
            assert aero.reference_speed == 150.0

    def test_unknown_names_raise(self, catalog):
        with pytest.raises(KeyError):
            catalog.aircraft_spec("MiG-31")
        with pytest.raises(KeyError):
            catalog.missile_spec("Exocet")


# ---------------------------------------------------------------------------
# Spec validation


def _good_missile_dict(**overrides):
    base = {
        "name": "Test", "category": "AAM", "thrust_force": 100,
        "endurance": 20, "damage": [10, 20],
        "angular_frictions": 1e-4, "drag_coeff": 3e-4,
    }
    base.update(overrides)
    return base


def _good_aircraft_dict(**overrides):
    base = {
        "name": "Test", "thrust_force": 15, "post_combustion_force": 10,
        "angular_frictions": 1.75e-4, "speed_ceiling_force": 1750,
        "max_safe_altitude": 15700, "max_altitude": 25700,
        "missile_number": 2, "missile_config": [["Mica", 2]],
        "aero": {
            "wings_lift": 9.80665, "flaps_lift": 2.0, "flaps_drag": 1.5,
            "drag_coeff": 7.0, "wings_geometry_friction": 2.0,
            "pitch_friction": 2.4, "yaw_friction": 1.0, "roll_friction": 10.0,
        },
    }
    base.update(overrides)
    return base


class TestSpecValidation:
    def test_good_dicts_parse(self):
        parse_missile_spec(_good_missile_dict())
        parse_aircraft_spec(_good_aircraft_dict())

    @pytest.mark.parametrize("missing", [
        "name", "category", "thrust_force", "endurance", "angular_frictions",
    ])
    def test_missing_missile_field(self, missing):
        data = _good_missile_dict()
        del data[missing]
        with pytest.raises(SpecError) as err:
            parse_missile_spec(data, source="bad.json")
        assert err.value.source == "bad.json"
        assert err.value.field_name == missing

    def test_missile_damage_shape(self):
        with pytest.raises(SpecError):
            parse_missile_spec(_good_missile_dict(damage=[10]))
        with pytest.raises(SpecError):
            parse_missile_spec(_good_missile_dict(damage=[10.5, 20]))
        with pytest.raises(SpecError):
            parse_missile_spec(_good_missile_dict(damage=[30, 20]))

    def test_missile_bad_category(self):
        with pytest.raises(SpecError) as err:
            parse_missile_spec(_good_missile_dict(category="ICBM"))
        assert err.value.field_name == "category"

    def test_missile_nonpositive_endurance(self):
        with pytest.raises(SpecError):
            parse_missile_spec(_good_missile_dict(endurance=0))

    def test_aircraft_missing_field(self):
        data = _good_aircraft_dict()
        del data["speed_ceiling_force"]
        with pytest.raises(SpecError) as err:
            parse_aircraft_spec(data, source="a.json")
        assert err.value.field_name == "speed_ceiling_force"

    def test_aircraft_loadout_total_mismatch(self):
        with pytest.raises(SpecError) as err:
            parse_aircraft_spec(_good_aircraft_dict(missile_number=3))
        assert err.value.field_name == "missile_number"

    def test_aircraft_bad_loadout_entry(self):
        with pytest.raises(SpecError):
            parse_aircraft_spec(_good_aircraft_dict(
                missile_number=2, missile_config=[["Mica", 2, "extra"]]))
        with pytest.raises(SpecError):
            parse_aircraft_spec(_good_aircraft_dict(
                missile_number=0, missile_config=[["Mica", 0]]))

    def test_aircraft_missing_aero_key(self):
        data = _good_aircraft_dict()
        del data["aero"]["wings_lift"]
        with pytest.raises(SpecError) as err:
            parse_aircraft_spec(data)
        assert "aero" in err.value.field_name

    def test_string_where_number_expected(self):
        with pytest.raises(SpecError):
            parse_missile_spec(_good_missile_dict(thrust_force="fast"))

    def test_load_specs_alias_to_unknown(self, tmp_path):
        (tmp_path / "missiles").mkdir()
        (tmp_path / "aircraft").mkdir()
        (tmp_path / "missiles" / "ghost.json").write_text(
            json.dumps({"name": "Ghost", "alias_of": "Phantom"}))
        with pytest.raises(SpecError) as err:
            load_specs(tmp_path)
        assert err.value.field_name == "alias_of"

    def test_load_specs_loadout_references_unknown_missile(self, tmp_path):
        (tmp_path / "missiles").mkdir()
        (tmp_path / "aircraft").mkdir()
        (tmp_path / "missiles" / "m.json").write_text(
            json.dumps(_good_missile_dict(name="Mica")))
        plane = _good_aircraft_dict(missile_config=[["Phoenix", 2]])
        (tmp_path / "aircraft" / "a.json").write_text(json.dumps(plane))
        with pytest.raises(SpecError) as err:
            load_specs(tmp_path)
        assert err.value.field_name == "missile_config"

    def test_load_specs_empty_tree(self, tmp_path):
        (tmp_path / "missiles").mkdir()
        (tmp_path / "aircraft").mkdir()
        with pytest.raises(SpecError):
            load_specs(tmp_path)


# ---------------------------------------------------------------------------
# Weapon geometry


def _plane(catalog, machine_id="a", team="blue", position=(0.0, 5000.0, 0.0),
           orientation=(0.0, 0.0, 0.0), kind="F16"):
    return Aircraft(
        machine_id=machine_id, team=team, spec=catalog.aircraft_spec(kind),
        body=BodyState(position=position, orientation=orientation,
                       linear_velocity=(0.0, 0.0, 0.0),
                       angular_velocity=(0.0, 0.0, 0.0)),
    )


def _target_at(catalog, distance, off_angle, base=(0.0, 5000.0, 0.0)):
    """Target placed at an angle off a north-facing shooter's nose."""
    x = base[0] + distance * math.sin(off_angle)
    z = base[2] + distance * math.cos(off_angle)
    return _plane(catalog, machine_id="t", team="red", position=(x, base[1], z))


class TestLockGeometry:
    def test_in_range_dead_ahead_locks(self, catalog):
        shooter = _plane(catalog)
        assert lock_allowed(shooter, _target_at(catalog, 2999.9, 0.0))

    def test_range_boundary_is_exclusive(self, catalog):
        shooter = _plane(catalog)
        assert not lock_allowed(shooter, _target_at(catalog, LOCK_RANGE, 0.0))

    def test_angle_just_inside_cone(self, catalog):
        shooter = _plane(catalog)
        assert lock_allowed(
            shooter, _target_at(catalog, 2000.0, LOCK_HALF_ANGLE - 1e-4))

    def test_angle_boundary_is_exclusive(self, catalog):
        shooter = _plane(catalog)
        assert not lock_allowed(
            shooter, _target_at(catalog, 2000.0, LOCK_HALF_ANGLE + 1e-4))

    def test_behind_never_locks(self, catalog):
        shooter = _plane(catalog)
        assert not lock_allowed(shooter, _target_at(catalog, 500.0, math.pi))

    def test_dead_target_never_locks(self, catalog):
        shooter = _plane(catalog)
        target = _target_at(catalog, 1000.0, 0.0)
        target.alive = False
        assert not lock_allowed(shooter, target)

    def test_dead_shooter_never_locks(self, catalog):
        shooter = _plane(catalog)
        shooter.alive = False
        assert not lock_allowed(shooter, _target_at(catalog, 1000.0, 0.0))

    def test_lock_follows_shooter_heading(self, catalog):
        # Same target, shooter yawed 90 deg away: out of cone.
        shooter = _plane(catalog, orientation=(0.0, 0.0, math.pi / 2))
        assert not lock_allowed(shooter, _target_at(catalog, 1000.0, 0.0))


class TestGunGeometry:
    def test_tight_cone_and_short_range(self, catalog):
        shooter = _plane(catalog)
        assert gun_in_cone(shooter, _target_at(catalog, 999.0, 0.0))
        assert not gun_in_cone(shooter, _target_at(catalog, GUN_RANGE, 0.0))
        assert gun_in_cone(
            shooter, _target_at(catalog, 500.0, GUN_HALF_ANGLE - 1e-4))
        assert not gun_in_cone(
            shooter, _target_at(catalog, 500.0, GUN_HALF_ANGLE + 1e-4))

    def test_gun_cone_narrower_than_lock_cone(self, catalog):
        shooter = _plane(catalog)
        target = _target_at(catalog, 800.0, math.radians(5.0))
        assert lock_allowed(shooter, target)
        assert not gun_in_cone(shooter, target)


# ---------------------------------------------------------------------------
# Loadout order and damage


class TestLoadout:
    def test_f16_firing_order(self, catalog):
        plane = _plane(catalog, kind="F16")
        fired = [plane.pop_missile() for _ in range(12)]
        assert fired == ["Karaoke"] * 8 + ["AIM-120"] * 2 + ["CFT"] * 2
        assert plane.pop_missile() is None
        assert plane.missiles_remaining == 0
        assert plane.missiles_fired == 12

    def test_remaining_count_tracks_pops(self, catalog):
        plane = _plane(catalog, kind="Rafale")
        assert plane.missiles_remaining == 6
        plane.pop_missile()
        assert plane.missiles_remaining == 5
        assert plane.next_missile_name() == "Mica"
        plane.pop_missile()
        assert plane.next_missile_name() == "Meteor"

    def test_loadout_is_per_instance(self, catalog):
        a = _plane(catalog, machine_id="a")
        b = _plane(catalog, machine_id="b")
        a.pop_missile()
        assert b.missiles_remaining == 12


class _FixedRng:
    """Stub RNG returning a scripted sequence of integer draws."""

    def __init__(self, values):
        self.values = list(values)
        self.calls = []

    def integers(self, low, high):
        self.calls.append((low, high))
        return self.values.pop(0)


class TestDamage:
    def test_roll_uses_inclusive_bounds(self, catalog):
        spec = catalog.missile_spec("Mica")
        rng = _FixedRng([20])
        roll_damage(spec, rng)
        # Draw interval is half-open, so max must be passed as max + 1.
        assert rng.calls == [(20, 31)]

    def test_two_minimum_mica_hits_leave_sixty(self, catalog):
        spec = catalog.missile_spec("Mica")
        rng = _FixedRng([20, 20])
        health = 100.0
        health -= roll_damage(spec, rng)
        health -= roll_damage(spec, rng)
        assert health == 60.0

    def test_s400_damage_is_always_full(self, catalog):
        spec = catalog.missile_spec("S-400")
        rng = _FixedRng([100])
        assert roll_damage(spec, rng) == 100
        assert rng.calls == [(100, 101)]


# ---------------------------------------------------------------------------
# Missile flight


def _missile(spec, position=(0.0, 1000.0, 0.0), velocity=(0.0, 0.0, 300.0)):
    return Missile(
        missile_id="m0", spec=spec, shooter_id="a", target_id="t",
        position=position, velocity=velocity,
        endurance_remaining=spec.endurance,
    )


class TestMissileFlight:
    def test_pursuit_closes_on_static_target(self, catalog):
        missile = _missile(catalog.missile_spec("Mica"))
        target = (2000.0, 1500.0, 3000.0)
        dt = 0.02

        def dist():
            return math.dist(missile.position, target)

        d0 = dist()
        for _ in range(500):
            missile_guidance_step(missile, target, dt)
            if not missile.active:
                break
        assert missile.active
        assert dist() < d0 * 0.5

    def test_endurance_windows_differ_by_class(self, catalog):
        dt = 1.0
        sam = _missile(catalog.missile_spec("S-400"))
        aam = _missile(catalog.missile_spec("Mica"))
        target = (0.0, 1000.0, 1e7)   # far enough to never reach
        for _ in range(200):
            missile_guidance_step(sam, target, dt)
            missile_guidance_step(aam, target, dt)
        # At t = 200 s the SAM motor (210 s) still burns; the short-range
        # missile (15 s) expired long ago.
        assert sam.active
        assert not aam.active
        assert aam.outcome == "expired"

    def test_expired_missile_stops_moving(self, catalog):
        missile = _missile(catalog.missile_spec("Mica"))
        missile.active = False
        before = missile.position
        missile_guidance_step(missile, (0.0, 0.0, 5000.0), 0.02)
        assert missile.position == before

    def test_turn_rate_is_pressure_limited(self, catalog):
        # Target directly abeam: one step may only rotate the velocity by
        # angular_frictions * q * dt radians.
        spec = catalog.missile_spec("Meteor")
        missile = _missile(spec, position=(0.0, 1000.0, 0.0),
                           velocity=(0.0, 0.0, 300.0))
        dt = 0.02
        from aircombat.physics import air_density
        q = air_density(1000.0) * 300.0 ** 2 / 2.0
        expected_cap = spec.angular_frictions * q * dt
        missile_guidance_step(missile, (10000.0, 1000.0, 0.0), dt)
        vx, vy, vz = missile.velocity
        turned = math.atan2(vx, vz)
        assert turned == pytest.approx(expected_cap, rel=1e-9)

    def test_speed_integrates_thrust_minus_drag(self, catalog):
        spec = catalog.missile_spec("Mica")
        missile = _missile(spec, velocity=(0.0, 0.0, 300.0))
        dt = 0.02
        from aircombat.physics import air_density
        density = air_density(1000.0)
        drag = spec.drag_coeff * density * 300.0 ** 2 / 2.0
        expected = 300.0 + (spec.thrust_force - drag) * dt
        missile_guidance_step(missile, (0.0, 1000.0, 1e6), dt)
        assert missile.speed == pytest.approx(expected, rel=1e-12)

    def test_orientation_tracks_velocity(self, catalog):
        missile = _missile(catalog.missile_spec("Mica"),
                           velocity=(100.0, 100.0, 0.0))
        roll, pitch, yaw = missile.orientation()
        assert roll == 0.0
        assert pitch == pytest.approx(math.atan2(100.0, 100.0))
        assert yaw == pytest.approx(math.pi / 2)


class TestProximity:
    def test_fuse_radius_boundary(self, catalog):
        missile = _missile(catalog.missile_spec("Mica"),
                           position=(0.0, 1000.0, 0.0))
        assert proximity_triggered(missile, (PROXIMITY_FUSE_RADIUS - 1e-3, 1000.0, 0.0))
        assert not proximity_triggered(missile, (PROXIMITY_FUSE_RADIUS, 1000.0, 0.0))

    def test_fuse_is_spherical(self, catalog):
        missile = _missile(catalog.missile_spec("Mica"),
                           position=(0.0, 1000.0, 0.0))
        r = PROXIMITY_FUSE_RADIUS * 0.99 / math.sqrt(3.0)
        assert proximity_triggered(missile, (r, 1000.0 + r, r))
