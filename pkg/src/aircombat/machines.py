"""Machine catalog and combat entities: aircraft and missile specs loaded
from JSON, lock/gun geometry, missile pursuit guidance, and damage rolls.

Spec files live under ``data/aircraft`` and ``data/missiles``. A missile
file may be an alias (``{"name": "CFT", "alias_of": "Karaoke"}``) that
resolves to another missile's numbers under its own name.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .physics import (
    AeroParams,
    AtmosphereModel,
    BodyState,
    STANDARD_ATMOSPHERE,
    Vec3,
    air_density,
    forward_axis,
)

AIRCRAFT_MAX_HEALTH = 100.0

# Weapon geometry. Lock and gun checks use strict inequalities, so a target
# exactly on a boundary is out.
LOCK_RANGE = 3000.0                     # m
LOCK_HALF_ANGLE = math.radians(15.0)
GUN_RANGE = 1000.0                      # m
GUN_HALF_ANGLE = math.radians(2.0)
GUN_DAMAGE_PER_SECOND = 25.0
PROXIMITY_FUSE_RADIUS = 20.0            # m
MAX_INBOUND_PER_TARGET = 3

MISSILE_CATEGORIES = ("AAM", "SAM")


class SpecError(ValueError):
    """A machine spec file failed validation; carries file and field."""

    def __init__(self, source: str, field_name: str, message: str) -> None:
        self.source = source
        self.field_name = field_name
        super().__init__(f"{source}: field '{field_name}': {message}")


@dataclass(frozen=True, slots=True)
class MissileSpec:
    name: str
    category: str               # AAM or SAM
    thrust_force: float         # sim units
    endurance: float            # s of powered flight
    damage_min: int
    damage_max: int
    angular_frictions: float
    drag_coeff: float
    alias_of: str | None = None


@dataclass(frozen=True, slots=True)
class AircraftSpec:
    name: str
    thrust_force: float
    post_combustion_force: float
    angular_frictions: float
    speed_ceiling_force: float      # km/h
    max_safe_altitude: float        # m
    max_altitude: float             # m
    missile_number: int
    missile_config: tuple[tuple[str, int], ...]   # (missile name, count), firing order
    aero: AeroParams


def _require(data: dict, source: str, name: str, kind) -> object:
    if name not in data:
        raise SpecError(source, name, "missing")
    value = data[name]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SpecError(source, name, f"expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise SpecError(source, name, f"expected an integer, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise SpecError(source, name, f"expected a string, got {value!r}")
        return value
    return value


def parse_aircraft_spec(data: dict, source: str = "<memory>") -> AircraftSpec:
    name = _require(data, source, "name", str)
    thrust = _require(data, source, "thrust_force", float)
    post = _require(data, source, "post_combustion_force", float)
    frictions = _require(data, source, "angular_frictions", float)
    ceiling = _require(data, source, "speed_ceiling_force", float)
    safe_alt = _require(data, source, "max_safe_altitude", float)
    max_alt = _require(data, source, "max_altitude", float)
    missile_number = _require(data, source, "missile_number", int)

    config_raw = _require(data, source, "missile_config", list)
    if not isinstance(config_raw, list):
        raise SpecError(source, "missile_config", "expected a list of [name, count]")
    config: list[tuple[str, int]] = []
    for i, entry in enumerate(config_raw):
        if (not isinstance(entry, (list, tuple)) or len(entry) != 2
                or not isinstance(entry[0], str)
                or not isinstance(entry[1], int) or isinstance(entry[1], bool)
                or entry[1] <= 0):
            raise SpecError(source, f"missile_config[{i}]",
                            f"expected [name, positive count], got {entry!r}")
        config.append((entry[0], entry[1]))
    total = sum(c for _, c in config)
    if total != missile_number:
        raise SpecError(source, "missile_number",
                        f"loadout totals {total}, spec says {missile_number}")

    aero_raw = data.get("aero")
    if not isinstance(aero_raw, dict):
        raise SpecError(source, "aero", "missing aero coefficient block")
    try:
        aero = AeroParams(
            thrust_force=thrust,
            post_combustion_force=post,
            angular_frictions=frictions,
            speed_ceiling=ceiling,
            max_safe_altitude=safe_alt,
            max_altitude=max_alt,
            wings_lift=float(aero_raw["wings_lift"]),
            flaps_lift=float(aero_raw["flaps_lift"]),
            flaps_drag=float(aero_raw["flaps_drag"]),
            drag_coeff=float(aero_raw["drag_coeff"]),
            wings_geometry_friction=float(aero_raw["wings_geometry_friction"]),
            pitch_friction=float(aero_raw["pitch_friction"]),
            yaw_friction=float(aero_raw["yaw_friction"]),
            roll_friction=float(aero_raw["roll_friction"]),
            reference_speed=float(aero_raw.get("reference_speed", 150.0)),
        )
    except KeyError as exc:
        raise SpecError(source, f"aero.{exc.args[0]}", "missing") from None
    except ValueError as exc:
        raise SpecError(source, "aero", str(exc)) from None

    return AircraftSpec(
        name=name, thrust_force=thrust, post_combustion_force=post,
        angular_frictions=frictions, speed_ceiling_force=ceiling,
        max_safe_altitude=safe_alt, max_altitude=max_alt,
        missile_number=missile_number, missile_config=tuple(config), aero=aero,
    )


def parse_missile_spec(data: dict, source: str = "<memory>") -> MissileSpec | dict:
    """Parse one missile file; alias files return their raw dict for the
    catalog to resolve once every real spec is loaded."""
    name = _require(data, source, "name", str)
    if "alias_of" in data:
        alias = _require(data, source, "alias_of", str)
        return {"name": name, "alias_of": alias, "source": source}
    category = _require(data, source, "category", str)
    if category not in MISSILE_CATEGORIES:
        raise SpecError(source, "category",
                        f"expected one of {MISSILE_CATEGORIES}, got {category!r}")
    thrust = _require(data, source, "thrust_force", float)
    endurance = _require(data, source, "endurance", float)
    frictions = _require(data, source, "angular_frictions", float)
    drag = _require(data, source, "drag_coeff", float)
    damage = data.get("damage")
    if (not isinstance(damage, list) or len(damage) != 2
            or not all(isinstance(d, int) and not isinstance(d, bool) for d in damage)):
        raise SpecError(source, "damage", f"expected [min, max] integers, got {damage!r}")
    lo, hi = damage
    if lo > hi or lo < 0:
        raise SpecError(source, "damage", f"need 0 <= min <= max, got {damage!r}")
    if endurance <= 0.0:
        raise SpecError(source, "endurance", f"must be > 0 s, got {endurance}")
    if thrust <= 0.0:
        raise SpecError(source, "thrust_force", f"must be > 0, got {thrust}")
    return MissileSpec(
        name=name, category=category, thrust_force=thrust, endurance=endurance,
        damage_min=lo, damage_max=hi, angular_frictions=frictions, drag_coeff=drag,
    )


@dataclass(frozen=True)
class SpecCatalog:
    aircraft: dict[str, AircraftSpec]
    missiles: dict[str, MissileSpec]

    def aircraft_spec(self, name: str) -> AircraftSpec:
        if name not in self.aircraft:
            raise KeyError(f"unknown aircraft {name!r}; have {sorted(self.aircraft)}")
        return self.aircraft[name]

    def missile_spec(self, name: str) -> MissileSpec:
        if name not in self.missiles:
            raise KeyError(f"unknown missile {name!r}; have {sorted(self.missiles)}")
        return self.missiles[name]


def default_data_dir() -> Path:
    return Path(str(resources.files("aircombat") / "data"))


def load_specs(root: str | Path | None = None) -> SpecCatalog:
    """Load and validate every spec under root (default: bundled data).

    Expects ``aircraft/*.json`` and ``missiles/*.json``. Aliases resolve
    after all real missiles load; loadout names are checked against the
    final missile table.
    """
    base = Path(root) if root is not None else default_data_dir()
    aircraft: dict[str, AircraftSpec] = {}
    missiles: dict[str, MissileSpec] = {}
    aliases: list[dict] = []

    for path in sorted((base / "missiles").glob("*.json")):
        data = json.loads(path.read_text())
        parsed = parse_missile_spec(data, source=path.name)
        if isinstance(parsed, dict):
            aliases.append(parsed)
        else:
            missiles[parsed.name] = parsed
    for alias in aliases:
        target = alias["alias_of"]
        if target not in missiles:
            raise SpecError(alias["source"], "alias_of",
                            f"references unknown missile {target!r}")
        base_spec = missiles[target]
        missiles[alias["name"]] = MissileSpec(
            name=alias["name"], category=base_spec.category,
            thrust_force=base_spec.thrust_force, endurance=base_spec.endurance,
            damage_min=base_spec.damage_min, damage_max=base_spec.damage_max,
            angular_frictions=base_spec.angular_frictions,
            drag_coeff=base_spec.drag_coeff, alias_of=target,
        )

    for path in sorted((base / "aircraft").glob("*.json")):
        data = json.loads(path.read_text())
        spec = parse_aircraft_spec(data, source=path.name)
        for missile_name, _ in spec.missile_config:
            if missile_name not in missiles:
                raise SpecError(path.name, "missile_config",
                                f"references unknown missile {missile_name!r}")
        aircraft[spec.name] = spec

    if not aircraft:
        raise SpecError(str(base), "aircraft", "no aircraft specs found")
    return SpecCatalog(aircraft=aircraft, missiles=missiles)


# ---------------------------------------------------------------------------
# Entities


@dataclass
class Aircraft:
    """One aircraft in a world. Mutable combat state lives here; the spec is
    shared and immutable."""

    machine_id: str
    team: str
    spec: AircraftSpec
    body: BodyState
    health: float = AIRCRAFT_MAX_HEALTH
    alive: bool = True
    locked_target: str | None = None
    remaining_loadout: list[list] = field(default_factory=list)  # [[name, count], ...]
    missiles_fired: int = 0
    custom_physics: bool = False
    controls_cache: object = None

    def __post_init__(self) -> None:
        if not self.remaining_loadout:
            self.remaining_loadout = [[name, count] for name, count in self.spec.missile_config]

    @property
    def missiles_remaining(self) -> int:
        return sum(count for _, count in self.remaining_loadout)

    def next_missile_name(self) -> str | None:
        """Name of the next missile to leave the rail, in loadout order."""
        for name, count in self.remaining_loadout:
            if count > 0:
                return name
        return None

    def pop_missile(self) -> str | None:
        for entry in self.remaining_loadout:
            if entry[1] > 0:
                entry[1] -= 1
                self.missiles_fired += 1
                return entry[0]
        return None


@dataclass
class Missile:
    """A missile in flight. Pure-pursuit point mass; velocity direction
    chases the target at a dynamic-pressure-limited turn rate."""

    missile_id: str
    spec: MissileSpec
    shooter_id: str
    target_id: str
    position: Vec3
    velocity: Vec3
    endurance_remaining: float
    active: bool = True
    outcome: str | None = None      # None while flying, then "hit" or "expired"

    @property
    def speed(self) -> float:
        vx, vy, vz = self.velocity
        return math.sqrt(vx * vx + vy * vy + vz * vz)

    def orientation(self) -> Vec3:
        """Euler attitude implied by the velocity direction (zero roll)."""
        vx, vy, vz = self.velocity
        horizontal = math.hypot(vx, vz)
        if horizontal == 0.0 and vy == 0.0:
            return (0.0, 0.0, 0.0)
        return (0.0, math.atan2(vy, horizontal), math.atan2(vx, vz))


# ---------------------------------------------------------------------------
# Weapon geometry


def _offset_range_cos(shooter_body: BodyState, target_pos: Vec3) -> tuple[float, float]:
    """Distance to the target and the cosine of its angle off the nose."""
    dx = target_pos[0] - shooter_body.position[0]
    dy = target_pos[1] - shooter_body.position[1]
    dz = target_pos[2] - shooter_body.position[2]
    dist = math.sqrt(dx * dx + dy * dy + dz * dz)
    if dist == 0.0:
        return 0.0, 1.0
    fx, fy, fz = forward_axis(shooter_body.orientation)
    return dist, (dx * fx + dy * fy + dz * fz) / dist


def lock_allowed(shooter: Aircraft, target: Aircraft) -> bool:
    """Lock geometry: target strictly inside LOCK_RANGE and strictly inside
    the LOCK_HALF_ANGLE cone around the nose, and strictly alive."""
    if not target.alive or not shooter.alive:
        return False
    dist, cos_off = _offset_range_cos(shooter.body, target.body.position)
    if not dist < LOCK_RANGE:
        return False
    return cos_off > math.cos(LOCK_HALF_ANGLE)


def gun_in_cone(shooter: Aircraft, target: Aircraft) -> bool:
    if not target.alive:
        return False
    dist, cos_off = _offset_range_cos(shooter.body, target.body.position)
    if not dist < GUN_RANGE:
        return False
    return cos_off > math.cos(GUN_HALF_ANGLE)


def roll_damage(spec: MissileSpec, rng) -> int:
    """Uniform integer damage draw, bounds inclusive, from the given RNG."""
    return int(rng.integers(spec.damage_min, spec.damage_max + 1))


def proximity_triggered(missile: Missile, target_pos: Vec3) -> bool:
    dx = target_pos[0] - missile.position[0]
    dy = target_pos[1] - missile.position[1]
    dz = target_pos[2] - missile.position[2]
    return dx * dx + dy * dy + dz * dz < PROXIMITY_FUSE_RADIUS * PROXIMITY_FUSE_RADIUS


def missile_guidance_step(missile: Missile, target_pos: Vec3, dt: float,
                          atmosphere: AtmosphereModel = STANDARD_ATMOSPHERE) -> None:
    """Advance one missile by dt of pure pursuit.

    The velocity direction rotates toward the target's current position at a
    turn rate capped by angular_frictions times the missile's own dynamic
    pressure; speed integrates thrust minus quadratic drag. Expired or
    inactive missiles do not move.
    """
    if not missile.active:
        return
    missile.endurance_remaining -= dt
    if missile.endurance_remaining <= 0.0:
        missile.active = False
        missile.outcome = "expired"
        return

    vx, vy, vz = missile.velocity
    speed = math.sqrt(vx * vx + vy * vy + vz * vz)
    density = air_density(missile.position[1], atmosphere)

    if speed > 0.0:
        ux, uy, uz = vx / speed, vy / speed, vz / speed
        dx = target_pos[0] - missile.position[0]
        dy = target_pos[1] - missile.position[1]
        dz = target_pos[2] - missile.position[2]
        dist = math.sqrt(dx * dx + dy * dy + dz * dz)
        if dist > 0.0:
            tx, ty, tz = dx / dist, dy / dist, dz / dist
            dot = max(-1.0, min(1.0, ux * tx + uy * ty + uz * tz))
            angle_off = math.acos(dot)
            q = density * speed * speed / 2.0
            max_turn = missile.spec.angular_frictions * q * dt
            if angle_off > 1e-12:
                step = min(angle_off, max_turn)
                # Slerp the unit heading toward the target direction.
                s = math.sin(angle_off)
                a = math.sin(angle_off - step) / s
                b = math.sin(step) / s
                ux, uy, uz = a * ux + b * tx, a * uy + b * ty, a * uz + b * tz
                norm = math.sqrt(ux * ux + uy * uy + uz * uz)
                ux, uy, uz = ux / norm, uy / norm, uz / norm

        drag = missile.spec.drag_coeff * density * speed * speed / 2.0
        speed = max(0.0, speed + (missile.spec.thrust_force - drag) * dt)
        missile.velocity = (ux * speed, uy * speed, uz * speed)
    else:
        # From rest the motor pushes straight at the target.
        dx = target_pos[0] - missile.position[0]
        dy = target_pos[1] - missile.position[1]
        dz = target_pos[2] - missile.position[2]
        dist = math.sqrt(dx * dx + dy * dy + dz * dz)
        if dist > 0.0:
            boost = missile.spec.thrust_force * dt
            missile.velocity = (dx / dist * boost, dy / dist * boost, dz / dist * boost)

    missile.position = (
        missile.position[0] + missile.velocity[0] * dt,
        missile.position[1] + missile.velocity[1] * dt,
        missile.position[2] + missile.velocity[2] * dt,
    )
