"""World container: owns every machine, the seeded RNG, and the tick loop
that advances physics, locks, weapons, and missiles in a fixed order.

Determinism contract: one tick = one pass in machine insertion order for
each phase, every random draw goes through the counting RNG, and identical
(seed, command stream) pairs produce bit-identical worlds.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import machines as mc
from .physics import (
    AtmosphereModel,
    BodyState,
    ControlInput,
    STANDARD_ATMOSPHERE,
    Vec3,
    parse_kinetics_matrix,
    step_dynamics,
)


class WorldError(ValueError):
    """An operation referenced a machine or mode that does not exist."""


class FireDenied(enum.Enum):
    NO_LOCK = "no_lock"
    NO_MISSILES = "no_missiles"
    TARGET_SATURATED = "target_saturated"


@dataclass(frozen=True, slots=True)
class LaunchResult:
    missile: mc.Missile | None
    denied: FireDenied | None

    @property
    def fired(self) -> bool:
        return self.missile is not None


class CountingRng:
    """Seeded PCG64 generator that counts every draw it hands out, so traces
    can record and replays can verify RNG usage per tick."""

    def __init__(self, seed: int) -> None:
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))
        self.draws = 0

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in [low, high)."""
        self.draws += 1
        return int(self._gen.integers(low, high))

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        self.draws += 1
        return float(self._gen.uniform(low, high))

    def pick_weighted(self, weights: list[float]) -> int:
        """Index draw proportional to weights, consuming one uniform draw."""
        total = sum(weights)
        u = self.uniform(0.0, total)
        acc = 0.0
        for i, w in enumerate(weights):
            acc += w
            if u < acc:
                return i
        return len(weights) - 1


@dataclass(slots=True)
class TickCommand:
    """Per-aircraft orders for one tick."""

    controls: ControlInput = field(default_factory=ControlInput)
    gun_trigger: bool = False
    launch_missile: bool = False
    lock_target: str | None = None


NEUTRAL_COMMAND = TickCommand()


class World:
    def __init__(self, dt: float, seed: int,
                 atmosphere: AtmosphereModel = STANDARD_ATMOSPHERE,
                 catalog: mc.SpecCatalog | None = None) -> None:
        if not dt > 0.0:
            raise ValueError(f"dt must be > 0, got {dt}")
        self.dt = dt
        self.time = 0.0
        self.tick_index = 0
        self.atmosphere = atmosphere
        self.rng = CountingRng(seed)
        self.machines: dict[str, mc.Aircraft] = {}
        self.missiles: dict[str, mc.Missile] = {}
        self.events: list[dict] = []
        self._missile_seq = 0
        self._pending_kinetics: dict[str, tuple[Vec3, float, float]] = {}
        self._catalog = catalog

    # -- membership --------------------------------------------------------

    def add_aircraft(self, machine_id: str, team: str, spec: mc.AircraftSpec,
                     body: BodyState) -> mc.Aircraft:
        if machine_id in self.machines:
            raise WorldError(f"machine id {machine_id!r} already present")
        aircraft = mc.Aircraft(machine_id=machine_id, team=team, spec=spec, body=body)
        self.machines[machine_id] = aircraft
        return aircraft

    def aircraft(self, machine_id: str) -> mc.Aircraft:
        if machine_id not in self.machines:
            raise WorldError(f"unknown machine {machine_id!r}")
        return self.machines[machine_id]

    def living_enemies(self, of: mc.Aircraft) -> list[mc.Aircraft]:
        return [a for a in self.machines.values()
                if a.team != of.team and a.alive]

    def nearest_enemy(self, of: mc.Aircraft) -> mc.Aircraft | None:
        best, best_d = None, math.inf
        px, py, pz = of.body.position
        for enemy in self.living_enemies(of):
            ex, ey, ez = enemy.body.position
            d = (ex - px) ** 2 + (ey - py) ** 2 + (ez - pz) ** 2
            if d < best_d:
                best, best_d = enemy, d
        return best

    def inbound_missiles(self, target_id: str) -> list[mc.Missile]:
        return [m for m in self.missiles.values()
                if m.active and m.target_id == target_id]

    # -- custom physics ------------------------------------------------------

    def set_custom_physics_mode(self, machine_id: str, enabled: bool) -> None:
        """Toggle external kinematics for one machine. While enabled the
        engine stops integrating it; its state freezes until an update
        arrives and applies at the next tick."""
        aircraft = self.aircraft(machine_id)
        aircraft.custom_physics = bool(enabled)
        if not enabled:
            self._pending_kinetics.pop(machine_id, None)

    def update_machine_kinetics(self, machine_id: str, matrix: list[list[float]]) -> None:
        """Queue an external pose for a machine in custom-physics mode.

        The 4x3 matrix carries the Euler-rate rows for (theta, phi) plus a
        position row; it is validated here and takes effect at the next tick.
        """
        aircraft = self.aircraft(machine_id)
        if not aircraft.custom_physics:
            raise WorldError(
                f"machine {machine_id!r} is not in custom physics mode")
        position, theta, phi = parse_kinetics_matrix(matrix)
        self._pending_kinetics[machine_id] = (position, theta, phi)

    # -- weapons -------------------------------------------------------------

    def fire_missile(self, shooter_id: str) -> LaunchResult:
        """Launch the next loadout missile at the shooter's locked target.

        Refusals, in the order checked: no lock, empty inventory, or the
        target already has the inbound limit flying at it.
        """
        shooter = self.aircraft(shooter_id)
        target_id = shooter.locked_target
        if not shooter.alive or target_id is None or target_id not in self.machines:
            return LaunchResult(None, FireDenied.NO_LOCK)
        if shooter.next_missile_name() is None:
            return LaunchResult(None, FireDenied.NO_MISSILES)
        if len(self.inbound_missiles(target_id)) >= mc.MAX_INBOUND_PER_TARGET:
            return LaunchResult(None, FireDenied.TARGET_SATURATED)

        name = shooter.pop_missile()
        spec = self._missile_spec_lookup(name)
        missile_id = f"m{self._missile_seq}"
        self._missile_seq += 1
        missile = mc.Missile(
            missile_id=missile_id, spec=spec, shooter_id=shooter_id,
            target_id=target_id, position=shooter.body.position,
            velocity=shooter.body.linear_velocity,
            endurance_remaining=spec.endurance,
        )
        self.missiles[missile_id] = missile
        self.events.append({
            "type": "missile_launched", "missile": missile_id,
            "kind": spec.name, "shooter": shooter_id, "target": target_id,
        })
        return LaunchResult(missile, None)

    def spawn_missile(self, spec: mc.MissileSpec, target_id: str, position: Vec3,
                      velocity: Vec3, shooter_id: str = "site") -> mc.Missile:
        """Place a free missile in the world (threat scenarios, tests)."""
        missile_id = f"m{self._missile_seq}"
        self._missile_seq += 1
        missile = mc.Missile(
            missile_id=missile_id, spec=spec, shooter_id=shooter_id,
            target_id=target_id, position=position, velocity=velocity,
            endurance_remaining=spec.endurance,
        )
        self.missiles[missile_id] = missile
        return missile

    def _missile_spec_lookup(self, name: str) -> mc.MissileSpec:
        if self._catalog is None:
            raise WorldError("world has no missile catalog attached")
        return self._catalog.missile_spec(name)

    # -- tick ----------------------------------------------------------------

    def tick(self, commands: dict[str, TickCommand]) -> list[dict]:
        """Advance the world one dt. Phases, each in machine insertion order:

        1. airframe physics (or external kinetics),
        2. lock maintenance and new lock attempts,
        3. gun fire and missile launches,
        4. missile guidance, proximity fuses, endurance expiry,
        5. aliveness adjudication (health and ground).

        Returns the event list for this tick.
        """
        self.events = []
        dt = self.dt

        for aircraft in self.machines.values():
            if not aircraft.alive:
                continue
            command = commands.get(aircraft.machine_id, NEUTRAL_COMMAND)
            aircraft.controls_cache = command.controls
            if aircraft.custom_physics:
                pending = self._pending_kinetics.pop(aircraft.machine_id, None)
                if pending is not None:
                    position, theta, phi = pending
                    old = aircraft.body
                    velocity = (
                        (position[0] - old.position[0]) / dt,
                        (position[1] - old.position[1]) / dt,
                        (position[2] - old.position[2]) / dt,
                    )
                    aircraft.body = BodyState(
                        position=position,
                        orientation=(phi, theta, old.orientation[2]),
                        linear_velocity=velocity,
                        angular_velocity=(0.0, 0.0, 0.0),
                        mass=old.mass,
                    )
                continue
            aircraft.body, _, _ = step_dynamics(
                aircraft.body, command.controls, aircraft.spec.aero, dt,
                self.atmosphere)

        for aircraft in self.machines.values():
            if not aircraft.alive:
                continue
            command = commands.get(aircraft.machine_id, NEUTRAL_COMMAND)
            self._update_lock(aircraft, command.lock_target)

        for aircraft in self.machines.values():
            if not aircraft.alive:
                continue
            command = commands.get(aircraft.machine_id, NEUTRAL_COMMAND)
            if command.gun_trigger:
                self._fire_gun(aircraft)
            if command.launch_missile:
                self.fire_missile(aircraft.machine_id)

        for missile in self.missiles.values():
            if not missile.active:
                continue
            target = self.machines.get(missile.target_id)
            if target is None or not target.alive:
                missile.active = False
                missile.outcome = "expired"
                self.events.append({
                    "type": "missile_expired", "missile": missile.missile_id,
                    "reason": "target_lost",
                })
                continue
            mc.missile_guidance_step(missile, target.body.position, dt, self.atmosphere)
            if not missile.active:
                self.events.append({
                    "type": "missile_expired", "missile": missile.missile_id,
                    "reason": "endurance",
                })
                continue
            if mc.proximity_triggered(missile, target.body.position):
                damage = mc.roll_damage(missile.spec, self.rng)
                target.health = max(0.0, target.health - damage)
                missile.active = False
                missile.outcome = "hit"
                self.events.append({
                    "type": "missile_hit", "missile": missile.missile_id,
                    "kind": missile.spec.name, "shooter": missile.shooter_id,
                    "target": missile.target_id, "damage": damage,
                })

        for aircraft in self.machines.values():
            if not aircraft.alive:
                continue
            if aircraft.health <= 0:
                aircraft.alive = False
                aircraft.locked_target = None
                self.events.append({
                    "type": "destroyed", "machine": aircraft.machine_id,
                    "cause": "shot_down",
                })
            elif aircraft.body.position[1] <= 0.0:
                aircraft.alive = False
                aircraft.locked_target = None
                self.events.append({
                    "type": "destroyed", "machine": aircraft.machine_id,
                    "cause": "crashed",
                })

        self.tick_index += 1
        self.time += dt
        return self.events

    def _update_lock(self, aircraft: mc.Aircraft, desired: str | None) -> None:
        """Locks persist while geometry holds; a desired target is attempted
        each tick and wins over a stale lock when it succeeds."""
        current = aircraft.locked_target
        if desired is not None and desired in self.machines:
            candidate = self.machines[desired]
            if mc.lock_allowed(aircraft, candidate):
                if current != desired:
                    self.events.append({
                        "type": "lock_acquired", "machine": aircraft.machine_id,
                        "target": desired,
                    })
                aircraft.locked_target = desired
                return
        if current is not None:
            target = self.machines.get(current)
            if target is None or not mc.lock_allowed(aircraft, target):
                aircraft.locked_target = None
                self.events.append({
                    "type": "lock_lost", "machine": aircraft.machine_id,
                    "target": current,
                })

    def _fire_gun(self, shooter: mc.Aircraft) -> None:
        """Apply gun damage to every living enemy inside the gun cone. The
        gun has no ammunition counter; damage is rate * dt per tick."""
        amount = mc.GUN_DAMAGE_PER_SECOND * self.dt
        for target in self.living_enemies(shooter):
            if mc.gun_in_cone(shooter, target):
                target.health = max(0.0, target.health - amount)
                self.events.append({
                    "type": "gun_hit", "shooter": shooter.machine_id,
                    "target": target.machine_id, "damage": amount,
                })

    # -- introspection ---------------------------------------------------------

    def snapshot(self) -> dict:
        """JSON-ready dump of every machine, for the wire GetState call."""
        return {
            "time": self.time,
            "tick": self.tick_index,
            "rng_draws": self.rng.draws,
            "aircraft": {
                a.machine_id: {
                    "team": a.team,
                    "type": a.spec.name,
                    "position": list(a.body.position),
                    "orientation": list(a.body.orientation),
                    "linear_velocity": list(a.body.linear_velocity),
                    "angular_velocity": list(a.body.angular_velocity),
                    "health": a.health,
                    "alive": a.alive,
                    "locked_target": a.locked_target,
                    "missiles_remaining": a.missiles_remaining,
                    "custom_physics": a.custom_physics,
                } for a in self.machines.values()
            },
            "missiles": {
                m.missile_id: {
                    "kind": m.spec.name,
                    "shooter": m.shooter_id,
                    "target": m.target_id,
                    "position": list(m.position),
                    "velocity": list(m.velocity),
                    "endurance_remaining": m.endurance_remaining,
                    "active": m.active,
                    "outcome": m.outcome,
                } for m in self.missiles.values()
            },
        }
