"""Task layer: scenario configs, seeded spawning, the 13-signal observation,
the 3-float action mapping, rewards, and the episode-adjudicating Environment.

A scenario is a JSON-serializable config naming a mode (navigation, dogfight,
missile evasion), a spawn region (two nested squares plus an altitude band),
and a list of agent slots with their controllers. An Environment owns one
world per reset and steps every slot each tick: external slots take the
3-float action vector, bot slots run the scripted policies.

Reward per step is -distance_scale * distance to the mode's objective point
(the goal, or the nearest living enemy; evasion is survival-only), plus a
one-time +goal_bonus / failure_penalty on the terminal transition.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import machines as mc
from .autopilot import (
    MISSILE_COOLDOWN,
    AutopilotState,
    bearing_to,
    combat_policy_step,
    hold_step,
    navigation_policy_step,
)
from .machines import SpecCatalog, gun_in_cone, load_specs, lock_allowed
from .physics import BodyState, ControlInput, Vec3, clamp
from .world import TickCommand, World

OBSERVATION_SIZE = 13
ACTION_SIZE = 3
AGENT_THRUST = 0.7          # fixed throttle: the action space has no throttle axis

SPAWN_SPEED = 250.0         # m/s, level flight at spawn
SPAWN_HEADING_JITTER = math.radians(15.0)

EVASION_SPAWN_RANGE = 2800.0    # m from the agent, inside lock range
EVASION_MISSILE_SPEED = 300.0   # m/s initial closing speed

DOGFIGHT_FORMATS = ((1, 1), (1, 2), (2, 2))
MAX_EVASION_MISSILES = 3

CONTROLLERS = ("external", "combat_bot", "navigation_bot", "hold_bot")

SUCCESS_STATUSES = frozenset({"success", "victory", "evaded"})


class ScenarioError(ValueError):
    """A scenario config or episode call that violates the contract."""


class Mode(enum.Enum):
    NAVIGATION = "navigation"
    DOGFIGHT = "dogfight"
    MISSILE_EVASION = "missile_evasion"


@dataclass(frozen=True, slots=True)
class SpawnRegion:
    """Annulus between two nested axis-aligned squares, plus an altitude band.

    Both squares are centered on the world origin; half sizes are the
    distance from center to a side.
    """

    outer_half_size: float = 6000.0
    inner_half_size: float = 4500.0
    altitude_min: float = 1000.0
    altitude_max: float = 4000.0

    def __post_init__(self) -> None:
        if not 0.0 < self.inner_half_size < self.outer_half_size:
            raise ScenarioError(
                "inner square must sit strictly inside the outer square, got "
                f"inner {self.inner_half_size}, outer {self.outer_half_size}")
        if not 0.0 <= self.altitude_min < self.altitude_max:
            raise ScenarioError(
                f"bad altitude band [{self.altitude_min}, {self.altitude_max}]")

    def contains_plan(self, x: float, z: float) -> bool:
        """Whether (x, z) lies in the annulus (boundaries included)."""
        reach = max(abs(x), abs(z))
        return self.inner_half_size <= reach <= self.outer_half_size

    def to_dict(self) -> dict:
        return {
            "outer_half_size": self.outer_half_size,
            "inner_half_size": self.inner_half_size,
            "altitude_min": self.altitude_min,
            "altitude_max": self.altitude_max,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpawnRegion":
        return cls(**data)


@dataclass(frozen=True, slots=True)
class AgentSlot:
    """One controlled aircraft: slot name, controller, airframe."""

    slot: str
    controller: str = "external"
    aircraft: str = "F16"

    def __post_init__(self) -> None:
        if self.controller not in CONTROLLERS:
            raise ScenarioError(
                f"unknown controller {self.controller!r}; expected one of "
                f"{CONTROLLERS}")
        if not (self.slot.startswith("ally") or self.slot.startswith("enemy")):
            raise ScenarioError(
                f"slot name {self.slot!r} must start with 'ally' or 'enemy'")

    @property
    def team(self) -> str:
        return "ally" if self.slot.startswith("ally") else "enemy"

    def to_dict(self) -> dict:
        return {"slot": self.slot, "controller": self.controller,
                "aircraft": self.aircraft}

    @classmethod
    def from_dict(cls, data: dict) -> "AgentSlot":
        return cls(**data)


@dataclass(frozen=True, slots=True)
class RewardSpec:
    distance_scale: float = 1e-5    # reward per meter of objective distance
    goal_bonus: float = 100.0
    failure_penalty: float = -100.0
    goal_radius: float = 200.0

    def __post_init__(self) -> None:
        if not self.distance_scale > 0.0:
            raise ScenarioError(
                f"distance_scale must be > 0, got {self.distance_scale}")
        if not self.goal_radius > 0.0:
            raise ScenarioError(
                f"goal_radius must be > 0, got {self.goal_radius}")

    def to_dict(self) -> dict:
        return {
            "distance_scale": self.distance_scale,
            "goal_bonus": self.goal_bonus,
            "failure_penalty": self.failure_penalty,
            "goal_radius": self.goal_radius,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RewardSpec":
        return cls(**data)


@dataclass(frozen=True, slots=True)
class ScenarioConfig:
    mode: Mode
    agents: tuple[AgentSlot, ...]
    spawn_region: SpawnRegion = field(default_factory=SpawnRegion)
    goal: Vec3 | None = None
    reward: RewardSpec = field(default_factory=RewardSpec)
    episode_max_steps: int = 2000
    dt: float = 0.02
    seed: int = 0
    missile_count: int = 0      # missile_evasion only
    missile_name: str = "Mica"

    def __post_init__(self) -> None:
        object.__setattr__(self, "agents", tuple(self.agents))
        if self.goal is not None:
            object.__setattr__(self, "goal", tuple(float(c) for c in self.goal))
        if not self.agents:
            raise ScenarioError("at least one agent slot is required")
        names = [a.slot for a in self.agents]
        if len(set(names)) != len(names):
            raise ScenarioError(f"duplicate slot names in {names}")
        if not self.dt > 0.0:
            raise ScenarioError(f"dt must be > 0, got {self.dt}")
        if self.episode_max_steps <= 0:
            raise ScenarioError(
                f"episode_max_steps must be > 0, got {self.episode_max_steps}")
        if not 0 <= self.seed < 2 ** 64:
            raise ScenarioError(f"seed must be a 64-bit integer, got {self.seed}")
        getattr(self, f"_check_{self.mode.value}")()

    # -- per-mode shape checks -------------------------------------------

    def _count(self, team: str) -> int:
        return sum(1 for a in self.agents if a.team == team)

    def _forbid_missiles(self) -> None:
        if self.missile_count != 0:
            raise ScenarioError(
                f"missile_count is only valid for missile_evasion, got "
                f"{self.missile_count}")

    def _check_navigation(self) -> None:
        self._forbid_missiles()
        if self.goal is None or len(self.goal) != 3:
            raise ScenarioError("navigation requires a 3-vector goal")
        if len(self.agents) != 1 or self.agents[0].team != "ally":
            raise ScenarioError("navigation takes exactly one ally slot")
        if self.agents[0].controller == "combat_bot":
            raise ScenarioError("navigation has nothing for a combat_bot to do")

    def _check_dogfight(self) -> None:
        self._forbid_missiles()
        shape = (self._count("ally"), self._count("enemy"))
        if shape not in DOGFIGHT_FORMATS:
            raise ScenarioError(
                f"dogfight format {shape[0]}v{shape[1]} not in "
                + ", ".join(f"{m}v{n}" for m, n in DOGFIGHT_FORMATS))
        for agent in self.agents:
            if agent.controller == "navigation_bot":
                raise ScenarioError("navigation_bot has no goal in a dogfight")

    def _check_missile_evasion(self) -> None:
        if len(self.agents) != 1 or self.agents[0].team != "ally":
            raise ScenarioError("missile_evasion takes exactly one ally slot")
        if not 1 <= self.missile_count <= MAX_EVASION_MISSILES:
            raise ScenarioError(
                f"missile_count must be 1..{MAX_EVASION_MISSILES}, got "
                f"{self.missile_count}")
        if self.agents[0].controller not in ("external", "hold_bot"):
            raise ScenarioError(
                "missile_evasion supports external or hold_bot controllers")

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        data = {
            "mode": self.mode.value,
            "agents": [a.to_dict() for a in self.agents],
            "spawn_region": self.spawn_region.to_dict(),
            "reward": self.reward.to_dict(),
            "episode_max_steps": self.episode_max_steps,
            "dt": self.dt,
            "seed": self.seed,
        }
        if self.goal is not None:
            data["goal"] = list(self.goal)
        if self.mode is Mode.MISSILE_EVASION:
            data["missile_count"] = self.missile_count
            data["missile_name"] = self.missile_name
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        try:
            mode = Mode(data["mode"])
        except (KeyError, ValueError) as exc:
            raise ScenarioError(f"bad scenario mode: {exc}") from exc
        known = {"mode", "agents", "spawn_region", "goal", "reward",
                 "episode_max_steps", "dt", "seed", "missile_count",
                 "missile_name"}
        extra = set(data) - known
        if extra:
            raise ScenarioError(f"unknown scenario fields: {sorted(extra)}")
        kwargs: dict = {"mode": mode}
        try:
            kwargs["agents"] = tuple(
                AgentSlot.from_dict(a) for a in data["agents"])
        except KeyError as exc:
            raise ScenarioError("scenario is missing 'agents'") from exc
        if "spawn_region" in data:
            kwargs["spawn_region"] = SpawnRegion.from_dict(data["spawn_region"])
        if "reward" in data:
            kwargs["reward"] = RewardSpec.from_dict(data["reward"])
        if "goal" in data:
            kwargs["goal"] = tuple(data["goal"])
        for key in ("episode_max_steps", "dt", "seed", "missile_count",
                    "missile_name"):
            if key in data:
                kwargs[key] = data[key]
        return cls(**kwargs)


def load_scenario(path: str | Path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as handle:
        return ScenarioConfig.from_dict(json.load(handle))


def scenario_dir() -> Path:
    return mc.default_data_dir() / "scenarios"


def scenario_catalog(root: str | Path | None = None) -> dict[str, ScenarioConfig]:
    """All packaged scenario configs keyed by file stem."""
    base = Path(root) if root is not None else scenario_dir()
    return {path.stem: load_scenario(path)
            for path in sorted(base.glob("*.json"))}


# -- observation and action ------------------------------------------------


@dataclass(frozen=True, slots=True)
class Observation:
    """The 13 state signals: objective deltas, attitude, speeds, and the
    finite-difference acceleration. heading/pitch_attitude repeat the Euler
    yaw/pitch; both spellings are part of the contract."""

    goal_delta: Vec3
    euler: Vec3
    v_horizontal: float
    v_vertical: float
    heading: float
    pitch_attitude: float
    acceleration: Vec3

    def as_vector(self) -> list[float]:
        return [
            *self.goal_delta,
            *self.euler,
            self.v_horizontal,
            self.v_vertical,
            self.heading,
            self.pitch_attitude,
            *self.acceleration,
        ]


@dataclass(frozen=True, slots=True)
class ActionVec:
    """Control-surface action triple, clamped to [-1, 1] on construction."""

    rudder: float = 0.0
    elevator: float = 0.0
    aileron: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "rudder", clamp(float(self.rudder), -1.0, 1.0))
        object.__setattr__(self, "elevator",
                           clamp(float(self.elevator), -1.0, 1.0))
        object.__setattr__(self, "aileron",
                           clamp(float(self.aileron), -1.0, 1.0))

    @classmethod
    def from_sequence(cls, values) -> "ActionVec":
        if len(values) != ACTION_SIZE:
            raise ScenarioError(
                f"action vector must have {ACTION_SIZE} floats, got "
                f"{len(values)}")
        return cls(rudder=values[0], elevator=values[1], aileron=values[2])

    def as_vector(self) -> list[float]:
        return [self.rudder, self.elevator, self.aileron]

    def to_controls(self) -> ControlInput:
        return ControlInput(
            pitch_level=self.elevator,
            yaw_level=self.rudder,
            roll_level=self.aileron,
            thrust_level=AGENT_THRUST,
        )


def compute_observation(aircraft: mc.Aircraft, goal: Vec3,
                        prev_velocity: Vec3, dt: float) -> Observation:
    """Observation of one aircraft against an objective point.

    Acceleration is the finite difference of velocity across the last tick.
    """
    if not dt > 0.0:
        raise ScenarioError(f"dt must be > 0, got {dt}")
    body = aircraft.body
    px, py, pz = body.position
    vx, vy, vz = body.linear_velocity
    return Observation(
        goal_delta=(goal[0] - px, goal[1] - py, goal[2] - pz),
        euler=body.orientation,
        v_horizontal=math.hypot(vx, vz),
        v_vertical=vy,
        heading=body.orientation[2],
        pitch_attitude=body.orientation[1],
        acceleration=((vx - prev_velocity[0]) / dt,
                      (vy - prev_velocity[1]) / dt,
                      (vz - prev_velocity[2]) / dt),
    )


def sample_spawn(rng: np.random.Generator, region: SpawnRegion,
                 objective: Vec3) -> BodyState:
    """One seeded spawn: uniform over the annulus area and altitude band,
    level at SPAWN_SPEED, heading at the objective plus jitter.

    The annulus decomposes into four rectangles (north, south, east, west
    bands); a band is picked by area so the position is uniform overall.
    """
    outer = region.outer_half_size
    inner = region.inner_half_size
    side = outer - inner
    areas = (2 * outer * side, 2 * outer * side,
             2 * inner * side, 2 * inner * side)
    pick = rng.uniform(0.0, sum(areas))
    if pick < areas[0]:                                 # north band
        x = rng.uniform(-outer, outer)
        z = rng.uniform(inner, outer)
    elif pick < areas[0] + areas[1]:                    # south band
        x = rng.uniform(-outer, outer)
        z = rng.uniform(-outer, -inner)
    elif pick < areas[0] + areas[1] + areas[2]:         # east band
        x = rng.uniform(inner, outer)
        z = rng.uniform(-inner, inner)
    else:                                               # west band
        x = rng.uniform(-outer, -inner)
        z = rng.uniform(-inner, inner)
    altitude = rng.uniform(region.altitude_min, region.altitude_max)
    heading = bearing_to((x, altitude, z), objective) + rng.uniform(
        -SPAWN_HEADING_JITTER, SPAWN_HEADING_JITTER)
    return BodyState(
        position=(x, altitude, z),
        orientation=(0.0, 0.0, heading),
        linear_velocity=(SPAWN_SPEED * math.sin(heading), 0.0,
                         SPAWN_SPEED * math.cos(heading)),
        angular_velocity=(0.0, 0.0, 0.0),
    )


# -- environment -------------------------------------------------------------


@dataclass(slots=True)
class StepResult:
    observation: Observation
    reward: float
    done: bool
    info: dict


class Environment:
    """One scenario, one world per reset, gym-style stepping.

    step() advances exactly one tick. Per-agent done is sticky: after a
    slot's terminal transition its result repeats with reward 0. Stepping
    after the whole episode ended raises ScenarioError.
    """

    def __init__(self, config: ScenarioConfig,
                 catalog: SpecCatalog | None = None) -> None:
        self.config = config
        self.catalog = catalog if catalog is not None else load_specs()
        try:
            for agent in config.agents:
                self.catalog.aircraft_spec(agent.aircraft)
            if config.mode is Mode.MISSILE_EVASION:
                self.catalog.missile_spec(config.missile_name)
        except KeyError as exc:
            raise ScenarioError(f"unknown machine in scenario: {exc}") from exc
        self.world: World | None = None
        self._steps = 0
        self._episode_over = False
        self._terminal: dict[str, str] = {}
        self._prev_velocity: dict[str, Vec3] = {}
        self._last_obs: dict[str, Observation] = {}
        self._autopilots: dict[str, AutopilotState] = {}
        self._cooldowns: dict[str, float] = {}
        self._evasion_missiles: list[str] = []
        self._last_events: list[dict] = []
        self._last_controls: dict[str, ControlInput] = {}
        self._seed_used: int | None = None

    # -- properties ---------------------------------------------------------

    @property
    def steps(self) -> int:
        return self._steps

    @property
    def done(self) -> bool:
        return self._episode_over

    @property
    def last_events(self) -> list[dict]:
        return self._last_events

    @property
    def last_controls(self) -> dict[str, ControlInput]:
        """Controls applied on the latest tick, per still-alive slot."""
        return self._last_controls

    @property
    def seed_used(self) -> int | None:
        return self._seed_used

    @property
    def slots(self) -> list[str]:
        return [agent.slot for agent in self.config.agents]

    @property
    def external_slots(self) -> list[str]:
        return [a.slot for a in self.config.agents if a.controller == "external"]

    def snapshot(self) -> dict:
        self._require_world()
        return self.world.snapshot()

    # -- episode lifecycle ----------------------------------------------------

    def reset(self, seed: int | None = None) -> dict[str, Observation]:
        """Spawn a fresh world; same seed gives bit-identical spawns."""
        seed = self.config.seed if seed is None else seed
        self._seed_used = seed
        config = self.config
        self.world = World(dt=config.dt, seed=seed, catalog=self.catalog)
        rng = np.random.default_rng(seed)
        self._steps = 0
        self._episode_over = False
        self._terminal = {}
        self._prev_velocity = {}
        self._last_obs = {}
        self._autopilots = {}
        self._cooldowns = {}
        self._evasion_missiles = []
        self._last_events = []
        self._last_controls = {}

        spawn_objective = self._spawn_objective()
        for agent in config.agents:
            body = sample_spawn(rng, config.spawn_region, spawn_objective)
            spec = self.catalog.aircraft_spec(agent.aircraft)
            self.world.add_aircraft(agent.slot, agent.team, spec, body)
            self._prev_velocity[agent.slot] = body.linear_velocity
            self._cooldowns[agent.slot] = 0.0
            target_altitude = (config.goal[1] if config.goal is not None
                               else body.position[1])
            self._autopilots[agent.slot] = AutopilotState(
                target_heading=body.orientation[2],
                target_altitude=(body.position[1]
                                 if agent.controller == "hold_bot"
                                 else target_altitude),
            )

        if config.mode is Mode.MISSILE_EVASION:
            self._spawn_evasion_missiles(rng)

        observations = {}
        for agent in config.agents:
            aircraft = self.world.aircraft(agent.slot)
            observations[agent.slot] = compute_observation(
                aircraft, self._objective_point(agent),
                self._prev_velocity[agent.slot], config.dt)
            self._last_obs[agent.slot] = observations[agent.slot]
        return observations

    def _spawn_objective(self) -> Vec3:
        """Point spawned headings aim at: the goal, or the arena center."""
        if self.config.goal is not None:
            return self.config.goal
        region = self.config.spawn_region
        return (0.0, (region.altitude_min + region.altitude_max) / 2.0, 0.0)

    def _spawn_evasion_missiles(self, rng: np.random.Generator) -> None:
        target_slot = self.config.agents[0].slot
        target = self.world.aircraft(target_slot)
        tx, ty, tz = target.body.position
        spec = self.catalog.missile_spec(self.config.missile_name)
        for _ in range(self.config.missile_count):
            bearing = rng.uniform(-math.pi, math.pi)
            position = (tx + EVASION_SPAWN_RANGE * math.sin(bearing), ty,
                        tz + EVASION_SPAWN_RANGE * math.cos(bearing))
            velocity = (-EVASION_MISSILE_SPEED * math.sin(bearing), 0.0,
                        -EVASION_MISSILE_SPEED * math.cos(bearing))
            missile = self.world.spawn_missile(spec, target_slot, position,
                                               velocity)
            self._evasion_missiles.append(missile.missile_id)

    def step(self, actions: dict[str, ActionVec] | None = None,
             ) -> dict[str, StepResult]:
        """Advance one tick; returns a result per agent slot."""
        self._require_world()
        if self._episode_over:
            raise ScenarioError("episode is over; call reset() first")
        actions = actions or {}
        unknown = set(actions) - set(self.slots)
        if unknown:
            raise ScenarioError(f"actions for unknown slots: {sorted(unknown)}")

        commands: dict[str, TickCommand] = {}
        for agent in self.config.agents:
            aircraft = self.world.aircraft(agent.slot)
            if not aircraft.alive:
                continue
            commands[agent.slot] = self._command_for(
                agent, aircraft, actions.get(agent.slot))
        self._last_controls = {slot: command.controls
                               for slot, command in commands.items()}
        self._last_events = self.world.tick(commands)
        self._steps += 1

        timeout = self._steps >= self.config.episode_max_steps
        results = {agent.slot: self._slot_result(agent, timeout)
                   for agent in self.config.agents}
        self._update_episode_over(timeout)
        return results

    def adjudicate(self) -> dict[str, str | None]:
        """Status per slot (None while its episode leg is still running)."""
        return {agent.slot: self._terminal.get(agent.slot)
                for agent in self.config.agents}

    def outcome(self) -> str | None:
        """Episode outcome: a winning team, 'draw', or None while running."""
        if not self._episode_over:
            return None
        if self.config.mode is Mode.DOGFIGHT:
            ally = any(a.alive for a in self.world.machines.values()
                       if a.team == "ally")
            enemy = any(a.alive for a in self.world.machines.values()
                        if a.team == "enemy")
            if ally == enemy:
                return "draw"
            return "ally" if ally else "enemy"
        status = self._terminal.get(self.config.agents[0].slot)
        return "success" if status in SUCCESS_STATUSES else "failure"

    # -- per-tick internals ---------------------------------------------------

    def _require_world(self) -> None:
        if self.world is None:
            raise ScenarioError("reset() must be called before stepping")

    def _command_for(self, agent: AgentSlot, aircraft: mc.Aircraft,
                     action: ActionVec | None) -> TickCommand:
        dt = self.config.dt
        ap = self._autopilots[agent.slot]
        if agent.controller == "external":
            controls = (action or ActionVec()).to_controls()
            if self.config.mode is Mode.DOGFIGHT:
                return self._armed_command(agent.slot, aircraft, controls)
            return TickCommand(controls=controls)
        if agent.controller == "combat_bot":
            enemy = self.world.nearest_enemy(aircraft)
            if enemy is None:
                return TickCommand(controls=hold_step(ap, aircraft.body, dt))
            controls, decision = combat_policy_step(aircraft, enemy, ap, dt)
            return TickCommand(
                controls=controls,
                gun_trigger=decision.gun_trigger,
                launch_missile=decision.launch_missile,
                lock_target=decision.lock_target,
            )
        if agent.controller == "navigation_bot":
            controls = navigation_policy_step(
                aircraft, self.config.goal, ap, dt)
            return TickCommand(controls=controls)
        return TickCommand(controls=hold_step(ap, aircraft.body, dt))

    def _armed_command(self, slot: str, aircraft: mc.Aircraft,
                       controls: ControlInput) -> TickCommand:
        """Auto lock/fire for external combat slots: the action space has
        no trigger, so weapons run the same rules as the scripted bots."""
        self._cooldowns[slot] = max(0.0, self._cooldowns[slot] - self.config.dt)
        enemy = self.world.nearest_enemy(aircraft)
        if enemy is None:
            return TickCommand(controls=controls)
        launch = False
        if lock_allowed(aircraft, enemy) and self._cooldowns[slot] <= 0.0:
            launch = True
            self._cooldowns[slot] = MISSILE_COOLDOWN
        return TickCommand(
            controls=controls,
            gun_trigger=gun_in_cone(aircraft, enemy),
            launch_missile=launch,
            lock_target=enemy.machine_id,
        )

    def _objective_point(self, agent: AgentSlot) -> Vec3:
        """The mode's objective for this slot: goal point, nearest living
        enemy, or nearest inbound missile; own position when none apply
        (zero deltas, zero distance)."""
        aircraft = self.world.aircraft(agent.slot)
        if self.config.mode is Mode.NAVIGATION:
            return self.config.goal
        if self.config.mode is Mode.DOGFIGHT:
            enemy = self.world.nearest_enemy(aircraft)
            return (enemy.body.position if enemy is not None
                    else aircraft.body.position)
        nearest, best = aircraft.body.position, math.inf
        for missile in self.world.inbound_missiles(agent.slot):
            gap = math.dist(missile.position, aircraft.body.position)
            if gap < best:
                nearest, best = missile.position, gap
        return nearest

    def _slot_result(self, agent: AgentSlot, timeout: bool) -> StepResult:
        slot = agent.slot
        if slot in self._terminal:
            return StepResult(self._last_obs[slot], 0.0, True,
                              {"status": self._terminal[slot]})
        aircraft = self.world.aircraft(slot)
        objective = self._objective_point(agent)
        observation = compute_observation(
            aircraft, objective, self._prev_velocity[slot], self.config.dt)
        self._prev_velocity[slot] = aircraft.body.linear_velocity
        self._last_obs[slot] = observation

        reward = 0.0
        if self.config.mode is not Mode.MISSILE_EVASION:
            reward -= self.config.reward.distance_scale * math.dist(
                aircraft.body.position, objective)
        status = self._terminal_status(aircraft, timeout)
        if status is not None:
            reward += (self.config.reward.goal_bonus
                       if status in SUCCESS_STATUSES
                       else self.config.reward.failure_penalty)
            self._terminal[slot] = status
        return StepResult(observation, reward, status is not None,
                          {"status": status})

    def _terminal_status(self, aircraft: mc.Aircraft,
                         timeout: bool) -> str | None:
        mode = self.config.mode
        if mode is Mode.NAVIGATION:
            if not aircraft.alive:
                return "crashed"
            gap = math.dist(aircraft.body.position, self.config.goal)
            if gap <= self.config.reward.goal_radius:
                return "success"
        elif mode is Mode.DOGFIGHT:
            if not aircraft.alive:
                return "destroyed"
            if not self.world.living_enemies(aircraft):
                return "victory"
        else:
            if not aircraft.alive:
                return "destroyed"
            if all(not self.world.missiles[mid].active
                   for mid in self._evasion_missiles):
                return "evaded"
        return "timeout" if timeout else None

    def _update_episode_over(self, timeout: bool) -> None:
        if timeout:
            self._episode_over = True
            return
        if self.config.mode is Mode.DOGFIGHT:
            teams = {"ally": False, "enemy": False}
            for aircraft in self.world.machines.values():
                if aircraft.alive:
                    teams[aircraft.team] = True
            self._episode_over = not (teams["ally"] and teams["enemy"])
        else:
            slot = self.config.agents[0].slot
            self._episode_over = slot in self._terminal
