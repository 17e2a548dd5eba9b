"""Deterministic stepping engine: synchronous and asynchronous run modes,
JSON Lines trace recording, and bit-exact replay verification.

Synchronous mode advances exactly one physics tick per inference call.
Asynchronous mode holds the supplied action for a fixed number of ticks, a
deterministic tick ratio with no wall-clock dependence, so async episodes
replay as exactly as synchronous ones. Traces record every tick regardless
of mode; a ratio of 1 produces a trace bit-identical to synchronous mode.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .machines import SpecCatalog
from .scenario import ActionVec, Environment, ScenarioConfig, ScenarioError, StepResult

TRACE_SCHEMA = 1


@dataclass(frozen=True, slots=True)
class RunMode:
    kind: str = "synchronous"
    ticks_per_inference: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("synchronous", "asynchronous"):
            raise ScenarioError(f"unknown run mode kind {self.kind!r}")
        if self.ticks_per_inference < 1:
            raise ScenarioError(
                f"ticks_per_inference must be >= 1, got "
                f"{self.ticks_per_inference}")
        if self.kind == "synchronous" and self.ticks_per_inference != 1:
            raise ScenarioError(
                "synchronous mode advances one tick per inference")

    @classmethod
    def synchronous(cls) -> "RunMode":
        return cls("synchronous", 1)

    @classmethod
    def asynchronous(cls, ticks_per_inference: int) -> "RunMode":
        return cls("asynchronous", ticks_per_inference)

    def to_dict(self) -> dict:
        return {"kind": self.kind,
                "ticks_per_inference": self.ticks_per_inference}

    @classmethod
    def from_dict(cls, data: dict) -> "RunMode":
        return cls(**data)


@dataclass(frozen=True, slots=True)
class TraceRecord:
    """One physics tick: what each slot saw, did, and earned, the world
    events of the tick, and the cumulative RNG draw count."""

    step: int
    agents: dict
    events: tuple
    rng_draws: int

    def to_dict(self) -> dict:
        return {"step": self.step, "agents": self.agents,
                "events": list(self.events), "rng_draws": self.rng_draws}

    @classmethod
    def from_dict(cls, data: dict) -> "TraceRecord":
        return cls(step=data["step"], agents=data["agents"],
                   events=tuple(data["events"]), rng_draws=data["rng_draws"])


def _dumps(data: dict) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"),
                      allow_nan=False)


class TraceWriter:
    """JSON Lines sink: one header line, then one line per physics tick."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._handle = open(self.path, "w", encoding="utf-8")

    def write_header(self, config: ScenarioConfig, seed: int,
                     mode: RunMode) -> None:
        self._handle.write(_dumps({
            "schema": TRACE_SCHEMA,
            "kind": "trace",
            "config": config.to_dict(),
            "seed": seed,
            "mode": mode.to_dict(),
        }) + "\n")

    def write_record(self, record: TraceRecord) -> None:
        self._handle.write(_dumps(record.to_dict()) + "\n")

    def close(self) -> None:
        self._handle.close()

    def __enter__(self) -> "TraceWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_trace(path: str | Path) -> tuple[dict, list[TraceRecord]]:
    with open(path, encoding="utf-8") as handle:
        lines = [line for line in handle if line.strip()]
    if not lines:
        raise ScenarioError(f"empty trace file {path}")
    header = json.loads(lines[0])
    if header.get("schema") != TRACE_SCHEMA or header.get("kind") != "trace":
        raise ScenarioError(
            f"not a schema-{TRACE_SCHEMA} trace file: {path}")
    records = [TraceRecord.from_dict(json.loads(line)) for line in lines[1:]]
    for index, record in enumerate(records, start=1):
        if record.step != index:
            raise ScenarioError(
                f"trace steps must be gapless from 1, found {record.step} "
                f"at line {index + 1}")
    return header, records


class Session:
    """Runs one Environment under a RunMode, optionally recording a trace.

    step() performs one inference: one tick when synchronous, up to
    ticks_per_inference held ticks when asynchronous (stopping at episode
    end). Rewards accumulate across held ticks; the observation returned is
    the latest one.
    """

    def __init__(self, env: Environment, mode: RunMode | None = None,
                 writer: TraceWriter | None = None) -> None:
        self.env = env
        self.mode = mode if mode is not None else RunMode.synchronous()
        self.writer = writer
        self.ticks = 0

    def reset(self, seed: int | None = None):
        observations = self.env.reset(seed)
        self.ticks = 0
        if self.writer is not None:
            self.writer.write_header(self.env.config, self.env.seed_used,
                                     self.mode)
        return observations

    def step(self, actions: dict[str, ActionVec] | None = None,
             ) -> dict[str, StepResult]:
        """One inference: apply the actions for the mode's tick budget."""
        merged: dict[str, StepResult] = {}
        for _ in range(self.mode.ticks_per_inference):
            results = self.env.step(actions)
            self.ticks += 1
            if self.writer is not None:
                self.writer.write_record(self._record(results))
            for slot, result in results.items():
                seen = merged.get(slot)
                reward = result.reward + (seen.reward if seen else 0.0)
                merged[slot] = StepResult(result.observation, reward,
                                          result.done, result.info)
            if self.env.done:
                break
        return merged

    def _record(self, results: dict[str, StepResult]) -> TraceRecord:
        controls = self.env.last_controls
        agents = {}
        for slot, result in results.items():
            applied = controls.get(slot)
            action = ([applied.yaw_level, applied.pitch_level,
                       applied.roll_level] if applied is not None
                      else [0.0, 0.0, 0.0])
            agents[slot] = {
                "observation": result.observation.as_vector(),
                "action": action,
                "reward": result.reward,
                "done": result.done,
                "status": result.info.get("status"),
            }
        return TraceRecord(step=self.ticks, agents=agents,
                           events=tuple(self.env.last_events),
                           rng_draws=self.env.world.rng.draws)


def run_episode(env: Environment, mode: RunMode | None = None,
                seed: int | None = None,
                writer: TraceWriter | None = None,
                policy=None) -> dict:
    """Drive one full episode; returns totals per slot plus the outcome.

    policy(observations) -> actions dict supplies external-slot actions each
    inference; bot slots steer themselves. Without a policy, external slots
    hold neutral surfaces.
    """
    session = Session(env, mode, writer)
    observations = session.reset(seed)
    totals = {slot: 0.0 for slot in env.slots}
    while not env.done:
        actions = policy(observations) if policy is not None else None
        results = session.step(actions)
        observations = {slot: result.observation
                        for slot, result in results.items()}
        for slot, result in results.items():
            totals[slot] += result.reward
    return {
        "seed": env.seed_used,
        "ticks": session.ticks,
        "returns": totals,
        "statuses": env.adjudicate(),
        "outcome": env.outcome(),
    }


@dataclass(frozen=True, slots=True)
class Divergence:
    step: int
    slot: str | None
    quantity: str
    expected: object
    actual: object

    def describe(self) -> str:
        where = f"step {self.step}" + (f", slot {self.slot}"
                                       if self.slot else "")
        return (f"first divergence at {where}: {self.quantity} expected "
                f"{self.expected!r}, got {self.actual!r}")


@dataclass(frozen=True, slots=True)
class ReplayReport:
    ok: bool
    ticks_checked: int
    divergence: Divergence | None = None

    def describe(self) -> str:
        if self.ok:
            return f"replay ok: {self.ticks_checked} ticks bit-identical"
        return self.divergence.describe()


def replay(path: str | Path,
           catalog: SpecCatalog | None = None) -> ReplayReport:
    """Re-run a trace from its recorded config and seed, feeding the
    recorded external actions back in, and compare every tick bit-exactly.
    """
    header, records = read_trace(path)
    config = ScenarioConfig.from_dict(header["config"])
    env = Environment(config, catalog)
    env.reset(seed=header["seed"])
    external = set(env.external_slots)

    for record in records:
        actions = {
            slot: ActionVec(rudder=data["action"][0],
                            elevator=data["action"][1],
                            aileron=data["action"][2])
            for slot, data in record.agents.items() if slot in external
        }
        results = env.step(actions)
        divergence = _compare_tick(record, results, env)
        if divergence is not None:
            return ReplayReport(ok=False, ticks_checked=record.step - 1,
                                divergence=divergence)
    return ReplayReport(ok=True, ticks_checked=len(records))


def _compare_tick(record: TraceRecord, results: dict[str, StepResult],
                  env: Environment) -> Divergence | None:
    recorded_slots = sorted(record.agents)
    if recorded_slots != sorted(results):
        return Divergence(record.step, None, "slots", recorded_slots,
                          sorted(results))
    for slot in recorded_slots:
        expected = record.agents[slot]
        actual = results[slot]
        if actual.observation.as_vector() != expected["observation"]:
            return Divergence(record.step, slot, "observation",
                              expected["observation"],
                              actual.observation.as_vector())
        if actual.reward != expected["reward"]:
            return Divergence(record.step, slot, "reward",
                              expected["reward"], actual.reward)
        if actual.done != expected["done"]:
            return Divergence(record.step, slot, "done",
                              expected["done"], actual.done)
    if list(env.last_events) != list(record.events):
        return Divergence(record.step, None, "events",
                          list(record.events), list(env.last_events))
    if env.world.rng.draws != record.rng_draws:
        return Divergence(record.step, None, "rng_draws",
                          record.rng_draws, env.world.rng.draws)
    return None


def measure_throughput(env: Environment, ticks: int = 2000,
                       seed: int = 0) -> float:
    """Physics ticks per wall-clock second, resetting as episodes end."""
    if ticks <= 0:
        raise ScenarioError(f"ticks must be > 0, got {ticks}")
    env.reset(seed=seed)
    done = 0
    start = time.perf_counter()
    while done < ticks:
        if env.done:
            seed += 1
            env.reset(seed=seed)
        env.step()
        done += 1
    elapsed = time.perf_counter() - start
    return done / elapsed
