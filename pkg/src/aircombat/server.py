"""Multi-environment TCP server: hosts many independent environments,
attaches remote agents to slots, and drives ticks over the wire protocol.

Environment fleet semantics:
- CreateEnv assigns env seed = seed_base + creation index, so a fleet of
  environments is reproducible from one base seed.
- Each environment is serialized by its own lock; different environments
  step concurrently with no shared mutable state.
- Multi-agent ticks use a barrier: once any slot is attached, the tick
  fires only when every attached slot has submitted an action. A barrier
  that waits longer than the timeout fails the episode deterministically;
  every parked request gets an Error and the env requires a Reset.
"""

from __future__ import annotations

import dataclasses
import itertools
import os
import socketserver
import threading
import time

from . import protocol
from .machines import SpecCatalog, load_specs
from .protocol import ProtocolError
from .runtime import RunMode, Session
from .scenario import (
    ACTION_SIZE,
    OBSERVATION_SIZE,
    ActionVec,
    Environment,
    ScenarioConfig,
    scenario_catalog,
)

BIND_ENV_VAR = "AIRCOMBAT_BIND"
DEFAULT_BIND = "127.0.0.1:10301"
DEFAULT_MAX_ENVS = 16
DEFAULT_BARRIER_TIMEOUT = 30.0


def default_bind() -> str:
    return os.environ.get(BIND_ENV_VAR, DEFAULT_BIND)


def parse_bind(address: str) -> tuple[str, int]:
    host, sep, port = address.rpartition(":")
    if not sep or not host:
        raise ProtocolError(f"bind address must be host:port, got {address!r}")
    try:
        return host, int(port)
    except ValueError as exc:
        raise ProtocolError(f"bad port in bind address {address!r}") from exc


def step_payload(results, session: Session) -> dict:
    """The Step response body; also the in-process comparison shape."""
    return {
        "results": {
            slot: {
                "observation": result.observation.as_vector(),
                "reward": result.reward,
                "done": result.done,
                "status": result.info.get("status"),
            } for slot, result in results.items()
        },
        "tick": session.ticks,
        "events": list(session.env.last_events),
        "episode_done": session.env.done,
    }


def reset_payload(observations, seed: int) -> dict:
    return {
        "observations": {slot: obs.as_vector()
                         for slot, obs in observations.items()},
        "seed": seed,
    }


class _EnvEntry:
    """One hosted environment plus its barrier state."""

    def __init__(self, env_id: str, session: Session, seed: int) -> None:
        self.env_id = env_id
        self.session = session
        self.seed = seed
        self.condition = threading.Condition()
        self.attached: dict[str, object] = {}    # slot -> connection token
        self.pending: dict[str, ActionVec] = {}
        self.generation = 0
        self.epoch = 0
        self.failed = False
        self.last_payload: dict | None = None

    @property
    def env(self) -> Environment:
        return self.session.env


class EnvHost:
    """Transport-agnostic request handling for the environment fleet."""

    def __init__(self, catalog: SpecCatalog | None = None,
                 max_envs: int = DEFAULT_MAX_ENVS, seed_base: int = 0,
                 barrier_timeout: float = DEFAULT_BARRIER_TIMEOUT) -> None:
        self.catalog = catalog if catalog is not None else load_specs()
        self.max_envs = max_envs
        self.seed_base = seed_base
        self.barrier_timeout = barrier_timeout
        self._fleet_lock = threading.Lock()
        self._envs: dict[str, _EnvEntry] = {}
        self._creation_counter = itertools.count()

    # -- dispatch -------------------------------------------------------------

    def handle(self, message: dict, conn) -> dict:
        """One validated request to one response, same request_id."""
        request_id = message.get("request_id")
        kind = message["kind"]
        payload = message.get("payload", {})
        try:
            handler = getattr(self, f"_handle_{_snake(kind)}")
            return handler(message, payload, conn, request_id)
        except ProtocolError as exc:
            return protocol.error(request_id, "protocol", str(exc))
        except ValueError as exc:
            # ScenarioError, WorldError, KineticsMatrixError: engine-side
            # contract violations, connection stays usable
            return protocol.error(request_id, "engine", str(exc))

    def detach_connection(self, conn) -> None:
        """Drop a connection's slot claims and wake any parked barriers."""
        with self._fleet_lock:
            entries = list(self._envs.values())
        for entry in entries:
            with entry.condition:
                stale = [slot for slot, owner in entry.attached.items()
                         if owner is conn]
                for slot in stale:
                    del entry.attached[slot]
                if stale:
                    entry.condition.notify_all()

    def _entry(self, message: dict) -> _EnvEntry:
        env_id = message.get("env_id")
        if env_id is None:
            raise ProtocolError("request requires env_id")
        with self._fleet_lock:
            entry = self._envs.get(env_id)
        if entry is None:
            raise ProtocolError(f"unknown env {env_id!r}")
        return entry

    # -- fleet ops ------------------------------------------------------------

    def _handle_create_env(self, message, payload, conn, request_id):
        scenario = payload.get("scenario")
        if scenario is None:
            raise ProtocolError("CreateEnv payload requires 'scenario'")
        if isinstance(scenario, str):
            catalog = scenario_catalog()
            if scenario not in catalog:
                raise ProtocolError(
                    f"unknown packaged scenario {scenario!r}; have "
                    + ", ".join(sorted(catalog)))
            config = catalog[scenario]
        else:
            config = ScenarioConfig.from_dict(scenario)
        mode = (RunMode.from_dict(payload["mode"]) if "mode" in payload
                else RunMode.synchronous())

        with self._fleet_lock:
            if len(self._envs) >= self.max_envs:
                return protocol.error(
                    request_id, "capacity",
                    f"capacity: server limit is {self.max_envs} environments")
            index = next(self._creation_counter)
            seed = self.seed_base + index
            config = dataclasses.replace(config, seed=seed)
            env_id = f"env-{index}"
            session = Session(Environment(config, self.catalog), mode)
            self._envs[env_id] = _EnvEntry(env_id, session, seed)
        return protocol.ack(request_id, {
            "env_id": env_id,
            "seed": seed,
            "mode": mode.to_dict(),
            "slots": session.env.slots,
            "external_slots": session.env.external_slots,
            "observation_size": OBSERVATION_SIZE,
            "action_size": ACTION_SIZE,
        })

    def _handle_destroy_env(self, message, payload, conn, request_id):
        entry = self._entry(message)
        with self._fleet_lock:
            self._envs.pop(entry.env_id, None)
        with entry.condition:
            entry.epoch += 1
            entry.condition.notify_all()
        return protocol.ack(request_id, {"env_id": entry.env_id})

    def _handle_list_envs(self, message, payload, conn, request_id):
        with self._fleet_lock:
            entries = list(self._envs.values())
        summaries = []
        for entry in sorted(entries, key=lambda e: e.env_id):
            with entry.condition:
                summaries.append({
                    "env_id": entry.env_id,
                    "mode": entry.session.mode.to_dict(),
                    "scenario_mode": entry.env.config.mode.value,
                    "seed": entry.seed,
                    "tick": entry.session.ticks,
                    "episode_done": (entry.env.world is not None
                                     and entry.env.done),
                    "attached_slots": sorted(entry.attached),
                })
        return protocol.ack(request_id, {"envs": summaries})

    # -- per-env ops ----------------------------------------------------------

    def _handle_attach_agent(self, message, payload, conn, request_id):
        entry = self._entry(message)
        slot = message.get("agent_slot")
        if slot is None:
            raise ProtocolError("AttachAgent requires agent_slot")
        if slot not in entry.env.slots:
            raise ProtocolError(f"unknown slot {slot!r}")
        if slot not in entry.env.external_slots:
            raise ProtocolError(f"slot {slot!r} is bot-controlled")
        with entry.condition:
            owner = entry.attached.get(slot)
            if owner is not None and owner is not conn:
                return protocol.error(request_id, "slot_taken",
                                      f"slot {slot!r} is already attached")
            entry.attached[slot] = conn
        return protocol.ack(request_id, {
            "env_id": entry.env_id,
            "agent_slot": slot,
            "observation_size": OBSERVATION_SIZE,
            "action_size": ACTION_SIZE,
        })

    def _handle_reset(self, message, payload, conn, request_id):
        entry = self._entry(message)
        seed = payload.get("seed", entry.seed)
        with entry.condition:
            entry.epoch += 1
            entry.pending.clear()
            entry.failed = False
            entry.condition.notify_all()
            observations = entry.session.reset(seed)
        return protocol.ack(request_id, reset_payload(observations, seed))

    def _handle_get_state(self, message, payload, conn, request_id):
        entry = self._entry(message)
        with entry.condition:
            return protocol.ack(request_id, {"state": entry.env.snapshot()})

    def _handle_set_custom_physics(self, message, payload, conn, request_id):
        entry = self._entry(message)
        machine = payload.get("machine")
        if machine is None or "enabled" not in payload:
            raise ProtocolError(
                "SetCustomPhysics payload requires machine and enabled")
        with entry.condition:
            entry.env.world.set_custom_physics_mode(machine,
                                                    bool(payload["enabled"]))
        return protocol.ack(request_id, {"machine": machine,
                                         "enabled": bool(payload["enabled"])})

    def _handle_update_kinetics(self, message, payload, conn, request_id):
        entry = self._entry(message)
        machine = payload.get("machine")
        matrix = payload.get("matrix")
        if machine is None or matrix is None:
            raise ProtocolError(
                "UpdateKinetics payload requires machine and matrix")
        with entry.condition:
            entry.env.world.update_machine_kinetics(machine, matrix)
        return protocol.ack(request_id, {"machine": machine})

    def _handle_step(self, message, payload, conn, request_id):
        entry = self._entry(message)
        actions = {}
        for slot, vector in (payload.get("actions") or {}).items():
            if slot not in entry.env.external_slots:
                raise ProtocolError(
                    f"slot {slot!r} does not take external actions")
            actions[slot] = ActionVec.from_sequence(vector)

        with entry.condition:
            if entry.failed:
                return protocol.error(
                    request_id, "episode_failed",
                    "episode failed on a barrier timeout; Reset required")
            if entry.attached:
                for slot in actions:
                    if entry.attached.get(slot) is not conn:
                        return protocol.error(
                            request_id, "not_attached",
                            f"slot {slot!r} is not attached to this "
                            "connection")
            entry.pending.update(actions)
            my_generation = entry.generation
            my_epoch = entry.epoch
            deadline = time.monotonic() + self.barrier_timeout
            while True:
                if set(entry.attached) <= set(entry.pending):
                    return self._fire(entry, request_id)
                if entry.generation != my_generation:
                    # the tick this submission joined has completed; the
                    # submitter's slot stays claimed until it returns, so
                    # no later tick can have fired
                    return protocol.ack(request_id, entry.last_payload)
                if entry.epoch != my_epoch:
                    return protocol.error(
                        request_id, "interrupted",
                        "environment was reset or destroyed while waiting")
                if entry.failed:
                    return protocol.error(
                        request_id, "episode_failed",
                        "barrier timed out; episode failed, Reset required")
                remaining = deadline - time.monotonic()
                if remaining <= 0.0:
                    entry.failed = True
                    entry.condition.notify_all()
                    return protocol.error(
                        request_id, "barrier_timeout",
                        f"barrier incomplete after {self.barrier_timeout}s; "
                        "episode failed, Reset required")
                entry.condition.wait(remaining)

    def _fire(self, entry: _EnvEntry, request_id) -> dict:
        """Advance one inference with the gathered actions. Runs with the
        entry condition held; the engine step itself is single-threaded."""
        actions = dict(entry.pending)
        entry.pending.clear()
        try:
            results = entry.session.step(actions)
        except ValueError as exc:
            entry.generation += 1
            entry.last_payload = None
            entry.condition.notify_all()
            return protocol.error(request_id, "engine", str(exc))
        entry.last_payload = step_payload(results, entry.session)
        entry.generation += 1
        entry.condition.notify_all()
        return protocol.ack(request_id, entry.last_payload)


def _snake(kind: str) -> str:
    out = []
    for char in kind:
        if char.isupper() and out:
            out.append("_")
        out.append(char.lower())
    return "".join(out)


class _Handler(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        host: EnvHost = self.server.host
        sock = self.request
        try:
            while True:
                try:
                    body = protocol.read_frame_bytes(sock)
                except ProtocolError:
                    break   # framing broken; no way to resync
                if body is None:
                    break
                try:
                    message = protocol.validate_request(
                        protocol.decode_body(body))
                except ProtocolError as exc:
                    request_id = None
                    try:
                        request_id = protocol.decode_body(body).get(
                            "request_id")
                    except ProtocolError:
                        pass
                    protocol.write_frame(
                        sock, protocol.error(request_id, "protocol",
                                             str(exc)))
                    continue
                protocol.write_frame(sock, host.handle(message, self))
        finally:
            host.detach_connection(self)


class Server(socketserver.ThreadingTCPServer):
    """TCP front end over an EnvHost; one thread per connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, bind: str | None = None,
                 catalog: SpecCatalog | None = None,
                 max_envs: int = DEFAULT_MAX_ENVS, seed_base: int = 0,
                 barrier_timeout: float = DEFAULT_BARRIER_TIMEOUT) -> None:
        address = parse_bind(bind if bind is not None else default_bind())
        self.host = EnvHost(catalog=catalog, max_envs=max_envs,
                            seed_base=seed_base,
                            barrier_timeout=barrier_timeout)
        super().__init__(address, _Handler)

    @property
    def bound_address(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"

    def serve_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread
