"""Clients for the environment server: a TCP client and an in-process
client that passes the same encoded frames straight to an EnvHost.

Both clients encode every request to wire bytes and decode every response
from wire bytes, so a remote run and an in-process run of the same
episode can be compared frame by frame, byte for byte.
"""

from __future__ import annotations

import itertools
import socket

from . import protocol
from .protocol import ProtocolError
from .server import EnvHost


class ClientError(RuntimeError):
    """An Error response from the server."""

    def __init__(self, code: str, message: str) -> None:
        super().__init__(f"{code}: {message}")
        self.code = code


class _BaseClient:
    """Request plumbing shared by the wire and in-process clients."""

    def __init__(self) -> None:
        self._request_ids = itertools.count(1)
        self.last_response_bytes: bytes | None = None

    def _transport(self, frame: bytes) -> bytes:
        raise NotImplementedError

    def _call(self, kind: str, env_id: str | None = None,
              agent_slot: str | None = None,
              payload: dict | None = None) -> dict:
        message = protocol.request(kind, next(self._request_ids),
                                   env_id=env_id, agent_slot=agent_slot,
                                   payload=payload)
        body = self._transport(protocol.encode_frame(message))
        self.last_response_bytes = body
        response = protocol.decode_body(body)
        if response.get("request_id") != message["request_id"]:
            raise ProtocolError(
                f"response correlates to {response.get('request_id')!r}, "
                f"expected {message['request_id']!r}")
        if response.get("kind") == "Error":
            detail = response.get("payload", {})
            raise ClientError(detail.get("code", "unknown"),
                              detail.get("message", ""))
        if response.get("kind") != "Ack":
            raise ProtocolError(f"unexpected response kind "
                                f"{response.get('kind')!r}")
        return response.get("payload", {})

    # -- operations -----------------------------------------------------------

    def create_env(self, scenario, mode: dict | None = None) -> dict:
        payload = {"scenario": scenario}
        if mode is not None:
            payload["mode"] = mode
        return self._call("CreateEnv", payload=payload)

    def destroy_env(self, env_id: str) -> dict:
        return self._call("DestroyEnv", env_id=env_id)

    def list_envs(self) -> list[dict]:
        return self._call("ListEnvs")["envs"]

    def attach(self, env_id: str, slot: str) -> dict:
        return self._call("AttachAgent", env_id=env_id, agent_slot=slot)

    def reset(self, env_id: str, seed: int | None = None) -> dict:
        payload = {} if seed is None else {"seed": seed}
        return self._call("Reset", env_id=env_id, payload=payload)

    def step(self, env_id: str, actions: dict | None = None) -> dict:
        actions = {slot: list(vector)
                   for slot, vector in (actions or {}).items()}
        return self._call("Step", env_id=env_id,
                          payload={"actions": actions})

    def get_state(self, env_id: str) -> dict:
        return self._call("GetState", env_id=env_id)["state"]

    def set_custom_physics(self, env_id: str, machine: str,
                           enabled: bool) -> dict:
        return self._call("SetCustomPhysics", env_id=env_id,
                          payload={"machine": machine, "enabled": enabled})

    def update_kinetics(self, env_id: str, machine: str,
                        matrix) -> dict:
        return self._call("UpdateKinetics", env_id=env_id,
                          payload={"machine": machine,
                                   "matrix": [list(row) for row in matrix]})


class RemoteEnvClient(_BaseClient):
    """Blocking TCP client; one in-flight request at a time."""

    def __init__(self, address: str | None = None,
                 connect_timeout: float = 10.0) -> None:
        super().__init__()
        from .server import default_bind, parse_bind
        self.address = address if address is not None else default_bind()
        host, port = parse_bind(self.address)
        self._sock = socket.create_connection((host, port),
                                              timeout=connect_timeout)
        self._sock.settimeout(None)

    def _transport(self, frame: bytes) -> bytes:
        self._sock.sendall(frame)
        body = protocol.read_frame_bytes(self._sock)
        if body is None:
            raise ProtocolError("server closed the connection")
        return body

    def close(self) -> None:
        self._sock.close()

    def __enter__(self) -> "RemoteEnvClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class InProcessClient(_BaseClient):
    """Same frames, no socket: requests go straight into an EnvHost."""

    def __init__(self, host: EnvHost | None = None) -> None:
        super().__init__()
        self.host = host if host is not None else EnvHost()

    def _transport(self, frame: bytes) -> bytes:
        body = frame[protocol.LENGTH_PREFIX.size:]
        try:
            message = protocol.validate_request(protocol.decode_body(body))
        except ProtocolError as exc:
            response = protocol.error(None, "protocol", str(exc))
        else:
            response = self.host.handle(message, self)
        encoded = protocol.encode_frame(response)
        return encoded[protocol.LENGTH_PREFIX.size:]

    def close(self) -> None:
        self.host.detach_connection(self)

    def __enter__(self) -> "InProcessClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
