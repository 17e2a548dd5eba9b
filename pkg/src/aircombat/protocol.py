"""Wire protocol: length-prefixed canonical JSON frames and the message
vocabulary shared by the server, clients, and the protocol tests.

Framing is a 4-byte big-endian length followed by a UTF-8 JSON body. Bodies
are canonically encoded (sorted keys, compact separators, no NaN/Infinity),
so a given message has exactly one byte representation; equality of frames
is equality of meaning.
"""

from __future__ import annotations

import json
import socket
import struct

PROTOCOL_SCHEMA = 1
LENGTH_PREFIX = struct.Struct(">I")
MAX_FRAME_BYTES = 16 * 1024 * 1024     # reject absurd prefixes from garbage

KINDS = (
    "CreateEnv",
    "DestroyEnv",
    "ListEnvs",
    "AttachAgent",
    "Reset",
    "Step",
    "GetState",
    "SetCustomPhysics",
    "UpdateKinetics",
    "Error",
    "Ack",
)

REQUEST_KINDS = KINDS[:-2]
RESPONSE_KINDS = KINDS[-2:]


class ProtocolError(ValueError):
    """A frame or message that violates the wire contract."""


def canonical_dumps(data) -> str:
    """The one true JSON encoding: sorted keys, compact, finite numbers."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"),
                      allow_nan=False, ensure_ascii=False)


def encode_frame(message: dict) -> bytes:
    body = canonical_dumps(message).encode("utf-8")
    if len(body) > MAX_FRAME_BYTES:
        raise ProtocolError(f"frame body of {len(body)} bytes exceeds limit")
    return LENGTH_PREFIX.pack(len(body)) + body


def decode_body(body: bytes) -> dict:
    try:
        message = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"frame body is not valid JSON: {exc}") from exc
    if not isinstance(message, dict):
        raise ProtocolError("frame body must be a JSON object")
    return message


def recv_exact(sock: socket.socket, count: int) -> bytes | None:
    """Read exactly count bytes; None on a clean EOF at a frame boundary."""
    chunks = []
    remaining = count
    while remaining > 0:
        chunk = sock.recv(remaining)
        if not chunk:
            if remaining == count:
                return None
            raise ProtocolError("connection closed mid-frame")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_frame_bytes(sock: socket.socket) -> bytes | None:
    """One frame body, undecoded; None on clean EOF. Raises when the stream
    itself breaks (truncation, oversize prefix), after which no resync is
    possible; a body that is merely bad JSON leaves the stream usable."""
    prefix = recv_exact(sock, LENGTH_PREFIX.size)
    if prefix is None:
        return None
    (length,) = LENGTH_PREFIX.unpack(prefix)
    if length > MAX_FRAME_BYTES:
        raise ProtocolError(f"frame length {length} exceeds limit")
    body = recv_exact(sock, length)
    if body is None:
        raise ProtocolError("connection closed before frame body")
    return body


def read_frame(sock: socket.socket) -> dict | None:
    """One framed message from a socket; None on clean EOF."""
    body = read_frame_bytes(sock)
    if body is None:
        return None
    return decode_body(body)


def write_frame(sock: socket.socket, message: dict) -> None:
    sock.sendall(encode_frame(message))


# -- message vocabulary ------------------------------------------------------


def request(kind: str, request_id, env_id: str | None = None,
            agent_slot: str | None = None, payload: dict | None = None,
            ) -> dict:
    if kind not in REQUEST_KINDS:
        raise ProtocolError(f"unknown request kind {kind!r}")
    message = {"schema": PROTOCOL_SCHEMA, "kind": kind,
               "request_id": request_id}
    if env_id is not None:
        message["env_id"] = env_id
    if agent_slot is not None:
        message["agent_slot"] = agent_slot
    if payload is not None:
        message["payload"] = payload
    return message


def ack(request_id, payload: dict | None = None) -> dict:
    message = {"schema": PROTOCOL_SCHEMA, "kind": "Ack",
               "request_id": request_id}
    if payload is not None:
        message["payload"] = payload
    return message


def error(request_id, code: str, message: str) -> dict:
    return {"schema": PROTOCOL_SCHEMA, "kind": "Error",
            "request_id": request_id,
            "payload": {"code": code, "message": message}}


def validate_request(message: dict) -> dict:
    """Check the envelope of an inbound request; returns it unchanged."""
    schema = message.get("schema")
    if schema != PROTOCOL_SCHEMA:
        raise ProtocolError(f"unsupported protocol schema {schema!r}")
    kind = message.get("kind")
    if kind not in REQUEST_KINDS:
        raise ProtocolError(f"unknown or non-request kind {kind!r}")
    if "request_id" not in message:
        raise ProtocolError("request is missing request_id")
    if not isinstance(message.get("payload", {}), dict):
        raise ProtocolError("payload must be a JSON object")
    for key in ("env_id", "agent_slot"):
        if key in message and not isinstance(message[key], str):
            raise ProtocolError(f"{key} must be a string")
    return message
