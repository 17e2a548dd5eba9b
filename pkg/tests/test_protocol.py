"""Wire framing and message envelope rules."""

import json
import socket
import struct
import threading

import pytest

from aircombat.protocol import (
    LENGTH_PREFIX,
    MAX_FRAME_BYTES,
    PROTOCOL_SCHEMA,
    ProtocolError,
    ack,
    canonical_dumps,
    decode_body,
    encode_frame,
    error,
    read_frame,
    read_frame_bytes,
    request,
    validate_request,
)


class TestCanonicalEncoding:
    def test_keys_sorted_and_compact(self):
        text = canonical_dumps({"b": 1, "a": [1, 2], "c": {"z": 0, "y": 1}})
        assert text == '{"a":[1,2],"b":1,"c":{"y":1,"z":0}}'

    def test_rejects_non_finite_numbers(self):
        with pytest.raises(ValueError):
            canonical_dumps({"x": float("nan")})
        with pytest.raises(ValueError):
            canonical_dumps({"x": float("inf")})

    def test_floats_round_trip_exactly(self):
        values = [0.1, 1e-5, 2500.000000001, -9.80665, 13781.385605566378]
        assert json.loads(canonical_dumps(values)) == values

    def test_unicode_passes_through(self):
        assert canonical_dumps({"name": "Ağ"}) == '{"name":"Ağ"}'


class TestFraming:
    def test_prefix_is_big_endian_length(self):
        frame = encode_frame({"a": 1})
        body = canonical_dumps({"a": 1}).encode()
        assert frame[:4] == struct.pack(">I", len(body))
        assert frame[4:] == body

    def test_round_trip_over_socketpair(self):
        left, right = socket.socketpair()
        try:
            message = request("ListEnvs", 7)
            left.sendall(encode_frame(message))
            assert read_frame(right) == message
        finally:
            left.close()
            right.close()

    def test_fragmented_send_reassembles(self):
        left, right = socket.socketpair()
        try:
            frame = encode_frame(ack(3, {"envs": []}))
            received = {}

            def reader():
                received["message"] = read_frame(right)

            thread = threading.Thread(target=reader)
            thread.start()
            for index in range(len(frame)):
                left.sendall(frame[index:index + 1])
            thread.join(timeout=5.0)
            assert received["message"] == ack(3, {"envs": []})
        finally:
            left.close()
            right.close()

    def test_clean_eof_returns_none(self):
        left, right = socket.socketpair()
        left.close()
        try:
            assert read_frame_bytes(right) is None
        finally:
            right.close()

    def test_mid_frame_eof_raises(self):
        left, right = socket.socketpair()
        try:
            frame = encode_frame({"a": 1})
            left.sendall(frame[:7])
            left.close()
            with pytest.raises(ProtocolError):
                read_frame_bytes(right)
        finally:
            right.close()

    def test_oversize_length_prefix_rejected(self):
        left, right = socket.socketpair()
        try:
            left.sendall(LENGTH_PREFIX.pack(MAX_FRAME_BYTES + 1))
            with pytest.raises(ProtocolError):
                read_frame_bytes(right)
        finally:
            left.close()
            right.close()

    def test_non_json_body_raises_but_only_on_decode(self):
        left, right = socket.socketpair()
        try:
            body = b"not json"
            left.sendall(LENGTH_PREFIX.pack(len(body)) + body)
            raw = read_frame_bytes(right)
            assert raw == body
            with pytest.raises(ProtocolError):
                decode_body(raw)
        finally:
            left.close()
            right.close()


class TestEnvelope:
    def test_request_carries_schema_and_fields(self):
        message = request("Step", 12, env_id="env-0",
                          payload={"actions": {}})
        assert message == {"schema": PROTOCOL_SCHEMA, "kind": "Step",
                           "request_id": 12, "env_id": "env-0",
                           "payload": {"actions": {}}}

    def test_request_rejects_response_kinds(self):
        with pytest.raises(ProtocolError):
            request("Ack", 1)
        with pytest.raises(ProtocolError):
            request("Teleport", 1)

    def test_error_payload_shape(self):
        message = error(4, "capacity", "server limit is 16 environments")
        assert message["kind"] == "Error"
        assert message["payload"]["code"] == "capacity"

    def test_validate_rejects_bad_envelopes(self):
        good = request("Reset", 1, env_id="env-0")
        assert validate_request(good) is good
        with pytest.raises(ProtocolError):
            validate_request({"kind": "Reset", "request_id": 1})
        with pytest.raises(ProtocolError):
            validate_request({"schema": PROTOCOL_SCHEMA, "kind": "Reset"})
        with pytest.raises(ProtocolError):
            validate_request({"schema": PROTOCOL_SCHEMA, "kind": "Ack",
                              "request_id": 1})
        with pytest.raises(ProtocolError):
            validate_request({"schema": PROTOCOL_SCHEMA, "kind": "Step",
                              "request_id": 1, "payload": []})
        with pytest.raises(ProtocolError):
            validate_request({"schema": PROTOCOL_SCHEMA, "kind": "Step",
                              "request_id": 1, "env_id": 5})
