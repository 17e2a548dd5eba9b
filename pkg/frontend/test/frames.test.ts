/** Wire framing and request/response bookkeeping, against an in-process
 * mock server so every byte is visible to the assertions. */

import * as net from 'node:net';
import { AddressInfo } from 'node:net';
import { afterEach, describe, expect, it } from 'vitest';
import { Connection, ProtocolFailure, ServerError } from '../src/connection';
import { FrameDecoder, FramingError, MAX_FRAME_BYTES, encodeFrame } from '../src/frames';

describe('framing', () => {
  it('writes a 4-byte big-endian length prefix', () => {
    const frame = encodeFrame({ a: 1 });
    const body = Buffer.from(JSON.stringify({ a: 1 }), 'utf8');
    expect(frame.length).toBe(4 + body.length);
    expect(frame.readUInt32BE(0)).toBe(body.length);
    expect(frame.subarray(4).toString('utf8')).toBe('{"a":1}');
  });

  it('round-trips messages through the decoder', () => {
    const decoder = new FrameDecoder();
    const messages = [{ kind: 'Ack', request_id: 1 }, { value: [1, 2.5, null] }];
    const wire = Buffer.concat(messages.map(encodeFrame));
    expect(decoder.push(wire)).toEqual(messages);
    expect(decoder.bufferedBytes).toBe(0);
  });

  it('reassembles frames split at arbitrary byte boundaries', () => {
    const message = { kind: 'Ack', request_id: 7, payload: { text: 'x'.repeat(200) } };
    const wire = Buffer.concat([encodeFrame(message), encodeFrame(message)]);
    for (const cut of [1, 2, 3, 4, 5, 37, wire.length - 1]) {
      const decoder = new FrameDecoder();
      const received = [
        ...decoder.push(wire.subarray(0, cut)),
        ...decoder.push(wire.subarray(cut)),
      ];
      expect(received).toEqual([message, message]);
      expect(decoder.bufferedBytes).toBe(0);
    }
  });

  it('rejects oversized frames in both directions', () => {
    const decoder = new FrameDecoder();
    const prefix = Buffer.alloc(4);
    prefix.writeUInt32BE(MAX_FRAME_BYTES + 1, 0);
    expect(() => decoder.push(prefix)).toThrow(FramingError);
    expect(() => encodeFrame({ blob: 'y'.repeat(MAX_FRAME_BYTES) })).toThrow(FramingError);
  });
});

interface Received {
  kind: string;
  request_id: number;
  payload: Record<string, unknown>;
}

/** Minimal scriptable server: records requests, answers via `reply`. */
async function mockServer(
  reply: (message: Received) => Record<string, unknown> | null,
): Promise<{ address: string; requests: Received[]; close: () => void }> {
  const requests: Received[] = [];
  const sockets = new Set<net.Socket>();
  const server = net.createServer((socket) => {
    sockets.add(socket);
    const decoder = new FrameDecoder();
    socket.on('data', (chunk) => {
      for (const message of decoder.push(chunk) as Received[]) {
        requests.push(message);
        const response = reply(message);
        if (response !== null) socket.write(encodeFrame(response));
      }
    });
  });
  await new Promise<void>((resolve) => server.listen(0, '127.0.0.1', resolve));
  const { port } = server.address() as AddressInfo;
  const close = () => {
    for (const socket of sockets) socket.destroy();
    server.close();
  };
  return { address: `127.0.0.1:${port}`, requests, close };
}

describe('connection', () => {
  const cleanups: (() => void)[] = [];
  afterEach(() => {
    while (cleanups.length > 0) cleanups.pop()!();
  });

  it('numbers requests 1, 2, 3, ... and resolves Ack payloads', async () => {
    const mock = await mockServer((message) => ({
      schema: 1, kind: 'Ack', request_id: message.request_id,
      payload: { echoed: message.kind },
    }));
    cleanups.push(mock.close);
    const connection = await Connection.connect(mock.address);
    cleanups.push(() => connection.close());

    for (const kind of ['ListEnvs', 'GetState', 'Step']) {
      expect(await connection.request(kind)).toEqual({ echoed: kind });
    }
    expect(mock.requests.map((message) => message.request_id)).toEqual([1, 2, 3]);
    expect(connection.requestsSent).toBe(3);
  });

  it('raises ServerError with the server error code', async () => {
    const mock = await mockServer((message) => ({
      schema: 1, kind: 'Error', request_id: message.request_id,
      payload: { code: 'capacity', message: 'server limit is 4 environments' },
    }));
    cleanups.push(mock.close);
    const connection = await Connection.connect(mock.address);
    cleanups.push(() => connection.close());

    const failure = await connection.request('CreateEnv').catch((error) => error);
    expect(failure).toBeInstanceOf(ServerError);
    expect(failure.code).toBe('capacity');
    expect(failure.message).toContain('server limit');
  });

  it('treats a response for the wrong id as a protocol failure', async () => {
    const mock = await mockServer((message) => ({
      schema: 1, kind: 'Ack', request_id: message.request_id + 10, payload: {},
    }));
    cleanups.push(mock.close);
    const connection = await Connection.connect(mock.address);
    cleanups.push(() => connection.close());

    await expect(connection.request('ListEnvs')).rejects.toBeInstanceOf(ProtocolFailure);
  });

  it('fails in-flight requests when the server goes away', async () => {
    const mock = await mockServer(() => null);
    const connection = await Connection.connect(mock.address);
    cleanups.push(() => connection.close());

    const inFlight = connection.request('ListEnvs');
    mock.close();
    // The in-flight request surfaces whatever the socket reported
    // (ECONNRESET or a close); later requests fail fast.
    const failure = await inFlight.catch((error) => error);
    expect(failure).toBeInstanceOf(Error);
    await expect(connection.request('ListEnvs')).rejects.toBeInstanceOf(ProtocolFailure);
  });
});
