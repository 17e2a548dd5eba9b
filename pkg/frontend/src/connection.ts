/**
 * One TCP connection to the environment server.
 *
 * Requests carry strictly sequential request_ids (1, 2, 3, ...) and are
 * written in call order; the server answers each request exactly once, in
 * order, echoing the id. Responses are matched by id and a mismatch is a
 * protocol failure, so requests can never be silently reordered or dropped.
 */

import * as net from 'node:net';
import { FrameDecoder, encodeFrame } from './frames';

export const PROTOCOL_SCHEMA = 1;

/** Error payload relayed from the server, with its error code. */
export class ServerError extends Error {
  constructor(readonly code: string, message: string) {
    super(`${code}: ${message}`);
    this.name = 'ServerError';
  }
}

export class ProtocolFailure extends Error {}

interface Pending {
  requestId: number;
  resolve: (payload: Record<string, unknown>) => void;
  reject: (error: Error) => void;
}

interface Envelope {
  schema: number;
  kind: string;
  request_id: number;
  env_id?: string;
  agent_slot?: string;
  payload: Record<string, unknown>;
}

export interface RequestFields {
  envId?: string;
  agentSlot?: string;
  payload?: Record<string, unknown>;
}

export class Connection {
  private nextRequestId = 1;
  private readonly pending: Pending[] = [];
  private readonly decoder = new FrameDecoder();
  private closed = false;

  private constructor(private readonly socket: net.Socket) {
    socket.on('data', (chunk) => this.onData(chunk));
    socket.on('error', (error) => this.failAll(error));
    socket.on('close', () => this.failAll(new ProtocolFailure('connection closed')));
  }

  static connect(address: string): Promise<Connection> {
    const at = address.lastIndexOf(':');
    if (at < 0) throw new ProtocolFailure(`address must be host:port, got ${address}`);
    const host = address.slice(0, at);
    const port = Number(address.slice(at + 1));
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port });
      socket.once('error', reject);
      socket.once('connect', () => {
        socket.removeListener('error', reject);
        socket.setNoDelay(true);
        resolve(new Connection(socket));
      });
    });
  }

  /** request_ids handed out so far; sequential by construction. */
  get requestsSent(): number {
    return this.nextRequestId - 1;
  }

  request(kind: string, fields: RequestFields = {}): Promise<Record<string, unknown>> {
    if (this.closed) return Promise.reject(new ProtocolFailure('connection is closed'));
    const requestId = this.nextRequestId++;
    const envelope: Envelope = {
      schema: PROTOCOL_SCHEMA,
      kind,
      request_id: requestId,
      payload: fields.payload ?? {},
    };
    if (fields.envId !== undefined) envelope.env_id = fields.envId;
    if (fields.agentSlot !== undefined) envelope.agent_slot = fields.agentSlot;

    return new Promise((resolve, reject) => {
      this.pending.push({ requestId, resolve, reject });
      this.socket.write(encodeFrame(envelope));
    });
  }

  private onData(chunk: Buffer): void {
    let messages: unknown[];
    try {
      messages = this.decoder.push(chunk);
    } catch (error) {
      this.failAll(error as Error);
      this.socket.destroy();
      return;
    }
    for (const message of messages) this.onMessage(message as Record<string, unknown>);
  }

  private onMessage(message: Record<string, unknown>): void {
    const waiter = this.pending.shift();
    if (waiter === undefined) {
      this.failAll(new ProtocolFailure('response with no request in flight'));
      return;
    }
    if (message.request_id !== waiter.requestId) {
      waiter.reject(new ProtocolFailure(
        `response for request ${message.request_id}, expected ${waiter.requestId}`));
      return;
    }
    const payload = (message.payload ?? {}) as Record<string, unknown>;
    if (message.kind === 'Ack') {
      waiter.resolve(payload);
    } else if (message.kind === 'Error') {
      waiter.reject(new ServerError(String(payload.code), String(payload.message)));
    } else {
      waiter.reject(new ProtocolFailure(`unexpected response kind ${message.kind}`));
    }
  }

  private failAll(error: Error): void {
    this.closed = true;
    while (this.pending.length > 0) {
      this.pending.shift()!.reject(error);
    }
  }

  close(): void {
    this.closed = true;
    this.socket.end();
    this.socket.destroy();
  }
}
