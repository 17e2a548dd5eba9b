/**
 * Message framing for the environment server: every message is a 4-byte
 * big-endian length prefix followed by a UTF-8 JSON object.
 */

export const MAX_FRAME_BYTES = 16 * 1024 * 1024;

export class FramingError extends Error {}

/** Encode one message as a length-prefixed frame. */
export function encodeFrame(message: unknown): Buffer {
  const body = Buffer.from(JSON.stringify(message), 'utf8');
  if (body.length > MAX_FRAME_BYTES) {
    throw new FramingError(`frame of ${body.length} bytes exceeds ${MAX_FRAME_BYTES}`);
  }
  const frame = Buffer.allocUnsafe(4 + body.length);
  frame.writeUInt32BE(body.length, 0);
  body.copy(frame, 4);
  return frame;
}

/**
 * Incremental frame decoder. Feed it socket chunks in arrival order; it
 * returns every complete message and buffers the remainder.
 */
export class FrameDecoder {
  private pending: Buffer = Buffer.alloc(0);

  push(chunk: Buffer): unknown[] {
    this.pending = this.pending.length === 0 ? chunk : Buffer.concat([this.pending, chunk]);
    const messages: unknown[] = [];
    for (;;) {
      if (this.pending.length < 4) break;
      const length = this.pending.readUInt32BE(0);
      if (length > MAX_FRAME_BYTES) {
        throw new FramingError(`incoming frame of ${length} bytes exceeds ${MAX_FRAME_BYTES}`);
      }
      if (this.pending.length < 4 + length) break;
      const body = this.pending.subarray(4, 4 + length).toString('utf8');
      this.pending = this.pending.subarray(4 + length);
      messages.push(JSON.parse(body));
    }
    return messages;
  }

  /** Bytes sitting in the buffer without a complete frame. */
  get bufferedBytes(): number {
    return this.pending.length;
  }
}
