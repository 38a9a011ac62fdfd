/**
 * Binary stream protocol shared with the server.
 *
 * Little-endian 28-byte header, then float32 interleaved PCM
 * (the trailing reserved u16 pads the payload to 4-byte alignment):
 *   magic "MICF" | version u16 | frame_type u8 | flags u8 |
 *   block_index u64 | snapshot_index u32 | block_size u32 | channels u16 |
 *   reserved u16
 */

export const HEADER_SIZE = 28;
export const FRAME_VERSION = 1;
export const MAGIC = "MICF";

export enum FrameType {
  Audio = 0,
  Keepalive = 1,
  Gap = 2,
}

export const FLAG_CROSSFADE = 0x01;

export interface Frame {
  type: FrameType;
  flags: number;
  blockIndex: number;
  snapshotIndex: number;
  blockSize: number;
  channels: number;
  /** Interleaved float32 samples; absent for keepalive/gap frames. */
  samples?: Float32Array;
}

export function parseFrame(data: ArrayBuffer): Frame {
  if (data.byteLength < HEADER_SIZE) {
    throw new Error(`frame too short: ${data.byteLength} bytes`);
  }
  const view = new DataView(data);
  const magic = String.fromCharCode(
    view.getUint8(0), view.getUint8(1), view.getUint8(2), view.getUint8(3));
  if (magic !== MAGIC) {
    throw new Error(`bad frame magic ${JSON.stringify(magic)}`);
  }
  const version = view.getUint16(4, true);
  if (version !== FRAME_VERSION) {
    throw new Error(`unsupported frame version ${version}`);
  }
  const frame: Frame = {
    type: view.getUint8(6),
    flags: view.getUint8(7),
    blockIndex: Number(view.getBigUint64(8, true)),
    snapshotIndex: view.getUint32(16, true),
    blockSize: view.getUint32(20, true),
    channels: view.getUint16(24, true),
  };
  if (frame.type === FrameType.Audio) {
    const expected = frame.blockSize * frame.channels * 4;
    if (data.byteLength - HEADER_SIZE < expected) {
      throw new Error(
        `truncated audio payload: ${data.byteLength - HEADER_SIZE} < ${expected}`);
    }
    frame.samples = new Float32Array(data, HEADER_SIZE, frame.blockSize * frame.channels);
  }
  return frame;
}

/** Pull one channel out of an interleaved audio frame. */
export function channelSamples(frame: Frame, channel: number): Float32Array {
  if (!frame.samples) {
    throw new Error("not an audio frame");
  }
  if (channel < 0 || channel >= frame.channels) {
    throw new Error(`no channel ${channel} in frame of ${frame.channels}`);
  }
  const out = new Float32Array(frame.blockSize);
  for (let i = 0; i < frame.blockSize; i++) {
    out[i] = frame.samples[i * frame.channels + channel];
  }
  return out;
}

/** Build a frame (used by tests and protocol tooling). */
export function packFrame(frame: Frame): ArrayBuffer {
  const payload = frame.samples ? frame.samples.length * 4 : 0;
  const buf = new ArrayBuffer(HEADER_SIZE + payload);
  const view = new DataView(buf);
  for (let i = 0; i < 4; i++) {
    view.setUint8(i, MAGIC.charCodeAt(i));
  }
  view.setUint16(4, FRAME_VERSION, true);
  view.setUint8(6, frame.type);
  view.setUint8(7, frame.flags);
  view.setBigUint64(8, BigInt(frame.blockIndex), true);
  view.setUint32(16, frame.snapshotIndex, true);
  view.setUint32(20, frame.blockSize, true);
  view.setUint16(24, frame.channels, true);
  view.setUint16(26, 0, true);
  if (frame.samples) {
    new Float32Array(buf, HEADER_SIZE).set(frame.samples);
  }
  return buf;
}
