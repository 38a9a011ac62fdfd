/**
 * Gapless scheduling of streamed PCM blocks through WebAudio.
 *
 * Each audio frame becomes an AudioBuffer scheduled back to back on the
 * context clock; a gap marker resets the timeline so playback resumes
 * cleanly after dropped frames.
 */

import { Frame, FrameType } from "./protocol.js";

export interface AudioBufferLike {
  copyToChannel(source: Float32Array, channel: number): void;
  readonly duration: number;
}

export interface SourceNodeLike {
  buffer: AudioBufferLike | null;
  connect(destination: unknown): void;
  start(when: number): void;
}

export interface AudioContextLike {
  readonly currentTime: number;
  readonly destination: unknown;
  createBuffer(channels: number, length: number, sampleRate: number): AudioBufferLike;
  createBufferSource(): SourceNodeLike;
}

const LEAD_IN_SECONDS = 0.05;

export class BlockScheduler {
  private nextStart = 0;
  private scheduled = 0;
  private gaps = 0;

  constructor(
    private readonly ctx: AudioContextLike,
    private readonly sampleRate: number,
  ) {}

  /** Schedule an audio frame; keepalives are ignored, gaps reset the clock. */
  enqueue(frame: Frame): void {
    if (frame.type === FrameType.Gap) {
      this.gaps += 1;
      this.nextStart = 0;
      return;
    }
    if (frame.type !== FrameType.Audio || !frame.samples) {
      return;
    }
    const buffer = this.ctx.createBuffer(
      frame.channels, frame.blockSize, this.sampleRate);
    for (let ch = 0; ch < frame.channels; ch++) {
      const channel = new Float32Array(frame.blockSize);
      for (let i = 0; i < frame.blockSize; i++) {
        channel[i] = frame.samples[i * frame.channels + ch];
      }
      buffer.copyToChannel(channel, ch);
    }
    const node = this.ctx.createBufferSource();
    node.buffer = buffer;
    node.connect(this.ctx.destination);
    if (this.nextStart <= this.ctx.currentTime) {
      this.nextStart = this.ctx.currentTime + LEAD_IN_SECONDS;
    }
    node.start(this.nextStart);
    this.nextStart += buffer.duration;
    this.scheduled += 1;
  }

  /** Seconds of audio queued ahead of the context clock. */
  bufferHealth(): number {
    return Math.max(0, this.nextStart - this.ctx.currentTime);
  }

  get scheduledBlocks(): number {
    return this.scheduled;
  }

  get gapCount(): number {
    return this.gaps;
  }
}
