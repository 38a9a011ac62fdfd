/**
 * Session controller: the glue between the control API, the binary stream,
 * and the widgets. Keeps no physics of its own; every displayed number is
 * a server echo. Tracks how quickly each parameter change shows up in the
 * streamed frames via the snapshot index.
 */

import { MicEcho, PatternPayload, ServiceClient, SessionState, SourceEcho } from "./api.js";
import { clampToValidity, MicGlyph } from "./planview.js";
import { Frame, FrameType } from "./protocol.js";
import { createThrottle, Throttled } from "./throttle.js";

export const MAX_CONTROL_RATE_HZ = 20;

export interface ChangeRecord {
  kind: "source" | "mic";
  appliesAtBlock: number;
  snapshotBefore: number;
  confirmedAtBlock?: number;
  blocksLate?: number;
}

export interface ControllerEvents {
  onState?(state: SessionState): void;
  onFrame?(frame: Frame): void;
  onGap?(): void;
  onChangeConfirmed?(change: ChangeRecord): void;
}

export class SessionController {
  state: SessionState | null = null;
  pattern: PatternPayload | null = null;
  lastFrame: Frame | null = null;
  readonly changes: ChangeRecord[] = [];
  readonly pendingSource: Throttled<[number, number]>;
  private lastSentSource: [number, number] | null = null;

  constructor(
    private readonly api: ServiceClient,
    private readonly events: ControllerEvents = {},
    now?: () => number,
    schedule?: (fn: () => void, ms: number) => unknown,
  ) {
    this.pendingSource = createThrottle<[number, number]>(
      1000 / MAX_CONTROL_RATE_HZ,
      ([x, y]) => void this.sendSourcePatch(x, y),
      now,
      schedule,
    );
  }

  get sessionId(): string {
    if (!this.state) {
      throw new Error("no session loaded");
    }
    return this.state.session_id;
  }

  async load(sourcePath: string, pace: string = "realtime"): Promise<SessionState> {
    this.state = await this.api.createSession(sourcePath, pace);
    this.events.onState?.(this.state);
    return this.state;
  }

  async play(): Promise<void> {
    const transport = await this.api.transport(this.sessionId, "play");
    if (this.state) {
      this.state.transport = transport;
    }
  }

  async pause(): Promise<void> {
    const transport = await this.api.transport(this.sessionId, "pause");
    if (this.state) {
      this.state.transport = transport;
    }
  }

  micGlyphs(): MicGlyph[] {
    if (!this.state) {
      return [];
    }
    return this.state.mics.map((m) => ({
      x: m.position[0], y: m.position[1], orientation: m.orientation, d: m.d,
    }));
  }

  /**
   * Drag handler: clamp to the validity circles, skip no-op positions,
   * and emit at most MAX_CONTROL_RATE_HZ PATCHes; returns the clamped
   * position for optimistic glyph motion.
   */
  dragSource(x: number, y: number): { x: number; y: number; clamped: boolean } {
    const result = clampToValidity(x, y, this.micGlyphs());
    const last = this.lastSentSource;
    if (last && last[0] === result.x && last[1] === result.y) {
      return result;
    }
    this.pendingSource.push([result.x, result.y]);
    return result;
  }

  private async sendSourcePatch(x: number, y: number): Promise<SourceEcho> {
    this.lastSentSource = [x, y];
    const snapshotBefore = this.lastFrame?.snapshotIndex ?? this.state?.snapshot_index ?? 0;
    const echo = await this.api.patchSource(this.sessionId, x, y);
    if (this.state) {
      this.state.source_position = echo.source_position;
      for (const mic of echo.mics) {
        const target = this.state.mics[mic.index];
        if (target) {
          target.derived = { r: mic.r, theta: mic.theta, delays: mic.delays };
        }
      }
    }
    this.changes.push({
      kind: "source",
      appliesAtBlock: echo.applies_at_block,
      snapshotBefore,
    });
    return echo;
  }

  async setMic(mic: number, body: { m?: number; d?: number; g?: number }): Promise<MicEcho> {
    const snapshotBefore = this.lastFrame?.snapshotIndex ?? this.state?.snapshot_index ?? 0;
    const echo = await this.api.patchMic(this.sessionId, mic, body);
    if (this.state) {
      const target = this.state.mics[mic];
      if (target) {
        target.m = echo.effective.m;
        target.d = echo.effective.d;
        target.g = echo.effective.g;
        target.derived = echo.derived;
      }
    }
    this.changes.push({
      kind: "mic",
      appliesAtBlock: echo.applies_at_block,
      snapshotBefore,
    });
    return echo;
  }

  async refreshPattern(f: number, mode: string = "lossy", mic: number = 0): Promise<PatternPayload> {
    this.pattern = await this.api.pattern(this.sessionId, f, mode, mic);
    return this.pattern;
  }

  /** Feed every received frame here; confirms pending changes. */
  handleFrame(frame: Frame): void {
    this.lastFrame = frame;
    if (frame.type === FrameType.Gap) {
      this.events.onGap?.();
    }
    if (frame.type === FrameType.Audio) {
      for (const change of this.changes) {
        if (change.confirmedAtBlock === undefined
            && frame.snapshotIndex > change.snapshotBefore) {
          change.confirmedAtBlock = frame.blockIndex;
          change.blocksLate = frame.blockIndex - change.appliesAtBlock;
          this.events.onChangeConfirmed?.(change);
        }
      }
    }
    this.events.onFrame?.(frame);
  }

  /** All confirmed changes landed within the latency contract. */
  changesWithinBlocks(maxBlocks: number): boolean {
    return this.changes.every(
      (c) => c.confirmedAtBlock !== undefined && (c.blocksLate ?? Infinity) <= maxBlocks);
  }
}
