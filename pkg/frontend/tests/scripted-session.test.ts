import { describe, expect, it } from "vitest";

import {
  MicEcho,
  PatternPayload,
  ServiceClient,
  SessionState,
  SourceEcho,
} from "../src/api.js";
import { SessionController } from "../src/controller.js";
import { Frame, FrameType } from "../src/protocol.js";

/**
 * In-process stand-in for the service, faithful to its documented
 * behavior: PATCHes queue up and land at the next block boundary (bumping
 * the snapshot index), frames carry (block_index, snapshot_index), and the
 * pattern endpoint reflects the mic's current m.
 */
class MockServer {
  state: SessionState;
  private queued = 0;
  private snapshot = 0;
  private block = 0;

  constructor() {
    this.state = {
      session_id: "mock1234",
      fs: 44100,
      duration_samples: 441000,
      n_blocks: 1723,
      block_size: 256,
      pace: "realtime",
      snapshot_index: 0,
      transport: { playing: false, position_blocks: 0, ended: false },
      source_position: [1, 0],
      mics: [{
        index: 0, label: "cardioid", position: [0, 0], orientation: 0,
        m: 0.5, d: 0.02, g: 0.9,
        derived: { r: 1, theta: 0, delays: [128.57, 127.28, 129.86] },
      }],
    };
  }

  private derived(x: number, y: number) {
    const r = Math.hypot(x, y);
    const theta = Math.atan2(y, x);
    const scale = 44100 / 343;
    return { r, theta, delays: [r * scale, (r - 0.01) * scale, (r + 0.01) * scale] };
  }

  patchSource(x: number, y: number): SourceEcho {
    const r = Math.hypot(x, y);
    if (r < this.state.mics[0].d / 2) {
      throw Object.assign(new Error("422"), { status: 422 });
    }
    this.state.source_position = [x, y];
    this.queued += 1;
    const d = this.derived(x, y);
    return {
      source_position: [x, y],
      mics: [{ index: 0, r: d.r, theta: d.theta, delays: d.delays }],
      applies_at_block: this.block,
    };
  }

  patchMic(body: { m?: number; d?: number; g?: number }): MicEcho {
    const mic = this.state.mics[0];
    mic.m = body.m ?? mic.m;
    mic.d = body.d ?? mic.d;
    mic.g = body.g ?? mic.g;
    this.queued += 1;
    return {
      mic: 0,
      effective: { m: mic.m, d: mic.d, g: mic.g },
      applies_at_block: this.block,
      derived: this.state.mics[0].derived,
    };
  }

  pattern(f: number, mode: string): PatternPayload {
    const mic = this.state.mics[0];
    const angles = Array.from({ length: 72 }, (_, i) => i * 5);
    const classical = angles.map((deg) =>
      Math.abs(mic.m + (1 - mic.m) * Math.cos((deg * Math.PI) / 180)));
    return {
      f, mode, mic: 0, r: 1, theta: 0, m: mic.m,
      angles_deg: angles,
      magnitude: classical.slice(),
      classical,
      snapshot_index: this.snapshot,
    };
  }

  /** Produce the next audio frame, applying queued changes first. */
  nextFrame(): Frame {
    if (this.queued > 0) {
      this.snapshot += 1;
      this.queued = 0;
    }
    const frame: Frame = {
      type: FrameType.Audio,
      flags: 0,
      blockIndex: this.block,
      snapshotIndex: this.snapshot,
      blockSize: 4,
      channels: 1,
      samples: new Float32Array(4),
    };
    this.block += 1;
    return frame;
  }
}

function clientFor(server: MockServer): ServiceClient {
  const fetchImpl = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    const respond = (payload: unknown, status = 200) =>
      ({ ok: status < 400, status, json: async () => payload }) as Response;
    try {
      if (method === "POST" && url.endsWith("/sessions")) {
        return respond(server.state, 201);
      }
      if (method === "POST" && url.includes("/transport")) {
        server.state.transport.playing = body.action === "play";
        return respond(server.state.transport);
      }
      if (method === "PATCH" && url.includes("/source")) {
        return respond(server.patchSource(body.x, body.y));
      }
      if (method === "PATCH" && url.includes("/mics/")) {
        return respond(server.patchMic(body));
      }
      if (url.includes("/pattern")) {
        const params = new URLSearchParams(url.split("?")[1]);
        return respond(server.pattern(Number(params.get("f")), params.get("mode")!));
      }
      if (url.includes("/state")) {
        return respond(server.state);
      }
    } catch (err) {
      return respond({ detail: String(err) }, 422);
    }
    return respond({ detail: "not found" }, 404);
  };
  return new ServiceClient("", fetchImpl);
}

describe("scripted session", () => {
  it("reflects every change in the stream within two blocks", async () => {
    const server = new MockServer();
    let t = 0;
    const timers: Array<() => void> = [];
    const controller = new SessionController(
      clientFor(server), {}, () => t, (fn) => timers.push(fn));

    await controller.load("tone.wav");
    await controller.play();
    expect(controller.state!.transport.playing).toBe(true);

    const script: Array<() => Promise<unknown> | unknown> = [
      () => controller.dragSource(1.0, 0.5),
      () => controller.dragSource(0.5, -0.5),
      () => controller.dragSource(2.0, 0.0),
      () => controller.setMic(0, { m: 0.0 }),
      () => controller.setMic(0, { m: 1.0 }),
    ];
    for (const step of script) {
      await step();
      // drags are throttled: advance the fake clock and run due timers
      t += 60;
      for (const fn of timers.splice(0)) {
        fn();
      }
      await Promise.resolve(); // let the queued PATCH settle
      await Promise.resolve();
      // stream a few blocks; the server applies queued changes at the
      // first boundary, so confirmation must come within two blocks
      for (let i = 0; i < 3; i++) {
        controller.handleFrame(server.nextFrame());
      }
    }

    expect(controller.changes).toHaveLength(5);
    expect(controller.changes.map((c) => c.kind)).toEqual(
      ["source", "source", "source", "mic", "mic"]);
    expect(controller.changesWithinBlocks(2)).toBe(true);
    for (const change of controller.changes) {
      expect(change.confirmedAtBlock).toBeDefined();
      expect(change.blocksLate!).toBeGreaterThanOrEqual(0);
      expect(change.blocksLate!).toBeLessThanOrEqual(2);
    }
  });

  it("polar widget state equals the pattern payload exactly", async () => {
    const server = new MockServer();
    const controller = new SessionController(clientFor(server));
    await controller.load("tone.wav");
    await controller.setMic(0, { m: 1.0 });
    const payload = await controller.refreshPattern(500, "lossy");
    expect(controller.pattern).toBe(payload);
    expect(payload.magnitude).toEqual(server.pattern(500, "lossy").magnitude);
    expect(payload.magnitude.every((v) => Math.abs(v - 1) < 1e-12)).toBe(true);
  });

  it("clamps drags inside the validity circle and flags them", async () => {
    const server = new MockServer();
    let t = 0;
    const controller = new SessionController(
      clientFor(server), {}, () => t, () => undefined);
    await controller.load("tone.wav");
    const result = controller.dragSource(0.001, 0.0);
    expect(result.clamped).toBe(true);
    expect(Math.hypot(result.x, result.y)).toBeCloseTo(0.01, 12);
    await Promise.resolve();
    await Promise.resolve();
    // the PATCH carried the clamped position, not the raw drag
    expect(server.state.source_position[0]).toBeCloseTo(0.01, 12);
  });

  it("skips redundant PATCHes for unchanged positions", async () => {
    const server = new MockServer();
    let patches = 0;
    const counting = new ServiceClient("", async (url, init) => {
      if (init?.method === "PATCH" && url.includes("/source")) {
        patches += 1;
        const body = JSON.parse(init.body as string);
        return { ok: true, status: 200,
                 json: async () => server.patchSource(body.x, body.y) } as Response;
      }
      return { ok: true, status: 200, json: async () => server.state } as Response;
    });
    let t = 1000;
    const controller = new SessionController(counting, {}, () => t, () => undefined);
    controller.state = server.state;
    controller.dragSource(1.0, 0.5);
    await Promise.resolve();
    t += 60;
    controller.dragSource(1.0, 0.5); // same spot: dropped before the wire
    await Promise.resolve();
    expect(patches).toBe(1);
  });
});
