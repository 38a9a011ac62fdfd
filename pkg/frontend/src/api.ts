/** Typed client for the control-plane HTTP API. */

export interface DerivedTaps {
  r: number;
  theta: number;
  delays: number[];
  gains?: number[];
}

export interface MicState {
  index: number;
  label: string;
  position: number[];
  orientation: number;
  m: number;
  d: number;
  g: number;
  derived: DerivedTaps;
}

export interface SessionState {
  session_id: string;
  fs: number;
  duration_samples: number;
  n_blocks: number;
  block_size: number;
  pace: string;
  snapshot_index: number;
  transport: { playing: boolean; position_blocks: number; ended: boolean };
  source_position: number[];
  mics: MicState[];
}

export interface PatternPayload {
  f: number;
  mode: string;
  mic: number;
  r: number;
  theta: number;
  m: number;
  angles_deg: number[];
  magnitude: number[];
  classical: number[];
  snapshot_index: number;
}

export interface SourceEcho {
  source_position: number[];
  mics: Array<{ index: number; r: number; theta: number; delays: number[] }>;
  applies_at_block: number;
}

export interface MicEcho {
  mic: number;
  effective: { m: number; d: number; g: number };
  applies_at_block: number;
  derived: DerivedTaps;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, public detail: unknown) {
    super(`HTTP ${status}: ${JSON.stringify(detail)}`);
  }
}

export class ServiceClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchImpl(this.base + path, init);
    const payload = resp.status === 204 ? null : await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, payload?.detail ?? payload);
    }
    return payload as T;
  }

  health(): Promise<{ status: string; version: string }> {
    return this.request("GET", "/health");
  }

  createSession(sourcePath: string, pace: string = "realtime"): Promise<SessionState> {
    return this.request("POST", "/sessions", { source_path: sourcePath, pace });
  }

  async uploadSession(wavBytes: ArrayBuffer, pace: string = "realtime"): Promise<SessionState> {
    const resp = await this.fetchImpl(`${this.base}/sessions?pace=${pace}`, {
      method: "POST",
      headers: { "content-type": "audio/wav" },
      body: wavBytes,
    });
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, payload?.detail ?? payload);
    }
    return payload as SessionState;
  }

  state(id: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${id}/state`);
  }

  patchSource(id: string, x: number, y: number): Promise<SourceEcho> {
    return this.request("PATCH", `/sessions/${id}/source`, { x, y });
  }

  patchMic(id: string, mic: number,
           body: { m?: number; d?: number; g?: number }): Promise<MicEcho> {
    return this.request("PATCH", `/sessions/${id}/mics/${mic}`, body);
  }

  transport(id: string, action: "play" | "pause" | "seek",
            positionBlocks?: number): Promise<SessionState["transport"]> {
    const body: Record<string, unknown> = { action };
    if (positionBlocks !== undefined) {
      body.position_blocks = positionBlocks;
    }
    return this.request("POST", `/sessions/${id}/transport`, body);
  }

  pattern(id: string, f: number, mode: string = "lossy", mic: number = 0,
          points: number = 72): Promise<PatternPayload> {
    const q = `f=${f}&mode=${mode}&mic=${mic}&points=${points}`;
    return this.request("GET", `/sessions/${id}/pattern?${q}`);
  }

  streamUrl(id: string): string {
    const ws = this.base.replace(/^http/, "ws");
    return `${ws}/sessions/${id}/stream`;
  }
}
