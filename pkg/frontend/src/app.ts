/**
 * Browser wiring: plan view canvas, polar widget, transport and parameter
 * controls, and the audio stream. Everything numeric on screen comes from
 * server responses; this file only draws and forwards.
 */

import { ServiceClient } from "./api.js";
import { SessionController } from "./controller.js";
import { metersToPixels, pixelsToMeters, ViewTransform, zoom } from "./planview.js";
import { BlockScheduler } from "./player.js";
import { fitScale, polarPoints } from "./polar.js";
import { FrameType, parseFrame } from "./protocol.js";

const $ = (id: string) => document.getElementById(id)!;

const api = new ServiceClient("");
const controller = new SessionController(api, {
  onGap: () => showBadge("dropout", 1500),
  onChangeConfirmed: (c) =>
    showBadge(`${c.kind} change live (+${c.blocksLate} blocks)`, 800),
});

let view: ViewTransform = { originX: 320, originY: 240, pixelsPerMeter: 120 };
let scheduler: BlockScheduler | null = null;
let socket: WebSocket | null = null;
let dragging = false;
let patternFreq = 1000;
let patternMode = "lossy";
let sourceGlyph: [number, number] = [1, 0];
let clampedBadge = false;

function showBadge(text: string, ms: number): void {
  const badge = $("badge");
  badge.textContent = text;
  badge.classList.add("visible");
  window.setTimeout(() => badge.classList.remove("visible"), ms);
}

async function loadSession(): Promise<void> {
  const path = ($("source-path") as HTMLInputElement).value;
  const state = await controller.load(path, "realtime");
  sourceGlyph = [state.source_position[0], state.source_position[1]];
  connectStream();
  await refreshPattern();
  renderAll();
  $("session-label").textContent = state.session_id.slice(0, 8);
}

function connectStream(): void {
  socket?.close();
  const ctx = new AudioContext({ sampleRate: controller.state!.fs });
  scheduler = new BlockScheduler(ctx, controller.state!.fs);
  socket = new WebSocket(api.streamUrl(controller.sessionId));
  socket.binaryType = "arraybuffer";
  socket.onmessage = (ev) => {
    const frame = parseFrame(ev.data as ArrayBuffer);
    controller.handleFrame(frame);
    scheduler?.enqueue(frame);
    if (frame.type === FrameType.Audio) {
      $("buffer-health").textContent =
        `${(scheduler!.bufferHealth() * 1000).toFixed(0)} ms`;
      $("block-label").textContent = `block ${frame.blockIndex}`;
    }
  };
}

async function refreshPattern(): Promise<void> {
  if (!controller.state) {
    return;
  }
  await controller.refreshPattern(patternFreq, patternMode);
  drawPolar();
}

function drawPolar(): void {
  const canvas = $("polar") as HTMLCanvasElement;
  const g = canvas.getContext("2d")!;
  const payload = controller.pattern;
  g.clearRect(0, 0, canvas.width, canvas.height);
  if (!payload) {
    return;
  }
  const cx = canvas.width / 2;
  const cy = canvas.height / 2;
  const radius = Math.min(cx, cy) - 20;
  const scale = fitScale(payload.magnitude.concat(payload.classical), radius);

  g.strokeStyle = "#ccc";
  for (const frac of [0.25, 0.5, 0.75, 1]) {
    g.beginPath();
    g.arc(cx, cy, radius * frac, 0, 2 * Math.PI);
    g.stroke();
  }
  const draw = (values: number[], style: string, dashed: boolean) => {
    const pts = polarPoints(payload.angles_deg, values, cx, cy, scale);
    g.strokeStyle = style;
    g.setLineDash(dashed ? [5, 4] : []);
    g.beginPath();
    pts.forEach((p, i) => (i === 0 ? g.moveTo(p.x, p.y) : g.lineTo(p.x, p.y)));
    g.closePath();
    g.stroke();
    g.setLineDash([]);
  };
  draw(payload.classical, "#999", true);
  draw(payload.magnitude, "#1f77b4", false);
  $("pattern-label").textContent =
    `|H_dir| at ${payload.f} Hz, r=${payload.r.toFixed(3)} m (${payload.mode})`;
}

function renderAll(): void {
  const canvas = $("plan") as HTMLCanvasElement;
  const g = canvas.getContext("2d")!;
  g.clearRect(0, 0, canvas.width, canvas.height);
  const state = controller.state;
  if (!state) {
    return;
  }
  drawGrid(g, canvas);
  for (const mic of state.mics) {
    const [mx, my] = metersToPixels(mic.position[0], mic.position[1], view);
    g.strokeStyle = "#444";
    g.beginPath();
    g.arc(mx, my, 8, 0, 2 * Math.PI);
    g.stroke();
    g.beginPath();
    g.moveTo(mx, my);
    g.lineTo(mx + 14 * Math.cos(mic.orientation), my - 14 * Math.sin(mic.orientation));
    g.stroke();
    const limit = (mic.d / 2) * view.pixelsPerMeter;
    g.strokeStyle = clampedBadge ? "#d62728" : "#ddd";
    g.beginPath();
    g.arc(mx, my, Math.max(limit, 2), 0, 2 * Math.PI);
    g.stroke();
    g.fillStyle = "#444";
    g.fillText(`${mic.label} r=${mic.derived.r.toFixed(3)} m`, mx + 12, my - 10);
  }
  const [sx, sy] = metersToPixels(sourceGlyph[0], sourceGlyph[1], view);
  g.fillStyle = "#d62728";
  g.beginPath();
  g.arc(sx, sy, 6, 0, 2 * Math.PI);
  g.fill();
}

function drawGrid(g: CanvasRenderingContext2D, canvas: HTMLCanvasElement): void {
  g.strokeStyle = "#f0f0f0";
  const step = view.pixelsPerMeter >= 200 ? 0.1 : 1.0;
  const span = canvas.width / view.pixelsPerMeter;
  for (let m = -span; m <= span; m += step) {
    const [x] = metersToPixels(m, 0, view);
    g.beginPath();
    g.moveTo(x, 0);
    g.lineTo(x, canvas.height);
    g.stroke();
    const [, y] = metersToPixels(0, m, view);
    g.beginPath();
    g.moveTo(0, y);
    g.lineTo(canvas.width, y);
    g.stroke();
  }
}

function bindUi(): void {
  $("load").addEventListener("click", () => void loadSession());
  $("play").addEventListener("click", () => void controller.play());
  $("pause").addEventListener("click", () => void controller.pause());
  $("zoom-in").addEventListener("click", () => {
    view = zoom(view, 1.5);
    renderAll();
  });
  $("zoom-out").addEventListener("click", () => {
    view = zoom(view, 1 / 1.5);
    renderAll();
  });

  const plan = $("plan") as HTMLCanvasElement;
  plan.addEventListener("pointerdown", () => (dragging = true));
  window.addEventListener("pointerup", () => {
    dragging = false;
    controller.pendingSource.flush();
  });
  plan.addEventListener("pointermove", (ev) => {
    if (!dragging || !controller.state) {
      return;
    }
    const rect = plan.getBoundingClientRect();
    const [x, y] = pixelsToMeters(ev.clientX - rect.left, ev.clientY - rect.top, view);
    const result = controller.dragSource(x, y);
    sourceGlyph = [result.x, result.y];
    clampedBadge = result.clamped;
    if (result.clamped) {
      showBadge("clamped to r ≥ d/2", 600);
    }
    renderAll();
    void refreshPattern();
  });

  for (const key of ["m", "d", "g"] as const) {
    const slider = $(`mic-${key}`) as HTMLInputElement;
    slider.addEventListener("change", async () => {
      await controller.setMic(0, { [key]: parseFloat(slider.value) });
      await refreshPattern();
      renderAll();
    });
  }
  const freq = $("pattern-f") as HTMLInputElement;
  freq.addEventListener("change", () => {
    patternFreq = parseFloat(freq.value);
    void refreshPattern();
  });
  const mode = $("pattern-mode") as HTMLSelectElement;
  mode.addEventListener("change", () => {
    patternMode = mode.value;
    void refreshPattern();
  });
}

bindUi();
