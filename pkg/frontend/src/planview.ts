/**
 * Plan-view model: meters <-> pixels, and the validity clamp that keeps a
 * dragged source outside every microphone's capsule pair. Physics stays on
 * the server; this module only mirrors the r >= d/2 rule for glyph motion.
 */

export interface MicGlyph {
  x: number;
  y: number;
  orientation: number;
  d: number;
}

export interface ViewTransform {
  /** canvas pixel of scene origin */
  originX: number;
  originY: number;
  pixelsPerMeter: number;
}

export function metersToPixels(x: number, y: number, view: ViewTransform): [number, number] {
  return [view.originX + x * view.pixelsPerMeter,
          view.originY - y * view.pixelsPerMeter];
}

export function pixelsToMeters(px: number, py: number, view: ViewTransform): [number, number] {
  return [(px - view.originX) / view.pixelsPerMeter,
          (view.originY - py) / view.pixelsPerMeter];
}

export function zoom(view: ViewTransform, factor: number,
                     minPpm = 5, maxPpm = 50000): ViewTransform {
  const ppm = Math.min(maxPpm, Math.max(minPpm, view.pixelsPerMeter * factor));
  return { ...view, pixelsPerMeter: ppm };
}

export interface ClampResult {
  x: number;
  y: number;
  clamped: boolean;
}

/**
 * Push a proposed source position out of any violated validity circle
 * (radius d/2 around each mic). The position lands on the circle of the
 * violated mic; a source exactly on a mic center exits along the mic axis.
 */
export function clampToValidity(x: number, y: number, mics: MicGlyph[]): ClampResult {
  let cx = x;
  let cy = y;
  let clamped = false;
  for (const mic of mics) {
    const limit = mic.d / 2;
    let dx = cx - mic.x;
    let dy = cy - mic.y;
    let dist = Math.hypot(dx, dy);
    if (dist >= limit) {
      continue;
    }
    if (dist === 0) {
      dx = Math.cos(mic.orientation);
      dy = Math.sin(mic.orientation);
      dist = 1;
    }
    cx = mic.x + (dx / dist) * limit;
    cy = mic.y + (dy / dist) * limit;
    clamped = true;
  }
  return { x: cx, y: cy, clamped };
}

/** True when the position sits strictly inside some validity circle. */
export function violatesValidity(x: number, y: number, mics: MicGlyph[]): boolean {
  return mics.some((mic) => Math.hypot(x - mic.x, y - mic.y) < mic.d / 2);
}
