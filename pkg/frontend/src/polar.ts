/** Geometry for the polar pattern widget (display transforms only). */

export interface Point {
  x: number;
  y: number;
}

/** The classical first-order law, drawn as the didactic overlay. */
export function classicalDirectivity(m: number, thetaRad: number): number {
  return Math.abs(m + (1 - m) * Math.cos(thetaRad));
}

/**
 * Map magnitudes on an angle grid to canvas points. Angle 0 points right,
 * angles grow counterclockwise, canvas y grows downward.
 */
export function polarPoints(
  anglesDeg: number[],
  magnitudes: number[],
  cx: number,
  cy: number,
  scale: number,
): Point[] {
  if (anglesDeg.length !== magnitudes.length) {
    throw new Error("angle and magnitude grids differ in length");
  }
  return anglesDeg.map((deg, i) => {
    const rad = (deg * Math.PI) / 180;
    return {
      x: cx + scale * magnitudes[i] * Math.cos(rad),
      y: cy - scale * magnitudes[i] * Math.sin(rad),
    };
  });
}

/** Scale that fits the largest magnitude inside the widget radius. */
export function fitScale(magnitudes: number[], radius: number): number {
  const peak = Math.max(...magnitudes, 1e-12);
  return radius / peak;
}

/** Angle (degrees) of the deepest pattern minimum. */
export function nullAngleDeg(anglesDeg: number[], magnitudes: number[]): number {
  let best = 0;
  for (let i = 1; i < magnitudes.length; i++) {
    if (magnitudes[i] < magnitudes[best]) {
      best = i;
    }
  }
  return anglesDeg[best];
}

/** Largest |simulated - classical| over the grid, for the divergence badge. */
export function maxDivergence(magnitude: number[], classical: number[]): number {
  let worst = 0;
  for (let i = 0; i < magnitude.length; i++) {
    worst = Math.max(worst, Math.abs(magnitude[i] - classical[i]));
  }
  return worst;
}

/** SVG path string through the points, closed. */
export function pathFrom(points: Point[]): string {
  if (points.length === 0) {
    return "";
  }
  const parts = points.map(
    (p, i) => `${i === 0 ? "M" : "L"} ${p.x.toFixed(2)} ${p.y.toFixed(2)}`);
  return `${parts.join(" ")} Z`;
}
