import { describe, expect, it } from "vitest";

import {
  classicalDirectivity,
  fitScale,
  maxDivergence,
  nullAngleDeg,
  pathFrom,
  polarPoints,
} from "../src/polar.js";

const anglesDeg = Array.from({ length: 72 }, (_, i) => i * 5);

describe("classicalDirectivity", () => {
  it("is the unit circle for m = 1", () => {
    for (const deg of anglesDeg) {
      expect(classicalDirectivity(1, (deg * Math.PI) / 180)).toBeCloseTo(1, 12);
    }
  });

  it("has the cardioid null at 180 degrees", () => {
    expect(classicalDirectivity(0.5, Math.PI)).toBeCloseTo(0, 12);
    expect(classicalDirectivity(0.5, 0)).toBeCloseTo(1, 12);
  });

  it("folds the figure-eight rear lobe to positive values", () => {
    expect(classicalDirectivity(0, Math.PI)).toBeCloseTo(1, 12);
    expect(classicalDirectivity(0, Math.PI / 2)).toBeCloseTo(0, 12);
  });
});

describe("polarPoints", () => {
  it("maps angle 0 to the right and 90 degrees up", () => {
    const pts = polarPoints([0, 90], [1, 1], 100, 100, 50);
    expect(pts[0].x).toBeCloseTo(150);
    expect(pts[0].y).toBeCloseTo(100);
    expect(pts[1].x).toBeCloseTo(100);
    expect(pts[1].y).toBeCloseTo(50); // canvas y grows downward
  });

  it("rejects mismatched grids", () => {
    expect(() => polarPoints([0, 90], [1], 0, 0, 1)).toThrow(/length/);
  });

  it("unit circle points stay on the radius for m = 1", () => {
    const mags = anglesDeg.map(() => 1);
    const pts = polarPoints(anglesDeg, mags, 0, 0, 10);
    for (const p of pts) {
      expect(Math.hypot(p.x, p.y)).toBeCloseTo(10, 9);
    }
  });
});

describe("widget helpers", () => {
  it("fitScale fits the peak to the radius", () => {
    expect(fitScale([0.5, 2.0, 1.0], 100)).toBeCloseTo(50);
  });

  it("nullAngleDeg finds the cardioid rear", () => {
    const mags = anglesDeg.map((d) => classicalDirectivity(0.5, (d * Math.PI) / 180));
    expect(nullAngleDeg(anglesDeg, mags)).toBe(180);
  });

  it("maxDivergence is zero against itself", () => {
    const mags = anglesDeg.map((d) => classicalDirectivity(0.25, (d * Math.PI) / 180));
    expect(maxDivergence(mags, mags)).toBe(0);
    const shifted = mags.map((v) => v + 0.02);
    expect(maxDivergence(shifted, mags)).toBeCloseTo(0.02, 12);
  });

  it("pathFrom emits a closed path", () => {
    const d = pathFrom([{ x: 1, y: 2 }, { x: 3, y: 4 }]);
    expect(d).toBe("M 1.00 2.00 L 3.00 4.00 Z");
    expect(pathFrom([])).toBe("");
  });
});
