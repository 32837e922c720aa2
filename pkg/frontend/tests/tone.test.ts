import { describe, expect, it } from "vitest";

import {
  LATTICE_SIZE,
  allTones,
  axisToChannel,
  channelToAxis,
  discToTone,
  rgbToTone,
  strongestChangeArrows,
  toneEquals,
  toneToDisc,
  toneToRgb,
} from "../src/tone.js";

describe("axis/channel quantization", () => {
  it("is inverse on every axis step", () => {
    for (let v = 0; v <= 10; v++) {
      expect(channelToAxis(axisToChannel(v))).toBe(v);
    }
  });

  it("rounds halves away from zero", () => {
    // 5 -> 127.5 must round up, not to even
    expect(axisToChannel(5)).toBe(128);
  });
});

describe("tone lattice round trips", () => {
  it("survives the wheel on all 1331 tones", () => {
    const tones = allTones();
    expect(tones).toHaveLength(LATTICE_SIZE);
    for (const tone of tones) {
      const { point, value } = toneToDisc(tone);
      expect(toneEquals(discToTone(point, value), tone)).toBe(true);
    }
  });

  it("survives the color encoding on all 1331 tones", () => {
    for (const tone of allTones()) {
      expect(toneEquals(rgbToTone(toneToRgb(tone)), tone)).toBe(true);
    }
  });
});

describe("wheel projection", () => {
  // Values pinned against the service's own projection.
  const cases: Array<
    [[number, number, number], [number, number, number]]
  > = [
    [[0, 0, 0], [0, 0, 0]],
    [[10, 0, 0], [1, 0, 1]],
    [[3, 7, 4], [-0.4008586747666239, 0.40499541911093634, 0.7019607843137254]],
    [[10, 10, 10], [0, 0, 1]],
    [[0, 10, 3], [-0.7445172028699697, 0.6676032763780271, 1]],
    [[6, 7, 3], [0.14465608611979217, 0.5511656587497086, 0.7019607843137254]],
  ];

  it.each(cases)("projects %j to the pinned wheel position", (axes, want) => {
    const { point, value } = toneToDisc({
      formality: axes[0],
      sentiment: axes[1],
      complexity: axes[2],
    });
    expect(point.x).toBeCloseTo(want[0], 12);
    expect(point.y).toBeCloseTo(want[1], 12);
    expect(value).toBeCloseTo(want[2], 12);
  });

  it("keeps every thumb inside the unit disc", () => {
    for (const tone of allTones()) {
      const { point } = toneToDisc(tone);
      expect(Math.hypot(point.x, point.y)).toBeLessThanOrEqual(1 + 1e-12);
    }
  });
});

describe("strongest change arrows", () => {
  it("matches the pinned probe at a mixed tone", () => {
    const { point, value } = toneToDisc({
      formality: 3,
      sentiment: 7,
      complexity: 4,
    });
    const [f, s, c] = strongestChangeArrows(point, value);
    expect(f.x).toBeCloseTo(0.703467668727852, 9);
    expect(f.y).toBeCloseTo(-0.7107272606665661, 9);
    expect(s.x).toBe(0);
    expect(s.y).toBe(0);
    expect(c.x).toBeCloseTo(-0.12129186843198254, 9);
    expect(c.y).toBeCloseTo(-0.992616886141012, 9);
  });

  it("returns unit vectors or zero", () => {
    const { point, value } = toneToDisc({
      formality: 2,
      sentiment: 5,
      complexity: 5,
    });
    for (const arrow of strongestChangeArrows(point, value)) {
      const norm = Math.hypot(arrow.x, arrow.y);
      expect(norm === 0 || Math.abs(norm - 1) < 1e-9).toBe(true);
    }
  });
});
