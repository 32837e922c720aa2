/** Tone picker math: the three writing axes, their color encoding, and the
 * wheel geometry. Mirrors the service bit for bit so a thumb position chosen
 * here and quantized back always lands on the same lattice point the server
 * would report.
 *
 * Axes run 0..10 in integer steps (an 11x11x11 lattice). Formality maps to
 * the red channel, sentiment to green, complexity to blue; the wheel shows
 * hue as angle and saturation as radius while the value channel rides on a
 * separate slider.
 */

import type { ToneWire } from "./wire.js";

export const AXIS_MIN = 0;
export const AXIS_MAX = 10;
export const LATTICE_SIZE = (AXIS_MAX - AXIS_MIN + 1) ** 3;

export type ToneVector = ToneWire;

export type ToneAxis = keyof ToneVector;

export const TONE_AXES: ToneAxis[] = ["formality", "sentiment", "complexity"];

export function isToneVector(value: unknown): value is ToneVector {
  if (typeof value !== "object" || value === null) return false;
  const record = value as Record<string, unknown>;
  return TONE_AXES.every((axis) => {
    const v = record[axis];
    return (
      typeof v === "number" &&
      Number.isInteger(v) &&
      v >= AXIS_MIN &&
      v <= AXIS_MAX
    );
  });
}

export function toneEquals(a: ToneVector, b: ToneVector): boolean {
  return TONE_AXES.every((axis) => a[axis] === b[axis]);
}

/** Round with halves going away from zero (Math.round sends -0.5 to -0). */
export function roundHalfAway(x: number): number {
  return x >= 0 ? Math.floor(x + 0.5) : Math.ceil(x - 0.5);
}

export function axisToChannel(v: number): number {
  return roundHalfAway((255 * v) / 10);
}

export function channelToAxis(c: number): number {
  return roundHalfAway((10 * c) / 255);
}

export type Rgb = [number, number, number];

export function toneToRgb(tone: ToneVector): Rgb {
  return [
    axisToChannel(tone.formality),
    axisToChannel(tone.sentiment),
    axisToChannel(tone.complexity),
  ];
}

export function rgbToTone(rgb: Rgb): ToneVector {
  return {
    formality: channelToAxis(rgb[0]),
    sentiment: channelToAxis(rgb[1]),
    complexity: channelToAxis(rgb[2]),
  };
}

/** Hexcone conversions on unit-range channels, kept operation-for-operation
 * identical to the server's so quantization agrees on every lattice point. */
export function rgbToHsv(
  r: number,
  g: number,
  b: number,
): [number, number, number] {
  const maxc = Math.max(r, g, b);
  const minc = Math.min(r, g, b);
  const rangec = maxc - minc;
  const v = maxc;
  if (minc === maxc) return [0, 0, v];
  const s = rangec / maxc;
  const rc = (maxc - r) / rangec;
  const gc = (maxc - g) / rangec;
  const bc = (maxc - b) / rangec;
  let h: number;
  if (r === maxc) h = bc - gc;
  else if (g === maxc) h = 2 + rc - bc;
  else h = 4 + gc - rc;
  h = (((h / 6) % 1) + 1) % 1;
  return [h, s, v];
}

export function hsvToRgb(
  h: number,
  s: number,
  v: number,
): [number, number, number] {
  if (s === 0) return [v, v, v];
  let i = Math.trunc(h * 6);
  const f = h * 6 - i;
  const p = v * (1 - s);
  const q = v * (1 - s * f);
  const t = v * (1 - s * (1 - f));
  i = ((i % 6) + 6) % 6;
  switch (i) {
    case 0:
      return [v, t, p];
    case 1:
      return [q, v, p];
    case 2:
      return [p, v, t];
    case 3:
      return [p, q, v];
    case 4:
      return [t, p, v];
    default:
      return [v, p, q];
  }
}

/** Wheel thumb position in unit-radius coordinates. */
export interface DiscPoint {
  x: number;
  y: number;
}

/** Project a tone onto the wheel: hue is the angle, saturation the radius,
 * and the value channel rides along unchanged. */
export function toneToDisc(tone: ToneVector): { point: DiscPoint; value: number } {
  const [r, g, b] = toneToRgb(tone);
  const [h, s, v] = rgbToHsv(r / 255, g / 255, b / 255);
  const angle = 2 * Math.PI * h;
  return {
    point: { x: s * Math.cos(angle), y: s * Math.sin(angle) },
    value: v,
  };
}

/** Nearest lattice tone for a wheel position at the given value level. */
export function discToTone(point: DiscPoint, value: number): ToneVector {
  const s = Math.min(Math.hypot(point.x, point.y), 1);
  const h = ((Math.atan2(point.y, point.x) / (2 * Math.PI)) % 1 + 1) % 1;
  const [r, g, b] = hsvToRgb(h, s, value);
  return {
    formality: channelToAxis(roundHalfAway(r * 255)),
    sentiment: channelToAxis(roundHalfAway(g * 255)),
    complexity: channelToAxis(roundHalfAway(b * 255)),
  };
}

// Finite-difference step for the strongest-change probe, as a fraction of
// the wheel radius.
const GRADIENT_STEP = 1e-3;
const GRADIENT_EPSILON = 1e-9;

function axesAt(x: number, y: number, value: number): Rgb {
  const s = Math.min(Math.hypot(x, y), 1);
  const h = ((Math.atan2(y, x) / (2 * Math.PI)) % 1 + 1) % 1;
  const [r, g, b] = hsvToRgb(h, s, value);
  return [r * 10, g * 10, b * 10];
}

/** Unit direction of steepest increase for each axis at a wheel position,
 * for the arrow overlay. An axis that does not vary locally gets the zero
 * vector. */
export function strongestChangeArrows(
  point: DiscPoint,
  value: number,
): [DiscPoint, DiscPoint, DiscPoint] {
  const h = GRADIENT_STEP;
  const px = axesAt(point.x + h, point.y, value);
  const mx = axesAt(point.x - h, point.y, value);
  const py = axesAt(point.x, point.y + h, value);
  const my = axesAt(point.x, point.y - h, value);
  const arrows: DiscPoint[] = [];
  for (let i = 0; i < 3; i++) {
    const gx = ((px[i] as number) - (mx[i] as number)) / (2 * h);
    const gy = ((py[i] as number) - (my[i] as number)) / (2 * h);
    const norm = Math.hypot(gx, gy);
    arrows.push(
      norm < GRADIENT_EPSILON
        ? { x: 0, y: 0 }
        : { x: gx / norm, y: gy / norm },
    );
  }
  return arrows as [DiscPoint, DiscPoint, DiscPoint];
}

/** The full 1331-point lattice, lexicographic order. */
export function allTones(): ToneVector[] {
  const out: ToneVector[] = [];
  for (let f = AXIS_MIN; f <= AXIS_MAX; f++)
    for (let s = AXIS_MIN; s <= AXIS_MAX; s++)
      for (let c = AXIS_MIN; c <= AXIS_MAX; c++)
        out.push({ formality: f, sentiment: s, complexity: c });
  return out;
}
