/** Change-highlight animation: deletions flash red and shrink during the
 * first half second, insertions grow in green during the second half.
 *
 * The renderer never invents an end state: it replays the server changeset,
 * and anything malformed (bad offsets, unknown kinds, a timeline that does
 * not match the script) yields null so the caller can skip the animation and
 * hard-refresh instead of drawing garbage.
 */

import {
  applyChangeset,
  graphemeLength,
  graphemes,
  isIdentity,
  isWellFormed,
} from "./changeset.js";
import type {
  TimelineEventWire,
  TimelineWire,
  WireChangeset,
} from "./wire.js";

export const DELETE_COLOR = "#e5484d"; // red
export const INSERT_COLOR = "#30a46c"; // green

export const DELETE_PHASE_MS = 500;
export const INSERT_PHASE_MS = 500;

export type SpanKind = "steady" | "delete" | "insert";

export interface FrameSpan {
  text: string;
  kind: SpanKind;
  /** 1 fully shown, 0 collapsed. Deletions run 1 to 0 inside their window,
   * insertions 0 to 1. */
  scale: number;
  color?: string;
}

export interface TimelineRender {
  totalMs: number;
  finalText: string;
  /** False for pure-retain changesets: nothing to flash. */
  hasVisibleChange: boolean;
  frameAt(tMs: number): FrameSpan[];
  textAt(tMs: number): string;
}

interface AnimatedSpan {
  text: string;
  kind: SpanKind;
  startMs: number;
  endMs: number;
}

function expectedEvents(ops: WireChangeset): TimelineEventWire[] {
  const events: TimelineEventWire[] = [];
  let src = 0;
  let tgt = 0;
  for (const op of ops) {
    if ("retain" in op) {
      src += op.retain;
      tgt += op.retain;
    } else if ("delete" in op) {
      const n = graphemeLength(op.delete);
      events.push({
        start: src,
        end: src + n,
        kind: "delete",
        start_ms: 0,
        end_ms: DELETE_PHASE_MS,
      });
      src += n;
    } else {
      const n = graphemeLength(op.insert);
      events.push({
        start: tgt,
        end: tgt + n,
        kind: "insert",
        start_ms: DELETE_PHASE_MS,
        end_ms: DELETE_PHASE_MS + INSERT_PHASE_MS,
      });
      tgt += n;
    }
  }
  return events;
}

function timelineMatches(wire: TimelineWire, ops: WireChangeset): boolean {
  if (typeof wire !== "object" || wire === null) return false;
  if (!Array.isArray(wire.events)) return false;
  const expected = expectedEvents(ops);
  const expectedTotal = expected.length
    ? DELETE_PHASE_MS + INSERT_PHASE_MS
    : 0;
  if (wire.total_ms !== expectedTotal) return false;
  if (wire.events.length !== expected.length) return false;
  for (let i = 0; i < expected.length; i++) {
    const got = wire.events[i];
    const want = expected[i];
    if (got === undefined || want === undefined) return false;
    if (
      got.start !== want.start ||
      got.end !== want.end ||
      got.kind !== want.kind ||
      got.start_ms !== want.start_ms ||
      got.end_ms !== want.end_ms
    ) {
      return false;
    }
  }
  return true;
}

function spanScale(span: AnimatedSpan, tMs: number): number {
  if (span.kind === "steady") return 1;
  const { startMs, endMs } = span;
  const progress =
    tMs <= startMs ? 0 : tMs >= endMs ? 1 : (tMs - startMs) / (endMs - startMs);
  return span.kind === "delete" ? 1 - progress : progress;
}

/** Build the playable animation for one change event, or null when the event
 * cannot be trusted. */
export function renderTimeline(
  oldText: string,
  changeset: unknown,
  timeline: TimelineWire,
): TimelineRender | null {
  if (!isWellFormed(changeset)) return null;
  let finalText: string;
  try {
    finalText = applyChangeset(oldText, changeset);
  } catch {
    return null;
  }
  if (!timelineMatches(timeline, changeset)) return null;

  const clusters = graphemes(oldText);
  const spans: AnimatedSpan[] = [];
  let src = 0;
  for (const op of changeset) {
    if ("retain" in op) {
      spans.push({
        text: clusters.slice(src, src + op.retain).join(""),
        kind: "steady",
        startMs: 0,
        endMs: 0,
      });
      src += op.retain;
    } else if ("delete" in op) {
      spans.push({
        text: op.delete,
        kind: "delete",
        startMs: 0,
        endMs: DELETE_PHASE_MS,
      });
      src += graphemeLength(op.delete);
    } else {
      spans.push({
        text: op.insert,
        kind: "insert",
        startMs: DELETE_PHASE_MS,
        endMs: DELETE_PHASE_MS + INSERT_PHASE_MS,
      });
    }
  }

  const totalMs = timeline.total_ms;
  const frameAt = (tMs: number): FrameSpan[] =>
    spans.map((span) => {
      const frame: FrameSpan = {
        text: span.text,
        kind: span.kind,
        scale: spanScale(span, tMs),
      };
      if (span.kind === "delete") frame.color = DELETE_COLOR;
      else if (span.kind === "insert") frame.color = INSERT_COLOR;
      return frame;
    });

  return {
    totalMs,
    finalText,
    hasVisibleChange: !isIdentity(changeset),
    frameAt,
    textAt: (tMs) =>
      frameAt(tMs)
        .filter((span) => span.scale > 0)
        .map((span) => span.text)
        .join(""),
  };
}
