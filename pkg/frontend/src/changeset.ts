/** Client-side replay of server edit scripts.
 *
 * The service is the only place transforms are computed; this module merely
 * re-applies the retain/delete/insert scripts it sends so the view can animate
 * them and keep carets in place. Offsets count grapheme clusters, so "é"
 * and a ZWJ emoji family are each one unit, exactly as the server counts them.
 */

import type { Selection, WireChangeset, WireOp } from "./wire.js";

const segmenter = new Intl.Segmenter(undefined, { granularity: "grapheme" });

export function graphemes(text: string): string[] {
  const out: string[] = [];
  for (const piece of segmenter.segment(text)) out.push(piece.segment);
  return out;
}

export function graphemeLength(text: string): number {
  return graphemes(text).length;
}

export class ChangesetError extends Error {}

function isRetain(op: WireOp): op is { retain: number } {
  return "retain" in op;
}

function isDelete(op: WireOp): op is { delete: string } {
  return "delete" in op;
}

function isInsert(op: WireOp): op is { insert: string } {
  return "insert" in op;
}

/** Structural check for a wire-level op list. Unknown keys, negative retains,
 * or non-string payloads all fail; the caller decides whether that means a
 * protocol error or a hard refresh. */
export function isWellFormed(ops: unknown): ops is WireChangeset {
  if (!Array.isArray(ops)) return false;
  for (const op of ops) {
    if (typeof op !== "object" || op === null) return false;
    const keys = Object.keys(op);
    if (keys.length !== 1) return false;
    const record = op as Record<string, unknown>;
    if (keys[0] === "retain") {
      const n = record["retain"];
      if (typeof n !== "number" || !Number.isInteger(n) || n < 0) return false;
    } else if (keys[0] === "delete" || keys[0] === "insert") {
      if (typeof record[keys[0]] !== "string") return false;
    } else {
      return false;
    }
  }
  return true;
}

export function sourceLength(ops: WireChangeset): number {
  let n = 0;
  for (const op of ops) {
    if (isRetain(op)) n += op.retain;
    else if (isDelete(op)) n += graphemeLength(op.delete);
  }
  return n;
}

export function targetLength(ops: WireChangeset): number {
  let n = 0;
  for (const op of ops) {
    if (isRetain(op)) n += op.retain;
    else if (isInsert(op)) n += graphemeLength(op.insert);
  }
  return n;
}

export function isIdentity(ops: WireChangeset): boolean {
  return ops.every(isRetain);
}

/** Re-apply a server changeset to the text it was diffed against. Throws
 * ChangesetError when the script does not fit the text. */
export function applyChangeset(oldText: string, ops: WireChangeset): string {
  const clusters = graphemes(oldText);
  if (sourceLength(ops) !== clusters.length) {
    throw new ChangesetError(
      `changeset expects source of length ${sourceLength(ops)}, got ${clusters.length}`,
    );
  }
  const out: string[] = [];
  let pos = 0;
  for (const op of ops) {
    if (isRetain(op)) {
      out.push(...clusters.slice(pos, pos + op.retain));
      pos += op.retain;
    } else if (isDelete(op)) {
      const n = graphemeLength(op.delete);
      if (clusters.slice(pos, pos + n).join("") !== op.delete) {
        throw new ChangesetError(
          `delete of ${JSON.stringify(op.delete)} does not match source at offset ${pos}`,
        );
      }
      pos += n;
    } else {
      out.push(op.insert);
    }
  }
  return out.join("");
}

/** Map a source offset into target coordinates. An insertion at the offset
 * itself moves the position only under bias "right"; positions inside a
 * deleted region collapse to its start. */
export function mapPosition(
  ops: WireChangeset,
  p: number,
  bias: "left" | "right" = "left",
): number {
  if (p < 0 || p > sourceLength(ops)) {
    throw new ChangesetError(
      `position ${p} outside source of length ${sourceLength(ops)}`,
    );
  }
  let src = 0;
  let shift = 0;
  for (const op of ops) {
    if (isRetain(op)) {
      src += op.retain;
    } else if (isInsert(op)) {
      const n = graphemeLength(op.insert);
      if (p > src || (p === src && bias === "right")) shift += n;
    } else {
      const n = graphemeLength(op.delete);
      if (p >= src + n) shift -= n;
      else if (p > src) return src + shift;
      src += n;
    }
  }
  return p + shift;
}

export function mapSelection(ops: WireChangeset, sel: Selection): Selection {
  return {
    start: mapPosition(ops, sel.start, "left"),
    end: mapPosition(ops, sel.end, "left"),
  };
}
