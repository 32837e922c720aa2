/** Drag state for text fragments floating on the canvas, and the boolean
 * merge menu offered when one is dropped back onto the document. */

import type { BooleanOp, FragmentInfo, Selection } from "./wire.js";

export interface DropMenuItem {
  op: BooleanOp;
  label: string;
}

/** Menu shown on drop, in display order. */
export const DROP_MENU: readonly DropMenuItem[] = [
  { op: "unite", label: "Unite" },
  { op: "intersect", label: "Intersect" },
  { op: "subtract", label: "Subtract" },
  { op: "exclude", label: "Exclude" },
  { op: "insert_raw", label: "Insert" },
];

export type DropTarget =
  | { kind: "canvas"; x: number; y: number }
  | { kind: "text"; selection: Selection };

interface ActiveDrag {
  fragmentId: string;
  grabDx: number;
  grabDy: number;
  x: number;
  y: number;
}

/** Tracks one fragment drag from grab to release. Pure position bookkeeping;
 * the caller turns the released target into a service call. */
export class FragmentDragController {
  private drag: ActiveDrag | null = null;

  get active(): boolean {
    return this.drag !== null;
  }

  get draggedFragmentId(): string | null {
    return this.drag?.fragmentId ?? null;
  }

  /** Current top-left position of the dragged fragment. */
  get position(): { x: number; y: number } | null {
    if (!this.drag) return null;
    return { x: this.drag.x, y: this.drag.y };
  }

  begin(fragment: FragmentInfo, pointerX: number, pointerY: number): void {
    this.drag = {
      fragmentId: fragment.id,
      grabDx: pointerX - fragment.x,
      grabDy: pointerY - fragment.y,
      x: fragment.x,
      y: fragment.y,
    };
  }

  update(pointerX: number, pointerY: number): void {
    if (!this.drag) return;
    this.drag.x = pointerX - this.drag.grabDx;
    this.drag.y = pointerY - this.drag.grabDy;
  }

  /** Finish the drag. Returns what the release amounts to, or null when no
   * drag was in flight. */
  release(target: DropTarget): { fragmentId: string; target: DropTarget } | null {
    if (!this.drag) return null;
    const fragmentId = this.drag.fragmentId;
    this.drag = null;
    return { fragmentId, target };
  }

  cancel(): void {
    this.drag = null;
  }
}
