/** Rotation handle geometry: pointer position around the selection's
 * bounding-box center becomes the restructuring strength sent to the
 * service's rotate tool. */

export interface Point {
  x: number;
  y: number;
}

/** Angle of the pointer around the center, folded into [0, 180] degrees.
 *
 * Screen coordinates grow downward, so the vertical delta is flipped first;
 * dragging the handle to either side of the horizontal sweeps 0..180
 * symmetrically. A pointer sitting on the center reads 0.
 */
export function rotationAngle(center: Point, pointer: Point): number {
  const dx = pointer.x - center.x;
  const dy = center.y - pointer.y;
  if (dx === 0 && dy === 0) return 0;
  const degrees = (Math.atan2(dy, dx) * 180) / Math.PI;
  return Math.abs(degrees);
}
