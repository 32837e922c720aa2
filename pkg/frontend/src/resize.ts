/** Pixel-to-word conversion for the selection resize handle.
 *
 * Dragging the handle does not edit anything locally: it only turns the
 * horizontal travel into a whole-word target for the service's length tool.
 * The conversion uses the mean rendered advance of the selection's own words,
 * re-measured on every drag so font or zoom changes are picked up.
 */

/** Rendered width of a piece of text in pixels, e.g. canvas measureText. */
export type TextMeasurer = (text: string) => number;

export function splitWords(text: string): string[] {
  return text.split(/\s+/).filter((w) => w.length > 0);
}

/** Average horizontal advance of one word plus its following space. */
export function meanWordAdvance(
  selectionText: string,
  measure: TextMeasurer,
): number {
  const words = splitWords(selectionText);
  if (!words.length) return 0;
  let total = 0;
  for (const word of words) total += measure(word + " ");
  return total / words.length;
}

export interface ResizePlan {
  currentWords: number;
  targetWords: number;
  deltaWords: number;
  /** Live label shown next to the handle mid-drag. */
  badge: string;
}

/** Turn a drag distance into a word-count target, or null when the drag does
 * not amount to a request (no travel, or less than half a word of it). */
export function planResizeDrag(
  selectionText: string,
  pixelDx: number,
  measure: TextMeasurer,
): ResizePlan | null {
  const words = splitWords(selectionText);
  if (!words.length) return null;
  const advance = meanWordAdvance(selectionText, measure);
  if (!(advance > 0)) return null;
  const deltaWords = Math.round(pixelDx / advance);
  if (deltaWords === 0) return null;
  const currentWords = words.length;
  const targetWords = Math.max(1, currentWords + deltaWords);
  if (targetWords === currentWords) return null;
  return {
    currentWords,
    targetWords,
    deltaWords: targetWords - currentWords,
    badge: `${targetWords} ${targetWords === 1 ? "word" : "words"}`,
  };
}
