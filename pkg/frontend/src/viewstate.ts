/** State for one open document view: text, selection, tool, tone widget,
 * layers, fragments, and the queue of pending change animations.
 *
 * Everything that edits text goes through the service; this class only
 * replays the scripts the service returns. All state writes happen
 * synchronously after each awaited call, so observers never see a half
 * applied change. Change events (from responses or the SSE feed) are gated
 * by revision: stale ones are dropped, and anything that cannot be replayed
 * flags a hard refresh instead of guessing.
 */

import type { EditorApi, TransformRequest } from "./api.js";
import { graphemes, mapSelection, sourceLength } from "./changeset.js";
import { FragmentDragController } from "./fragments.js";
import { planResizeDrag, type ResizePlan, type TextMeasurer } from "./resize.js";
import { rotationAngle, type Point } from "./rotate.js";
import {
  discToTone,
  toneToDisc,
  type DiscPoint,
  type ToneAxis,
  type ToneVector,
} from "./tone.js";
import { renderTimeline, type TimelineRender } from "./timeline.js";
import type {
  BooleanOp,
  ChangeEvent,
  DocumentState,
  DropResponse,
  FragmentInfo,
  LayerInfo,
  LayerStateResponse,
  Selection,
  ToneWire,
  TransformOp,
  TransformResponse,
} from "./wire.js";

export type ActiveTool =
  | "cursor"
  | "eraser"
  | "repair"
  | "smudge"
  | "tone-brush"
  | "eyedropper"
  | "prompt"
  | "lasso";

export interface ToneWidgetState {
  vector: ToneVector;
  thumb: DiscPoint;
  value: number;
}

export type ChangeOutcome = "applied" | "stale" | "refresh";

function clampSelection(sel: Selection, length: number): Selection {
  const start = Math.max(0, Math.min(sel.start, length));
  const end = Math.max(start, Math.min(sel.end, length));
  return { start, end };
}

function clampToDisc(point: DiscPoint): DiscPoint {
  const radius = Math.hypot(point.x, point.y);
  if (radius <= 1) return point;
  return { x: point.x / radius, y: point.y / radius };
}

export class EditorViewState {
  readonly docId: string;
  text = "";
  revision = -1;
  selection: Selection = { start: 0, end: 0 };
  activeTool: ActiveTool = "cursor";
  layers: LayerInfo[] = [];
  activeLayer = 0;
  fragments: FragmentInfo[] = [];
  toneWidget: ToneWidgetState;
  /** Renders waiting to be played, oldest first. */
  animationQueue: TimelineRender[] = [];
  /** Set when an event could not be replayed; call refresh() to recover. */
  needsRefresh = false;
  readonly fragmentDrag = new FragmentDragController();

  constructor(
    private readonly api: EditorApi,
    state: DocumentState,
  ) {
    this.docId = state.id;
    this.toneWidget = { vector: state.current_tone, thumb: { x: 0, y: 0 }, value: 0 };
    this.syncFromState(state);
  }

  static async open(api: EditorApi, docId: string): Promise<EditorViewState> {
    return new EditorViewState(api, await api.getDocument(docId));
  }

  static async create(api: EditorApi, text: string): Promise<EditorViewState> {
    return new EditorViewState(api, await api.createDocument(text));
  }

  /** Adopt a full server snapshot. The tone widget always ends up equal to
   * the document's current tone. */
  syncFromState(state: DocumentState): void {
    this.text = state.text;
    this.revision = state.revision;
    this.layers = state.layers;
    this.activeLayer = state.active_layer;
    this.fragments = state.fragments;
    this.setToneWidgetFromServer(state.current_tone);
  }

  async refresh(): Promise<void> {
    const state = await this.api.getDocument(this.docId);
    this.syncFromState(state);
    this.animationQueue = [];
    this.needsRefresh = false;
  }

  setActiveTool(tool: ActiveTool): void {
    this.activeTool = tool;
  }

  selectedText(): string {
    const clusters = graphemes(this.text);
    const sel = clampSelection(this.selection, clusters.length);
    return clusters.slice(sel.start, sel.end).join("");
  }

  /** Next animation to play, if any. */
  shiftAnimation(): TimelineRender | undefined {
    return this.animationQueue.shift();
  }

  // -- change intake ---------------------------------------------------------

  /** Feed one change event (SSE or response echo) through the revision gate. */
  handleChangeEvent(event: ChangeEvent): ChangeOutcome {
    return this.absorb(event);
  }

  private absorb(event: ChangeEvent, authoritativeText?: string): ChangeOutcome {
    if (event.revision <= this.revision) return "stale";
    const render = renderTimeline(this.text, event.changeset, event.timeline);
    if (render === null) {
      // Cannot replay against what we have. A response that carries the new
      // composition is still authoritative; a bare feed event is not.
      if (authoritativeText === undefined) {
        this.needsRefresh = true;
        return "refresh";
      }
      this.text = authoritativeText;
      this.revision = event.revision;
      return "applied";
    }
    const bounded = clampSelection(this.selection, sourceLength(event.changeset));
    this.selection = mapSelection(event.changeset, bounded);
    this.text = authoritativeText ?? render.finalText;
    this.revision = event.revision;
    if (render.hasVisibleChange) this.animationQueue.push(render);
    return "applied";
  }

  // -- transforms --------------------------------------------------------------

  async runTransform(
    op: TransformOp,
    params: Record<string, unknown> = {},
  ): Promise<TransformResponse> {
    const response = await this.api.transform(this.docId, {
      op,
      start: this.selection.start,
      end: this.selection.end,
      params,
    } satisfies TransformRequest);
    this.absorb(response, response.new_composition);
    this.text = response.new_composition;
    this.selection = {
      start: response.new_selection[0],
      end: response.new_selection[1],
    };
    return response;
  }

  async undo(): Promise<void> {
    const response = await this.api.undo(this.docId);
    this.absorb(response, response.state.text);
    this.syncFromState(response.state);
  }

  /** Handle drag on the selection resize grip. Returns the issued plan, or
   * null when the travel was too small to ask for anything. */
  async resizeByPixels(
    pixelDx: number,
    measure: TextMeasurer,
  ): Promise<ResizePlan | null> {
    const plan = this.previewResize(pixelDx, measure);
    if (plan === null) return null;
    await this.runTransform("resize", { target_words: plan.targetWords });
    return plan;
  }

  /** Same conversion as resizeByPixels but without the request, for the live
   * badge shown mid-drag. */
  previewResize(pixelDx: number, measure: TextMeasurer): ResizePlan | null {
    return planResizeDrag(this.selectedText(), pixelDx, measure);
  }

  async rotateByPointer(center: Point, pointer: Point): Promise<TransformResponse> {
    return this.runTransform("rotate", { angle: rotationAngle(center, pointer) });
  }

  // -- tone widget ---------------------------------------------------------------

  private setToneWidgetFromServer(tone: ToneWire): void {
    const { point, value } = toneToDisc(tone);
    this.toneWidget = { vector: tone, thumb: point, value };
  }

  /** Wheel drag: the thumb follows the pointer and every slider updates live. */
  setToneWheel(point: DiscPoint): void {
    const thumb = clampToDisc(point);
    this.toneWidget = {
      vector: discToTone(thumb, this.toneWidget.value),
      thumb,
      value: this.toneWidget.value,
    };
  }

  /** Axis slider: the vector changes and the thumb re-projects to match. */
  setToneSlider(axis: ToneAxis, v: number): void {
    const vector = { ...this.toneWidget.vector, [axis]: v };
    const { point, value } = toneToDisc(vector);
    this.toneWidget = { vector, thumb: point, value };
  }

  setToneValue(value: number): void {
    const clamped = Math.max(0, Math.min(1, value));
    this.toneWidget = {
      vector: discToTone(this.toneWidget.thumb, clamped),
      thumb: this.toneWidget.thumb,
      value: clamped,
    };
  }

  /** Brush commit: rewrite the selection in the widget's tone. */
  async applyTone(): Promise<TransformResponse> {
    return this.runTransform("tone", { ...this.toneWidget.vector });
  }

  /** Eyedropper: ask the service for the selection's tone and load it into
   * the widget. */
  async estimateToneOfSelection(): Promise<ToneVector> {
    const response = await this.api.estimateToneOfSelection(
      this.docId,
      this.selection,
    );
    this.absorb(response);
    const tone: ToneVector = {
      formality: response.formality,
      sentiment: response.sentiment,
      complexity: response.complexity,
    };
    this.setToneWidgetFromServer(tone);
    return tone;
  }

  // -- layers -----------------------------------------------------------------------

  /** Flip one layer's visibility. The PATCH response carries both the edit
   * script and the fresh snapshot, so the view updates without a reload. */
  async toggleLayer(ordinal: number): Promise<LayerStateResponse> {
    const layer = this.layers.find((l) => l.ordinal === ordinal);
    if (!layer) throw new Error(`no layer with ordinal ${ordinal}`);
    const response = await this.api.patchLayer(this.docId, ordinal, {
      visible: !layer.visible,
    });
    this.absorb(response, response.state.text);
    this.syncFromState(response.state);
    return response;
  }

  async addLayer(name?: string): Promise<number> {
    const response = await this.api.createLayer(this.docId, name);
    this.absorb(response, response.state.text);
    this.syncFromState(response.state);
    return response.ordinal;
  }

  async setActiveLayer(ordinal: number): Promise<void> {
    const response = await this.api.patchLayer(this.docId, ordinal, {
      active: true,
    });
    this.absorb(response, response.state.text);
    this.syncFromState(response.state);
  }

  // -- fragments ------------------------------------------------------------------------

  /** Lasso the current selection out of the document onto the canvas. */
  async fragmentOut(x: number, y: number): Promise<FragmentInfo> {
    const response = await this.api.fragmentOut(this.docId, this.selection, { x, y });
    this.absorb(response);
    this.fragments = [...this.fragments, response.fragment];
    return response.fragment;
  }

  /** Persist a fragment's new canvas position after a drag. */
  async moveFragment(fragmentId: string, x: number, y: number): Promise<void> {
    const response = await this.api.moveFragment(this.docId, fragmentId, { x, y });
    this.absorb(response);
    this.fragments = this.fragments.map((f) =>
      f.id === response.fragment.id ? response.fragment : f,
    );
  }

  /** Merge a fragment back into the document with the chosen boolean op, or
   * insert it verbatim at a caret. */
  async dropFragmentAs(
    fragmentId: string,
    op: BooleanOp,
    target: Selection,
  ): Promise<DropResponse> {
    const response = await this.api.dropFragment(this.docId, fragmentId, op, target);
    this.absorb(response, response.new_composition);
    this.text = response.new_composition;
    this.selection = {
      start: response.new_selection[0],
      end: response.new_selection[1],
    };
    this.fragments = this.fragments.filter((f) => f.id !== fragmentId);
    return response;
  }
}
