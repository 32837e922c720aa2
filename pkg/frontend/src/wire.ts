/** JSON shapes exchanged with the editor service. All offsets and counts are
 * grapheme-cluster offsets, matching what the server reports. */

export type WireOp =
  | { retain: number }
  | { delete: string }
  | { insert: string };

export type WireChangeset = WireOp[];

export type EventKind = "delete" | "insert";

export interface TimelineEventWire {
  start: number;
  end: number;
  kind: EventKind;
  start_ms: number;
  end_ms: number;
}

export interface TimelineWire {
  total_ms: number;
  events: TimelineEventWire[];
}

export interface ToneWire {
  formality: number;
  sentiment: number;
  complexity: number;
}

export interface LayerInfo {
  ordinal: number;
  name: string;
  visible: boolean;
  edit_count: number;
}

export interface FragmentInfo {
  id: string;
  text: string;
  x: number;
  y: number;
  width: number;
}

export interface DocumentState {
  id: string;
  text: string;
  revision: number;
  active_layer: number;
  layers: LayerInfo[];
  fragments: FragmentInfo[];
  current_tone: ToneWire;
  op_count: number;
}

/** One mutation as broadcast on the change feed and echoed in responses. */
export interface ChangeEvent {
  changeset: WireChangeset;
  timeline: TimelineWire;
  revision: number;
}

export interface TransformResponse extends ChangeEvent {
  new_composition: string;
  new_selection: [number, number];
  provenance: Record<string, string>;
}

export interface DropResponse extends ChangeEvent {
  new_composition: string;
  new_selection: [number, number];
}

export interface FragmentResponse extends ChangeEvent {
  fragment: FragmentInfo;
}

export interface LayerStateResponse extends ChangeEvent {
  state: DocumentState;
}

export interface CreateLayerResponse extends LayerStateResponse {
  ordinal: number;
}

export type UndoResponse = LayerStateResponse;

export type TransformOp =
  | "erase"
  | "repair"
  | "smudge"
  | "number"
  | "tense"
  | "tone"
  | "prompt"
  | "rotate"
  | "resize"
  | "split"
  | "combine";

export type BooleanOp =
  | "unite"
  | "intersect"
  | "subtract"
  | "exclude"
  | "insert_raw";

export interface Selection {
  start: number;
  end: number;
}
