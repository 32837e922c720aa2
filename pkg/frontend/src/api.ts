/** Typed REST client for the editor service. Every document mutation in the
 * UI goes through here; nothing else talks to the network. */

import type {
  BooleanOp,
  ChangeEvent,
  CreateLayerResponse,
  DocumentState,
  DropResponse,
  FragmentResponse,
  LayerStateResponse,
  Selection,
  ToneWire,
  TransformOp,
  TransformResponse,
  UndoResponse,
} from "./wire.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export interface TransformRequest {
  op: TransformOp;
  start: number;
  end: number;
  params?: Record<string, unknown>;
}

interface FetchOptions {
  method: string;
  path: string;
  body?: unknown;
}

export class EditorApi {
  constructor(
    public readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(options: FetchOptions): Promise<T> {
    const init: RequestInit = { method: options.method };
    if (options.body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(options.body);
    }
    const response = await this.fetchImpl(this.baseUrl + options.path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const payload = (await response.json()) as { detail?: string };
        if (typeof payload.detail === "string") detail = payload.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  createDocument(text: string): Promise<DocumentState> {
    return this.request({ method: "POST", path: "/api/docs", body: { text } });
  }

  getDocument(docId: string): Promise<DocumentState> {
    return this.request({ method: "GET", path: `/api/docs/${docId}` });
  }

  transform(docId: string, req: TransformRequest): Promise<TransformResponse> {
    return this.request({
      method: "POST",
      path: `/api/docs/${docId}/transform`,
      body: { op: req.op, start: req.start, end: req.end, params: req.params ?? {} },
    });
  }

  undo(docId: string): Promise<UndoResponse> {
    return this.request({ method: "POST", path: `/api/docs/${docId}/undo` });
  }

  fragmentOut(
    docId: string,
    sel: Selection,
    position: { x: number; y: number; width?: number } = { x: 0, y: 0 },
  ): Promise<FragmentResponse> {
    return this.request({
      method: "POST",
      path: `/api/docs/${docId}/fragments`,
      body: { start: sel.start, end: sel.end, ...position },
    });
  }

  moveFragment(
    docId: string,
    fragmentId: string,
    patch: Partial<{ x: number; y: number; width: number }>,
  ): Promise<FragmentResponse> {
    return this.request({
      method: "PATCH",
      path: `/api/docs/${docId}/fragments/${fragmentId}`,
      body: patch,
    });
  }

  dropFragment(
    docId: string,
    fragmentId: string,
    op: BooleanOp,
    sel: Selection,
  ): Promise<DropResponse> {
    return this.request({
      method: "POST",
      path: `/api/docs/${docId}/fragments/${fragmentId}/drop`,
      body: { op, start: sel.start, end: sel.end },
    });
  }

  createLayer(docId: string, name?: string): Promise<CreateLayerResponse> {
    return this.request({
      method: "POST",
      path: `/api/docs/${docId}/layers`,
      body: name === undefined ? {} : { name },
    });
  }

  patchLayer(
    docId: string,
    ordinal: number,
    patch: Partial<{ name: string; visible: boolean; position: number; active: boolean }>,
  ): Promise<LayerStateResponse> {
    return this.request({
      method: "PATCH",
      path: `/api/docs/${docId}/layers/${ordinal}`,
      body: patch,
    });
  }

  deleteLayer(docId: string, ordinal: number): Promise<LayerStateResponse> {
    return this.request({
      method: "DELETE",
      path: `/api/docs/${docId}/layers/${ordinal}`,
    });
  }

  estimateToneOfText(text: string): Promise<ToneWire> {
    return this.request({
      method: "POST",
      path: "/api/tone/estimate",
      body: { text },
    });
  }

  estimateToneOfSelection(
    docId: string,
    sel: Selection,
  ): Promise<ChangeEvent & ToneWire> {
    return this.request({
      method: "POST",
      path: "/api/tone/estimate",
      body: { id: docId, start: sel.start, end: sel.end },
    });
  }
}
