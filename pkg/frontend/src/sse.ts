/** Minimal server-sent-events client for the document change feed.
 *
 * Built on fetch streaming rather than EventSource so the same code runs in
 * the browser and under node test runners. Only the framing the service
 * emits is handled: comment keep-alives, and "event:" plus "data:" lines
 * separated by a blank line.
 */

import type { ChangeEvent } from "./wire.js";

export interface SseFrame {
  event: string;
  data: string;
}

/** Incremental frame parser. Feed it decoded chunks in arrival order; it
 * buffers partial frames across chunk boundaries. */
export class SseParser {
  private buffer = "";

  feed(chunk: string): SseFrame[] {
    this.buffer += chunk;
    const frames: SseFrame[] = [];
    for (;;) {
      const normalized = this.buffer.replace(/\r\n/g, "\n");
      const split = normalized.indexOf("\n\n");
      if (split < 0) break;
      const raw = normalized.slice(0, split);
      this.buffer = normalized.slice(split + 2);
      const frame = parseFrame(raw);
      if (frame !== null) frames.push(frame);
    }
    return frames;
  }
}

function parseFrame(raw: string): SseFrame | null {
  let event = "message";
  const data: string[] = [];
  for (const line of raw.split("\n")) {
    if (!line || line.startsWith(":")) continue;
    const colon = line.indexOf(":");
    const field = colon < 0 ? line : line.slice(0, colon);
    let value = colon < 0 ? "" : line.slice(colon + 1);
    if (value.startsWith(" ")) value = value.slice(1);
    if (field === "event") event = value;
    else if (field === "data") data.push(value);
  }
  if (!data.length) return null;
  return { event, data: data.join("\n") };
}

export interface ChangeFeed {
  close(): void;
  /** Resolves when the stream ends or is closed; rejects on transport error. */
  done: Promise<void>;
}

export interface ChangeFeedOptions {
  fetchImpl?: typeof fetch;
  onError?: (error: unknown) => void;
}

/** Subscribe to a document's change events. The handler runs once per
 * "change" frame, in stream order. */
export function openChangeFeed(
  baseUrl: string,
  docId: string,
  onChange: (event: ChangeEvent) => void,
  options: ChangeFeedOptions = {},
): ChangeFeed {
  const fetchImpl = options.fetchImpl ?? fetch;
  const controller = new AbortController();
  const url = `${baseUrl}/api/docs/${encodeURIComponent(docId)}/events`;

  const done = (async () => {
    const response = await fetchImpl(url, {
      headers: { accept: "text/event-stream" },
      signal: controller.signal,
    });
    if (!response.ok || response.body === null) {
      throw new Error(`event stream failed with status ${response.status}`);
    }
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    const parser = new SseParser();
    for (;;) {
      const { done: finished, value } = await reader.read();
      if (finished) break;
      for (const frame of parser.feed(decoder.decode(value, { stream: true }))) {
        if (frame.event !== "change") continue;
        onChange(JSON.parse(frame.data) as ChangeEvent);
      }
    }
  })().catch((error: unknown) => {
    if (controller.signal.aborted) return;
    if (options.onError) options.onError(error);
    else throw error;
  });

  return {
    close: () => controller.abort(),
    done,
  };
}
