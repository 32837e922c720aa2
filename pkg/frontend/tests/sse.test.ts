import { describe, expect, it } from "vitest";

import { SseParser } from "../src/sse.js";

describe("SseParser", () => {
  it("parses a complete event frame", () => {
    const parser = new SseParser();
    const frames = parser.feed('event: change\ndata: {"revision": 1}\n\n');
    expect(frames).toEqual([{ event: "change", data: '{"revision": 1}' }]);
  });

  it("ignores comment keep-alives", () => {
    const parser = new SseParser();
    expect(parser.feed(": connected\n\n: keep-alive\n\n")).toEqual([]);
  });

  it("reassembles frames split across chunks", () => {
    const parser = new SseParser();
    expect(parser.feed("event: chan")).toEqual([]);
    expect(parser.feed("ge\ndata: {}")).toEqual([]);
    expect(parser.feed("\n\n")).toEqual([{ event: "change", data: "{}" }]);
  });

  it("returns multiple frames from one chunk in order", () => {
    const parser = new SseParser();
    const frames = parser.feed(
      "event: change\ndata: 1\n\nevent: change\ndata: 2\n\n",
    );
    expect(frames.map((f) => f.data)).toEqual(["1", "2"]);
  });

  it("joins multi-line data with newlines", () => {
    const parser = new SseParser();
    expect(parser.feed("data: a\ndata: b\n\n")).toEqual([
      { event: "message", data: "a\nb" },
    ]);
  });

  it("handles CRLF line endings", () => {
    const parser = new SseParser();
    expect(parser.feed("event: change\r\ndata: x\r\n\r\n")).toEqual([
      { event: "change", data: "x" },
    ]);
  });

  it("strips only the first space after the colon", () => {
    const parser = new SseParser();
    expect(parser.feed("data:  padded\n\n")).toEqual([
      { event: "message", data: " padded" },
    ]);
  });
});
