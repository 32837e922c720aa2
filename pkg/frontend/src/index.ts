export * from "./wire.js";
export * from "./changeset.js";
export * from "./tone.js";
export * from "./timeline.js";
export * from "./resize.js";
export * from "./rotate.js";
export * from "./fragments.js";
export * from "./sse.js";
export * from "./api.js";
export * from "./viewstate.js";
