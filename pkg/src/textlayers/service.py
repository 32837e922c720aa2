"""HTTP face of the editor: document CRUD, transforms, fragments, layers,
undo, and a server-sent-events change feed.

Every successful mutation bumps the document revision, persists the file,
and pushes exactly one "change" event carrying the changeset and its
animation timeline. Any error response leaves the stored document untouched:
handlers snapshot the record up front and restore it before re-raising.
"""

from __future__ import annotations

import json
import queue
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from .backend import BackendError, BackendRequest
from .changes import (
    ChangeSet,
    ContentMismatchError,
    LengthMismatchError,
    Retain,
    apply as apply_changeset,
    diff,
    invert,
    timeline,
)
from .config import Settings, build_backend
from .engine import (
    BooleanOpKind,
    InvalidRequestError,
    NoSplitPointError,
    SelectionRange,
    TransformEngine,
    TransformOutcome,
    UnreachableTargetError,
    dispatch_tool,
    parse_tone_reply,
)
from .layers import (
    HiddenLayerError,
    LastLayerError,
    OverlapError,
    UnknownLayerError,
)
from .store import (
    DocumentRecord,
    DocumentStore,
    Fragment,
    OpLogEntry,
    UnknownDocumentError,
)
from .textcore import grapheme_length, grapheme_slice
from .tone import ToneVector

SSE_KEEPALIVE_SECONDS = 15.0
DEFAULT_FRAGMENT_WIDTH = 240.0


class ConflictError(Exception):
    """The request is well-formed but the document state refuses it."""


@dataclass
class DocumentSession:
    record: DocumentRecord
    lock: threading.RLock = field(default_factory=threading.RLock)
    revision: int = 0
    subscribers: list["queue.Queue[str]"] = field(default_factory=list)


class EditorService:
    def __init__(
        self,
        data_dir: Path,
        settings: Optional[Settings] = None,
        backend=None,
    ):
        self.settings = settings if settings is not None else Settings.from_env()
        self.backend = backend if backend is not None else build_backend(self.settings)
        self.engine = TransformEngine(self.backend, self.settings.resize_variants)
        self.store = DocumentStore(Path(data_dir))
        self._sessions: dict[str, DocumentSession] = {}
        self._sessions_lock = threading.Lock()

    # -- sessions -------------------------------------------------------------

    def session(self, doc_id: str) -> DocumentSession:
        with self._sessions_lock:
            sess = self._sessions.get(doc_id)
            if sess is None:
                sess = DocumentSession(self.store.load(doc_id))
                self._sessions[doc_id] = sess
            return sess

    def create_document(self, text: str) -> DocumentSession:
        record = DocumentRecord.new(text)
        sess = DocumentSession(record)
        with self._sessions_lock:
            self._sessions[record.id] = sess
        self.store.save(record)
        return sess

    # -- views ----------------------------------------------------------------

    def state(self, sess: DocumentSession) -> dict:
        record = sess.record
        comp = record.stack.compose()
        return {
            "id": record.id,
            "text": comp.text,
            "revision": sess.revision,
            "active_layer": record.stack.active_layer.ordinal,
            "layers": [
                {
                    "ordinal": layer.ordinal,
                    "name": layer.name,
                    "visible": layer.visible,
                    "edit_count": len(layer.edits),
                }
                for layer in record.stack.layers
            ],
            "fragments": [f.to_json() for f in record.fragments],
            "current_tone": record.current_tone.to_wire(),
            "op_count": len(record.op_log),
        }

    # -- mutation plumbing ------------------------------------------------------

    def mutate(self, sess: DocumentSession, fn: Callable[[DocumentRecord], dict]) -> dict:
        """Run fn under the document lock; roll the record back on any error."""
        with sess.lock:
            snapshot = sess.record.to_json()
            try:
                return fn(sess.record)
            except BaseException:
                sess.record = DocumentRecord.from_json(snapshot)
                raise

    def finish(
        self,
        sess: DocumentSession,
        changeset: ChangeSet,
        log_entry: Optional[OpLogEntry] = None,
    ) -> dict:
        record = sess.record
        record.modified = time.time()
        if log_entry is not None:
            record.op_log.append(log_entry)
        self.store.save(record)
        sess.revision += 1
        tl = timeline(changeset)
        event = {
            "changeset": changeset.to_wire(),
            "timeline": tl.to_wire(),
            "revision": sess.revision,
        }
        payload = json.dumps(event, ensure_ascii=False)
        for q in list(sess.subscribers):
            q.put(payload)
        return event

    def log_entry_for(
        self, kind: str, outcome: TransformOutcome, layer_ordinal: int
    ) -> OpLogEntry:
        return OpLogEntry(
            kind=kind,
            backend=outcome.provenance.get("backend", self.backend.name),
            digest=outcome.provenance.get("digest", ""),
            changeset=outcome.changeset.to_wire(),
            layer=layer_ordinal,
            timestamp=time.time(),
        )

    # -- undo -------------------------------------------------------------------

    @staticmethod
    def undo_target(op_log: list[OpLogEntry]) -> int:
        undone = set()
        for i in range(len(op_log) - 1, -1, -1):
            entry = op_log[i]
            if entry.undoes is not None:
                undone.add(entry.undoes)
                continue
            if i in undone:
                continue
            return i
        raise ConflictError("nothing left to undo")

    def undo(self, sess: DocumentSession) -> dict:
        def run(record: DocumentRecord) -> dict:
            target = self.undo_target(record.op_log)
            entry = record.op_log[target]
            forward = ChangeSet.from_wire(entry.changeset)
            inverse = invert(forward)
            comp = record.stack.compose()
            try:
                new_text = apply_changeset(comp.text, inverse)
            except (LengthMismatchError, ContentMismatchError) as exc:
                raise ConflictError(f"cannot undo: {exc}") from None
            if not inverse.is_identity():
                start = 0
                ops = list(inverse.ops)
                if ops and isinstance(ops[0], Retain):
                    start = ops[0].count
                trailing = (
                    ops[-1].count if ops and isinstance(ops[-1], Retain) else 0
                )
                end = inverse.source_length - trailing
                replacement = grapheme_slice(
                    new_text, start, grapheme_length(new_text) - trailing
                )
                previous_active = record.stack.active_layer.ordinal
                try:
                    record.stack.set_active(entry.layer)
                except UnknownLayerError:
                    raise ConflictError(
                        f"cannot undo: layer {entry.layer} is gone"
                    ) from None
                try:
                    record.stack.record_replacement(comp, start, end, replacement)
                except (HiddenLayerError, OverlapError) as exc:
                    raise ConflictError(f"cannot undo: {exc}") from None
                finally:
                    record.stack.set_active(previous_active)
            marker = OpLogEntry(
                kind="undo",
                backend="none",
                digest="",
                changeset=inverse.to_wire(),
                layer=entry.layer,
                timestamp=time.time(),
                undoes=target,
            )
            event = self.finish(sess, inverse, marker)
            return {**event, **{"state": self.state(sess)}}

        return self.mutate(sess, run)


# ------------------------------------------------------------------------------
# HTTP wiring


def _selection(payload: dict, length_keys=("start", "end")) -> SelectionRange:
    try:
        start = int(payload[length_keys[0]])
        end = int(payload[length_keys[1]])
    except (KeyError, TypeError, ValueError):
        raise InvalidRequestError("start and end must be integers") from None
    return SelectionRange(start, end)


def _tone_from_params(params: dict) -> ToneVector:
    try:
        return ToneVector.from_wire(params)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidRequestError(f"bad tone parameters: {exc}") from None


def create_app(
    data_dir: Path,
    settings: Optional[Settings] = None,
    backend=None,
) -> FastAPI:
    service = EditorService(data_dir, settings=settings, backend=backend)
    app = FastAPI(title="textlayers editor", docs_url=None, redoc_url=None)
    app.state.service = service

    def _error(status: int):
        def handler(request: Request, exc: Exception):
            return JSONResponse(status_code=status, content={"detail": str(exc)})

        return handler

    for exc_type, status in (
        (UnknownDocumentError, 404),
        (UnknownLayerError, 404),
        (InvalidRequestError, 422),
        (NoSplitPointError, 422),
        (UnreachableTargetError, 422),
        (HiddenLayerError, 422),
        (LastLayerError, 409),
        (ConflictError, 409),
        (OverlapError, 409),
        (BackendError, 502),
    ):
        app.add_exception_handler(exc_type, _error(status))

    # -- documents ---------------------------------------------------------

    @app.post("/api/docs", status_code=201)
    def create_doc(payload: dict = Body(default={})):
        text = payload.get("text", "")
        if not isinstance(text, str):
            raise InvalidRequestError("text must be a string")
        sess = service.create_document(text)
        return service.state(sess)

    @app.get("/api/docs/{doc_id}")
    def get_doc(doc_id: str):
        sess = service.session(doc_id)
        with sess.lock:
            return service.state(sess)

    # -- transforms ----------------------------------------------------------

    @app.post("/api/docs/{doc_id}/transform")
    def transform(doc_id: str, payload: dict = Body(...)):
        sess = service.session(doc_id)

        def run(record: DocumentRecord) -> dict:
            op = str(payload.get("op", ""))
            sel = _selection(payload)
            params = payload.get("params") or {}
            if not isinstance(params, dict):
                raise InvalidRequestError("params must be an object")
            outcome = dispatch_tool(service.engine, record.stack, op, sel, params)
            if op == "tone":
                record.current_tone = _tone_from_params(params)
            entry = service.log_entry_for(op, outcome, record.stack.active_layer.ordinal)
            event = service.finish(sess, outcome.changeset, entry)
            return {
                **event,
                "new_composition": record.stack.compose().text,
                "new_selection": [
                    outcome.new_selection.start,
                    outcome.new_selection.end,
                ],
                "provenance": outcome.provenance,
            }

        return service.mutate(sess, run)

    @app.post("/api/docs/{doc_id}/undo")
    def undo(doc_id: str):
        sess = service.session(doc_id)
        return service.undo(sess)

    # -- fragments -------------------------------------------------------------

    @app.post("/api/docs/{doc_id}/fragments", status_code=201)
    def fragment_out(doc_id: str, payload: dict = Body(...)):
        sess = service.session(doc_id)

        def run(record: DocumentRecord) -> dict:
            sel = _selection(payload)
            if sel.start == sel.end:
                raise InvalidRequestError("fragment needs a non-empty selection")
            comp = record.stack.compose()
            if sel.end > len(comp):
                raise InvalidRequestError("selection outside the document")
            text = grapheme_slice(comp.text, sel.start, sel.end)
            record.stack.record_replacement(comp, sel.start, sel.end, "")
            fragment = Fragment(
                id=uuid.uuid4().hex,
                text=text,
                x=float(payload.get("x", 0.0)),
                y=float(payload.get("y", 0.0)),
                width=float(payload.get("width", DEFAULT_FRAGMENT_WIDTH)),
            )
            record.fragments.append(fragment)
            changeset = ChangeSet(
                [
                    Retain(sel.start),
                    *diff(text, "").ops,
                    Retain(len(comp) - sel.end),
                ]
            )
            entry = OpLogEntry(
                kind="fragment_out",
                backend="none",
                digest="",
                changeset=changeset.to_wire(),
                layer=record.stack.active_layer.ordinal,
                timestamp=time.time(),
            )
            event = service.finish(sess, changeset, entry)
            return {**event, "fragment": fragment.to_json()}

        return service.mutate(sess, run)

    @app.patch("/api/docs/{doc_id}/fragments/{fragment_id}")
    def move_fragment(doc_id: str, fragment_id: str, payload: dict = Body(...)):
        sess = service.session(doc_id)

        def run(record: DocumentRecord) -> dict:
            fragment = record.fragment_by_id(fragment_id)
            for attr in ("x", "y", "width"):
                if attr in payload:
                    try:
                        setattr(fragment, attr, float(payload[attr]))
                    except (TypeError, ValueError):
                        raise InvalidRequestError(
                            f"{attr} must be a number"
                        ) from None
            comp_len = len(record.stack.compose())
            event = service.finish(sess, ChangeSet([Retain(comp_len)]))
            return {**event, "fragment": fragment.to_json()}

        return service.mutate(sess, run)

    @app.post("/api/docs/{doc_id}/fragments/{fragment_id}/drop")
    def drop_fragment(doc_id: str, fragment_id: str, payload: dict = Body(...)):
        sess = service.session(doc_id)

        def run(record: DocumentRecord) -> dict:
            fragment = record.fragment_by_id(fragment_id)
            raw_op = str(payload.get("op", ""))
            try:
                op = BooleanOpKind(raw_op)
            except ValueError:
                raise InvalidRequestError(f"unknown boolean op {raw_op!r}") from None
            sel = _selection(payload)
            outcome = service.engine.boolean_merge(
                record.stack, fragment.text, sel, op
            )
            record.fragments = [f for f in record.fragments if f.id != fragment_id]
            entry = service.log_entry_for(
                op.value, outcome, record.stack.active_layer.ordinal
            )
            event = service.finish(sess, outcome.changeset, entry)
            return {
                **event,
                "new_composition": record.stack.compose().text,
                "new_selection": [
                    outcome.new_selection.start,
                    outcome.new_selection.end,
                ],
            }

        return service.mutate(sess, run)

    # -- layers ------------------------------------------------------------------

    def layer_event(record: DocumentRecord, before_text: str) -> ChangeSet:
        after = record.stack.compose().text
        return diff(before_text, after)

    @app.post("/api/docs/{doc_id}/layers", status_code=201)
    def create_layer(doc_id: str, payload: dict = Body(default={})):
        sess = service.session(doc_id)

        def run(record: DocumentRecord) -> dict:
            name = payload.get("name") or f"layer {record.stack._next_ordinal}"
            if not isinstance(name, str):
                raise InvalidRequestError("name must be a string")
            before = record.stack.compose().text
            layer = record.stack.add_layer(name)
            event = service.finish(sess, layer_event(record, before))
            return {**event, "state": service.state(sess), "ordinal": layer.ordinal}

        return service.mutate(sess, run)

    @app.patch("/api/docs/{doc_id}/layers/{ordinal}")
    def patch_layer(doc_id: str, ordinal: int, payload: dict = Body(...)):
        sess = service.session(doc_id)

        def run(record: DocumentRecord) -> dict:
            stack = record.stack
            before = stack.compose().text
            layer = stack.layer_by_ordinal(ordinal)
            if "name" in payload:
                if not isinstance(payload["name"], str) or not payload["name"]:
                    raise InvalidRequestError("name must be a non-empty string")
                layer.name = payload["name"]
            if "visible" in payload:
                if not isinstance(payload["visible"], bool):
                    raise InvalidRequestError("visible must be a boolean")
                stack.set_visibility(ordinal, payload["visible"])
            if "position" in payload:
                try:
                    position = int(payload["position"])
                except (TypeError, ValueError):
                    raise InvalidRequestError("position must be an integer") from None
                try:
                    stack.reorder_layer(stack.index_of(ordinal), position)
                except IndexError as exc:
                    raise InvalidRequestError(str(exc)) from None
            if payload.get("active"):
                stack.set_active(ordinal)
            event = service.finish(sess, layer_event(record, before))
            return {**event, "state": service.state(sess)}

        return service.mutate(sess, run)

    @app.delete("/api/docs/{doc_id}/layers/{ordinal}")
    def delete_layer(doc_id: str, ordinal: int):
        sess = service.session(doc_id)

        def run(record: DocumentRecord) -> dict:
            before = record.stack.compose().text
            record.stack.delete_layer(ordinal)
            event = service.finish(sess, layer_event(record, before))
            return {**event, "state": service.state(sess)}

        return service.mutate(sess, run)

    # -- tone --------------------------------------------------------------------

    @app.post("/api/tone/estimate")
    def estimate_tone(payload: dict = Body(...)):
        if "text" in payload:
            text = payload["text"]
            if not isinstance(text, str) or not text.strip():
                raise InvalidRequestError("text must be a non-empty string")
            req = BackendRequest(kind="estimate_tone", slots={"selection": text})
            tone = parse_tone_reply(service.backend.complete(req).texts[0])
            return tone.to_wire()
        doc_id = payload.get("id")
        if not isinstance(doc_id, str) or not doc_id:
            raise InvalidRequestError("estimate needs either text or id+start+end")
        sess = service.session(doc_id)

        def run(record: DocumentRecord) -> dict:
            sel = _selection(payload)
            tone = service.engine.estimate_tone(record.stack, sel)
            record.current_tone = tone
            comp_len = len(record.stack.compose())
            event = service.finish(sess, ChangeSet([Retain(comp_len)]))
            return {**event, **tone.to_wire()}

        return service.mutate(sess, run)

    # -- events --------------------------------------------------------------------

    @app.get("/api/docs/{doc_id}/events")
    def events(doc_id: str):
        sess = service.session(doc_id)
        q: "queue.Queue[str]" = queue.Queue()
        with sess.lock:
            sess.subscribers.append(q)

        def stream():
            try:
                yield ": connected\n\n"
                while True:
                    try:
                        data = q.get(timeout=SSE_KEEPALIVE_SECONDS)
                    except queue.Empty:
                        yield ": keep-alive\n\n"
                        continue
                    yield f"event: change\ndata: {data}\n\n"
            finally:
                with sess.lock:
                    if q in sess.subscribers:
                        sess.subscribers.remove(q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app
