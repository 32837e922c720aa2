"""One JSON file per document, written canonically so that save/load/save
round-trips are byte-identical.

Canonical form: sorted keys, no whitespace, UTF-8 with unescaped non-ASCII,
one trailing newline. Writes go through a temp file in the same directory and
os.replace, so readers never observe a half-written document.
"""

from __future__ import annotations

import json
import os
import tempfile
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .layers import LayerStack
from .tone import ToneVector

SCHEMA_VERSION = 1


class StoreError(Exception):
    pass


class UnknownDocumentError(StoreError):
    pass


class SchemaError(StoreError):
    pass


def canonical_json(payload) -> str:
    return (
        json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        + "\n"
    )


@dataclass
class Fragment:
    id: str
    text: str
    x: float
    y: float
    width: float

    def __post_init__(self):
        if not self.text:
            raise ValueError("fragment text must not be empty")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "x": self.x,
            "y": self.y,
            "width": self.width,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Fragment":
        return cls(
            id=data["id"],
            text=data["text"],
            x=float(data["x"]),
            y=float(data["y"]),
            width=float(data["width"]),
        )


@dataclass
class OpLogEntry:
    kind: str
    backend: str
    digest: str
    changeset: list  # wire-format ops, see ChangeSet.to_wire
    layer: int  # ordinal the edit landed on
    timestamp: float
    undoes: Optional[int] = None  # index of the entry this one reverses

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "backend": self.backend,
            "digest": self.digest,
            "changeset": self.changeset,
            "layer": self.layer,
            "timestamp": self.timestamp,
            "undoes": self.undoes,
        }

    @classmethod
    def from_json(cls, data: dict) -> "OpLogEntry":
        return cls(
            kind=data["kind"],
            backend=data["backend"],
            digest=data["digest"],
            changeset=data["changeset"],
            layer=int(data["layer"]),
            timestamp=float(data["timestamp"]),
            undoes=data.get("undoes"),
        )


@dataclass
class DocumentRecord:
    id: str
    stack: LayerStack
    fragments: list[Fragment] = field(default_factory=list)
    current_tone: ToneVector = ToneVector(5, 5, 5)
    op_log: list[OpLogEntry] = field(default_factory=list)
    created: float = 0.0
    modified: float = 0.0

    @classmethod
    def new(cls, initial_text: str = "") -> "DocumentRecord":
        now = time.time()
        return cls(
            id=uuid.uuid4().hex,
            stack=LayerStack.new(initial_text),
            created=now,
            modified=now,
        )

    def fragment_by_id(self, fragment_id: str) -> Fragment:
        for frag in self.fragments:
            if frag.id == fragment_id:
                return frag
        raise UnknownDocumentError(f"no fragment {fragment_id!r}")

    def to_json(self) -> dict:
        stack = self.stack.to_json()
        return {
            "version": SCHEMA_VERSION,
            "id": self.id,
            "active_layer": stack["active_layer"],
            "current_tone": self.current_tone.to_wire(),
            "layers": stack["layers"],
            "fragments": [f.to_json() for f in self.fragments],
            "op_log": [e.to_json() for e in self.op_log],
            "created": self.created,
            "modified": self.modified,
        }

    @classmethod
    def from_json(cls, data: dict) -> "DocumentRecord":
        version = data.get("version")
        if version != SCHEMA_VERSION:
            raise SchemaError(f"unsupported document schema version {version!r}")
        stack = LayerStack.from_json(
            {"layers": data["layers"], "active_layer": data["active_layer"]}
        )
        op_log = [OpLogEntry.from_json(e) for e in data.get("op_log", [])]
        # Ordinals of deleted layers may survive only in the log; never reuse them.
        if op_log:
            stack.ensure_next_ordinal(max(e.layer for e in op_log) + 1)
        return cls(
            id=data["id"],
            stack=stack,
            fragments=[Fragment.from_json(f) for f in data.get("fragments", [])],
            current_tone=ToneVector.from_wire(data["current_tone"]),
            op_log=op_log,
            created=float(data.get("created", 0.0)),
            modified=float(data.get("modified", 0.0)),
        )


def dump_document(record: DocumentRecord) -> str:
    return canonical_json(record.to_json())


def parse_document(text: str) -> DocumentRecord:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"document file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise SchemaError("document file must hold a JSON object")
    return DocumentRecord.from_json(data)


class DocumentStore:
    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    def path_for(self, doc_id: str) -> Path:
        return self.data_dir / f"{doc_id}.json"

    def save(self, record: DocumentRecord) -> None:
        payload = dump_document(record).encode("utf-8")
        fd, tmp = tempfile.mkstemp(
            dir=self.data_dir, prefix=f".{record.id}.", suffix=".tmp"
        )
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(payload)
            os.replace(tmp, self.path_for(record.id))
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise

    def load(self, doc_id: str) -> DocumentRecord:
        path = self.path_for(doc_id)
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise UnknownDocumentError(f"no document {doc_id!r}") from None
        return parse_document(text)

    def exists(self, doc_id: str) -> bool:
        return self.path_for(doc_id).is_file()

    def list_ids(self) -> list[str]:
        return sorted(
            p.stem for p in self.data_dir.glob("*.json") if not p.name.startswith(".")
        )

    def delete(self, doc_id: str) -> None:
        try:
            self.path_for(doc_id).unlink()
        except FileNotFoundError:
            raise UnknownDocumentError(f"no document {doc_id!r}") from None
