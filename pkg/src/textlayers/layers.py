"""The layered document model.

Every inserted grapheme cluster carries a stable (layer ordinal, counter)
identifier minted at insertion time and never reused. Layers hold anchored
span replacements whose endpoints reference those identifiers (or the BEGIN
and END sentinels), so edits survive changes in the layers beneath them.
Composing folds visible layers bottom to top; an edit whose anchors cannot be
resolved in the current pass is skipped, never mutated.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .textcore import graphemes


class LayerError(Exception):
    pass


class OverlapError(LayerError):
    """The new span overlaps an edit already on the active layer."""


class HiddenLayerError(LayerError):
    pass


class UnknownLayerError(LayerError):
    pass


class LastLayerError(LayerError):
    pass


def pack_id(layer_ordinal: int, counter: int) -> int:
    return (layer_ordinal << 32) | counter


def unpack_id(packed: int) -> tuple[int, int]:
    return packed >> 32, packed & 0xFFFFFFFF


@dataclass(frozen=True)
class StableId:
    layer_ordinal: int
    counter: int

    @property
    def packed(self) -> int:
        return pack_id(self.layer_ordinal, self.counter)

    @classmethod
    def from_packed(cls, packed: int) -> "StableId":
        layer, counter = unpack_id(packed)
        return cls(layer, counter)


# Anchor kinds.
_BEGIN = "begin"
_END = "end"
_CELL = "cell"


@dataclass(frozen=True)
class AnchorBoundary:
    kind: str
    id: int = -1  # packed StableId, meaningful only for kind == "cell"
    side: str = "before"

    @classmethod
    def begin(cls) -> "AnchorBoundary":
        return cls(_BEGIN)

    @classmethod
    def end(cls) -> "AnchorBoundary":
        return cls(_END)

    @classmethod
    def before(cls, packed: int) -> "AnchorBoundary":
        return cls(_CELL, packed, "before")

    @classmethod
    def after(cls, packed: int) -> "AnchorBoundary":
        return cls(_CELL, packed, "after")

    def to_json(self):
        if self.kind == _BEGIN:
            return "BEGIN"
        if self.kind == _END:
            return "END"
        layer, counter = unpack_id(self.id)
        return {"layer": layer, "counter": counter, "side": self.side}

    @classmethod
    def from_json(cls, data) -> "AnchorBoundary":
        if data == "BEGIN":
            return cls.begin()
        if data == "END":
            return cls.end()
        if data["side"] not in ("before", "after"):
            raise ValueError(f"bad anchor side {data['side']!r}")
        return cls(_CELL, pack_id(int(data["layer"]), int(data["counter"])), data["side"])


class AnchoredEdit:
    """A span replacement: [anchor_start, anchor_end) is replaced by the
    edit's own cells. anchor_start == anchor_end is a pure insertion; an
    empty replacement is a pure deletion."""

    __slots__ = (
        "anchor_start",
        "anchor_end",
        "replacement",
        "_clusters",
        "_ids_arr",
        "_packed_range",
    )

    def __init__(
        self,
        anchor_start: AnchorBoundary,
        anchor_end: AnchorBoundary,
        replacement: tuple[tuple[str, int], ...],
    ):
        self.anchor_start = anchor_start
        self.anchor_end = anchor_end
        self.replacement = replacement
        self._clusters: Optional[list[str]] = None
        self._ids_arr: Optional[array] = None
        self._packed_range: Optional[tuple[int, int]] = None

    def _materialize(self) -> None:
        self._clusters = [ch for ch, _ in self.replacement]
        self._ids_arr = array("q", (pid for _, pid in self.replacement))
        # Contiguity lets compose register inserted cells with vector ops.
        if self.replacement:
            lo = self.replacement[0][1]
            hi = self.replacement[-1][1]
            if hi - lo == len(self.replacement) - 1 and all(
                pid == lo + i for i, (_, pid) in enumerate(self.replacement)
            ):
                self._packed_range = (lo, hi)
            else:
                self._packed_range = None

    @property
    def clusters(self) -> list[str]:
        if self._clusters is None:
            self._materialize()
        return self._clusters

    @property
    def ids_arr(self) -> array:
        if self._ids_arr is None:
            self._materialize()
        return self._ids_arr

    @property
    def packed_range(self) -> Optional[tuple[int, int]]:
        if self._clusters is None:
            self._materialize()
        return self._packed_range

    def replacement_text(self) -> str:
        return "".join(ch for ch, _ in self.replacement)

    def to_json(self) -> dict:
        return {
            "start": self.anchor_start.to_json(),
            "end": self.anchor_end.to_json(),
            "replacement": [
                {"ch": ch, "id": {"layer": pid >> 32, "counter": pid & 0xFFFFFFFF}}
                for ch, pid in self.replacement
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "AnchoredEdit":
        rep = tuple(
            (cell["ch"], pack_id(int(cell["id"]["layer"]), int(cell["id"]["counter"])))
            for cell in data["replacement"]
        )
        return cls(
            AnchorBoundary.from_json(data["start"]),
            AnchorBoundary.from_json(data["end"]),
            rep,
        )


@dataclass
class Layer:
    ordinal: int
    name: str
    visible: bool = True
    edits: list[AnchoredEdit] = field(default_factory=list)
    id_counter: int = 0

    def mint(self, text: str) -> tuple[tuple[str, int], ...]:
        cells = tuple(
            (ch, pack_id(self.ordinal, self.id_counter + i))
            for i, ch in enumerate(graphemes(text))
        )
        self.id_counter += len(cells)
        return cells

    def to_json(self) -> dict:
        return {
            "ordinal": self.ordinal,
            "name": self.name,
            "visible": self.visible,
            "id_counter": self.id_counter,
            "edits": [e.to_json() for e in self.edits],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Layer":
        return cls(
            ordinal=int(data["ordinal"]),
            name=data["name"],
            visible=bool(data["visible"]),
            edits=[AnchoredEdit.from_json(e) for e in data["edits"]],
            id_counter=int(data["id_counter"]),
        )


class Composition:
    """Visible text as parallel cluster/identifier sequences, plus the
    resolved span of every edit in final coordinates (None = orphaned or on a
    hidden layer). Treat instances as immutable snapshots."""

    __slots__ = ("clusters", "ids", "edit_spans", "_text")

    def __init__(self, clusters, ids, edit_spans):
        self.clusters = clusters
        self.ids = ids
        self.edit_spans: dict[tuple[int, int], Optional[tuple[int, int]]] = edit_spans
        self._text: Optional[str] = None

    def __len__(self) -> int:
        return len(self.clusters)

    @property
    def text(self) -> str:
        if self._text is None:
            self._text = "".join(self.clusters)
        return self._text

    def cells(self) -> Iterator[tuple[str, StableId]]:
        for ch, pid in zip(self.clusters, self.ids):
            yield ch, StableId.from_packed(pid)


def composition_text(comp: Composition) -> str:
    return comp.text


def _spans_conflict(s: int, e: int, si: int, ei: int) -> bool:
    """Whether a new span [s,e) collides with an existing edit's resolved
    span [si,ei) on the same layer. Touching at an endpoint is allowed;
    insertion points conflict only strictly inside, and a caret landing on an
    edit's own cells (si <= s < ei) would have to anchor to them."""
    if s == e and si == ei:
        return False
    if s == e:
        return si <= s < ei
    if si == ei:
        return s < si < e
    return max(s, si) < min(e, ei)


class LayerStack:
    def __init__(self, layers: list[Layer], active: int, next_ordinal: int):
        self.layers = layers
        self.active = active  # index into layers
        self._next_ordinal = next_ordinal

    @classmethod
    def new(cls, base_text: str = "") -> "LayerStack":
        base = Layer(ordinal=0, name="base")
        cells = base.mint(base_text)
        base.edits.append(
            AnchoredEdit(AnchorBoundary.begin(), AnchorBoundary.begin(), cells)
        )
        return cls([base], active=0, next_ordinal=1)

    # -- lookups ------------------------------------------------------------

    @property
    def active_layer(self) -> Layer:
        return self.layers[self.active]

    def layer_by_ordinal(self, ordinal: int) -> Layer:
        for layer in self.layers:
            if layer.ordinal == ordinal:
                return layer
        raise UnknownLayerError(f"no layer with ordinal {ordinal}")

    def index_of(self, ordinal: int) -> int:
        for i, layer in enumerate(self.layers):
            if layer.ordinal == ordinal:
                return i
        raise UnknownLayerError(f"no layer with ordinal {ordinal}")

    # -- stack operations ---------------------------------------------------

    def add_layer(self, name: str) -> Layer:
        layer = Layer(ordinal=self._next_ordinal, name=name)
        self._next_ordinal += 1
        self.layers.append(layer)
        self.active = len(self.layers) - 1
        return layer

    def set_visibility(self, ordinal: int, visible: bool) -> None:
        self.layer_by_ordinal(ordinal).visible = visible

    def set_active(self, ordinal: int) -> None:
        self.active = self.index_of(ordinal)

    def reorder_layer(self, from_index: int, to_index: int) -> None:
        n = len(self.layers)
        if not (0 <= from_index < n and 0 <= to_index < n):
            raise IndexError(f"reorder {from_index}->{to_index} outside 0..{n - 1}")
        active_ordinal = self.active_layer.ordinal
        layer = self.layers.pop(from_index)
        self.layers.insert(to_index, layer)
        self.active = self.index_of(active_ordinal)

    def delete_layer(self, ordinal: int) -> None:
        idx = self.index_of(ordinal)
        if len(self.layers) == 1:
            raise LastLayerError("cannot delete the only layer")
        active_ordinal = self.active_layer.ordinal
        self.layers.pop(idx)
        if active_ordinal == ordinal:
            self.active = len(self.layers) - 1
        else:
            self.active = self.index_of(active_ordinal)

    # -- composing ----------------------------------------------------------

    def compose(self) -> Composition:
        clusters: list[str] = []
        ids = array("q")
        edit_spans: dict[tuple[int, int], Optional[tuple[int, int]]] = {}

        # Positions of every anchored-to cell, updated in place per splice.
        watched_index: dict[int, int] = {}
        for layer in self.layers:
            if not layer.visible:
                continue
            for edit in layer.edits:
                for b in (edit.anchor_start, edit.anchor_end):
                    if b.kind == _CELL and b.id not in watched_index:
                        watched_index[b.id] = len(watched_index)
        n_watched = len(watched_index)
        wids = np.fromiter(watched_index.keys(), dtype=np.int64, count=n_watched)
        wpos = np.full(n_watched, -1, dtype=np.int64)  # -1 absent, -2 deleted

        total_edits = sum(len(l.edits) for l in self.layers if l.visible)
        row_starts = np.empty(total_edits, dtype=np.int64)
        row_ends = np.empty(total_edits, dtype=np.int64)
        row_keys: list[tuple[int, int]] = []
        filled = 0

        def resolve(b: AnchorBoundary) -> Optional[int]:
            if b.kind == _BEGIN:
                return 0
            if b.kind == _END:
                return len(clusters)
            p = wpos[watched_index[b.id]]
            if p < 0:
                return None
            return int(p) + (1 if b.side == "after" else 0)

        for layer in self.layers:
            if not layer.visible:
                for idx in range(len(layer.edits)):
                    edit_spans[(layer.ordinal, idx)] = None
                continue
            for idx, edit in enumerate(layer.edits):
                key = (layer.ordinal, idx)
                row_keys.append(key)
                s = resolve(edit.anchor_start)
                e = resolve(edit.anchor_end)
                if s is None or e is None or e < s:
                    row_starts[filled] = -1
                    row_ends[filled] = -1
                    filled += 1
                    continue
                rep_clusters = edit.clusters
                il = len(rep_clusters)
                dl = e - s
                clusters[s:e] = rep_clusters
                ids[s:e] = edit.ids_arr
                shift = il - dl

                if n_watched:
                    hi = wpos >= s + dl
                    dead = (wpos >= s) & ~hi
                    wpos[hi] += shift
                    wpos[dead] = -2
                    if il:
                        rng = edit.packed_range
                        if rng is not None:
                            lo, hg = rng
                            m = (wids >= lo) & (wids <= hg)
                            wpos[m] = s + (wids[m] - lo)
                        else:
                            for off, (_, pid) in enumerate(edit.replacement):
                                slot = watched_index.get(pid)
                                if slot is not None:
                                    wpos[slot] = s + off
                if filled:
                    for arr in (row_starts, row_ends):
                        view = arr[:filled]
                        hi = view >= s + dl
                        mid = (view >= s) & ~hi
                        view[hi] += shift
                        view[mid] = s
                row_starts[filled] = s
                row_ends[filled] = s + il
                filled += 1

        for i, key in enumerate(row_keys):
            a = int(row_starts[i])
            edit_spans[key] = None if a < 0 else (a, int(row_ends[i]))
        return Composition(clusters, ids, edit_spans)

    # -- recording ----------------------------------------------------------

    def _own_spans(self, comp: Composition) -> list[tuple[int, tuple[int, int]]]:
        own = self.active_layer.ordinal
        out = []
        for (ordinal, idx), span in comp.edit_spans.items():
            if ordinal == own and span is not None:
                out.append((idx, span))
        return out

    def _anchors_for(
        self, comp: Composition, start: int, end: int
    ) -> tuple[AnchorBoundary, AnchorBoundary]:
        n = len(comp)
        if n == 0:
            b = AnchorBoundary.begin()
            return b, b
        if start == end:
            if start == n:
                b = AnchorBoundary.end()
            else:
                b = AnchorBoundary.before(comp.ids[start])
            return b, b
        return (
            AnchorBoundary.before(comp.ids[start]),
            AnchorBoundary.after(comp.ids[end - 1]),
        )

    def record_edit(
        self, comp: Composition, start: int, end: int, replacement: str
    ) -> AnchoredEdit:
        """Anchor [start, end) -> replacement on the active layer. The caller
        must pass the current composition of this stack."""
        active = self.active_layer
        if not active.visible:
            raise HiddenLayerError(f"layer {active.ordinal} is hidden")
        if not (0 <= start <= end <= len(comp)):
            raise ValueError(
                f"span [{start},{end}) outside composition of length {len(comp)}"
            )
        for idx, (si, ei) in self._own_spans(comp):
            if _spans_conflict(start, end, si, ei):
                raise OverlapError(
                    f"span [{start},{end}) overlaps edit {idx} of layer {active.ordinal}"
                )
        a_start, a_end = self._anchors_for(comp, start, end)
        edit = AnchoredEdit(a_start, a_end, active.mint(replacement))
        active.edits.append(edit)
        return edit

    def record_replacement(
        self, comp: Composition, start: int, end: int, replacement: str
    ) -> AnchoredEdit:
        """Like record_edit, but merges with overlapping edits of the active
        layer instead of raising: the union span becomes one combined edit,
        surviving cells keep their identifiers."""
        active = self.active_layer
        if not active.visible:
            raise HiddenLayerError(f"layer {active.ordinal} is hidden")
        if not (0 <= start <= end <= len(comp)):
            raise ValueError(
                f"span [{start},{end}) outside composition of length {len(comp)}"
            )
        own_spans = self._own_spans(comp)
        s, e = start, end
        merged: set[int] = set()
        changed = True
        while changed:
            changed = False
            for idx, (si, ei) in own_spans:
                if idx in merged:
                    continue
                if _spans_conflict(s, e, si, ei):
                    s, e = min(s, si), max(e, ei)
                    merged.add(idx)
                    changed = True
        if not merged:
            return self.record_edit(comp, start, end, replacement)

        own = active.ordinal
        span_of = {idx: span for idx, span in own_spans}

        def reused_start() -> AnchorBoundary:
            if comp.ids[s] >> 32 == own:
                for idx in merged:
                    if span_of[idx][0] == s:
                        return active.edits[idx].anchor_start
                raise OverlapError("unmergeable span start inside active layer")
            return AnchorBoundary.before(comp.ids[s])

        def reused_end() -> AnchorBoundary:
            if comp.ids[e - 1] >> 32 == own:
                for idx in merged:
                    if span_of[idx][1] == e:
                        return active.edits[idx].anchor_end
                raise OverlapError("unmergeable span end inside active layer")
            return AnchorBoundary.after(comp.ids[e - 1])

        a_start = reused_start()
        a_end = reused_end()

        cells: list[tuple[str, int]] = []
        for i in range(s, start):
            pid = comp.ids[i]
            if pid >> 32 == own:
                cells.append((comp.clusters[i], pid))
            else:
                cells.extend(active.mint(comp.clusters[i]))
        cells.extend(active.mint(replacement))
        for i in range(end, e):
            pid = comp.ids[i]
            if pid >> 32 == own:
                cells.append((comp.clusters[i], pid))
            else:
                cells.extend(active.mint(comp.clusters[i]))

        for idx in sorted(merged, reverse=True):
            del active.edits[idx]
        edit = AnchoredEdit(a_start, a_end, tuple(cells))
        active.edits.append(edit)
        return edit

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "layers": [layer.to_json() for layer in self.layers],
            "active_layer": self.active_layer.ordinal,
        }

    @classmethod
    def from_json(cls, data: dict) -> "LayerStack":
        layers = [Layer.from_json(entry) for entry in data["layers"]]
        if not layers:
            raise ValueError("a document needs at least one layer")
        # Deleted layers may still be referenced by surviving anchors; their
        # ordinals must stay retired or stale references would rebind.
        top = max(layer.ordinal for layer in layers)
        for layer in layers:
            for edit in layer.edits:
                for b in (edit.anchor_start, edit.anchor_end):
                    if b.kind == _CELL:
                        top = max(top, b.id >> 32)
                for _, pid in edit.replacement:
                    top = max(top, pid >> 32)
        stack = cls(layers, active=0, next_ordinal=top + 1)
        stack.set_active(int(data["active_layer"]))
        return stack

    def ensure_next_ordinal(self, minimum: int) -> None:
        if minimum > self._next_ordinal:
            self._next_ordinal = minimum
