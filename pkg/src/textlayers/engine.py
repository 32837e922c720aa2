"""Executable semantics of the editing tools, direct manipulations, and
boolean passage operations.

Each tool computes its scope (the minimal run of whole sentences covering the
selection), sends only that scope to the backend, reintegrates the reply with
the original formatting, and records the minimal changed region on the active
layer. The returned changeset spans the whole composition, so callers can
animate, undo, and map positions with it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .backend import BackendError, BackendRequest, cache_key
from .changes import ChangeSet, Insert, Retain, diff, map_position
from .layers import LayerStack, HiddenLayerError
from .textcore import (
    grapheme_length,
    grapheme_slice,
    graphemes,
    reintegrate,
    round_half_away,
    segment_sentences,
    word_count,
)
from .tone import ToneVector


class EngineError(Exception):
    pass


class InvalidRequestError(EngineError):
    pass


class NoSplitPointError(EngineError):
    pass


class UnreachableTargetError(EngineError):
    pass


@dataclass(frozen=True)
class SelectionRange:
    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise InvalidRequestError(f"bad selection [{self.start},{self.end})")

    @property
    def is_caret(self) -> bool:
        return self.start == self.end


@dataclass(frozen=True)
class Candidate:
    text: str
    word_count: int


@dataclass(frozen=True)
class VariantTable:
    """Per-sentence candidate lists; candidate 0 is always the original."""

    rows: tuple[tuple[Candidate, ...], ...]


class BooleanOpKind(Enum):
    UNITE = "unite"
    INTERSECT = "intersect"
    SUBTRACT = "subtract"
    EXCLUDE = "exclude"
    INSERT_RAW = "insert_raw"


@dataclass
class TransformOutcome:
    changeset: ChangeSet
    new_selection: SelectionRange
    provenance: dict = field(default_factory=dict)


def parse_tone_reply(reply: str) -> ToneVector:
    """Pull three 0-10 axis values out of a backend tone estimate."""
    numbers = re.findall(r"-?\d+", reply)
    if len(numbers) < 3:
        raise BackendError(f"tone estimate reply unusable: {reply!r}")
    f, s, c = (max(0, min(10, int(x))) for x in numbers[:3])
    return ToneVector(f, s, c)


def select_variants(table: VariantTable, target_words: int) -> list[int]:
    """Per-sentence candidate indices whose word counts sum closest to the
    target; ties prefer fewer changed sentences, then the lexicographically
    smallest index vector."""
    rows = table.rows
    n = len(rows)
    # g[i] maps achievable suffix sums to the minimal changed count.
    g: list[dict[int, int]] = [dict() for _ in range(n + 1)]
    g[n][0] = 0
    for i in range(n - 1, -1, -1):
        cur = g[i]
        for j, cand in enumerate(rows[i]):
            cost = 0 if j == 0 else 1
            for s, ch in g[i + 1].items():
                key = s + cand.word_count
                v = ch + cost
                if v < cur.get(key, 1 << 30):
                    cur[key] = v
    best_dist = min(abs(s - target_words) for s in g[0])
    finals = [s for s in g[0] if abs(s - target_words) == best_dist]
    best_changed = min(g[0][s] for s in finals)
    finals = [s for s in finals if g[0][s] == best_changed]

    best_vec: Optional[list[int]] = None
    for final_sum in finals:
        vec: list[int] = []
        rem, budget = final_sum, best_changed
        for i in range(n):
            for j, cand in enumerate(rows[i]):
                cost = 0 if j == 0 else 1
                if g[i + 1].get(rem - cand.word_count) == budget - cost:
                    vec.append(j)
                    rem -= cand.word_count
                    budget -= cost
                    break
        if best_vec is None or vec < best_vec:
            best_vec = vec
    return best_vec


class TransformEngine:
    def __init__(self, backend, resize_variant_count: int = 8):
        self.backend = backend
        self.resize_variant_count = resize_variant_count

    # -- plumbing -------------------------------------------------------------

    def _compose(self, stack: LayerStack):
        comp = stack.compose()
        if not stack.active_layer.visible:
            raise HiddenLayerError(
                f"active layer {stack.active_layer.ordinal} is hidden"
            )
        return comp

    @staticmethod
    def _check_bounds(sel: SelectionRange, length: int) -> None:
        if sel.end > length:
            raise InvalidRequestError(
                f"selection [{sel.start},{sel.end}) outside text of length {length}"
            )

    @staticmethod
    def _scope(text: str, sel: SelectionRange) -> tuple[int, int]:
        spans = segment_sentences(text)
        if sel.is_caret:
            for sp in spans:
                if sp.start <= sel.start <= sp.end:
                    return sp.start, sp.end
            raise InvalidRequestError("caret is not inside any sentence")
        hit = [sp for sp in spans if sp.end > sel.start and sp.start < sel.end]
        if not hit:
            return sel.start, sel.end
        return min(hit[0].start, sel.start), max(hit[-1].end, sel.end)

    def _digest(self, req: BackendRequest) -> str:
        return cache_key(req, getattr(self.backend, "model", self.backend.name))

    def _commit(
        self,
        stack: LayerStack,
        comp,
        sel: SelectionRange,
        span_start: int,
        span_end: int,
        new_span: str,
        provenance: dict,
    ) -> TransformOutcome:
        text = comp.text
        total = len(comp)
        old_span = grapheme_slice(text, span_start, span_end)
        inner = diff(old_span, new_span)
        if not inner.is_identity():
            # Record only the region the diff actually touches.
            a = graphemes(old_span)
            b = graphemes(new_span)
            pre = 0
            limit = min(len(a), len(b))
            while pre < limit and a[pre] == b[pre]:
                pre += 1
            suf = 0
            while suf < limit - pre and a[len(a) - 1 - suf] == b[len(b) - 1 - suf]:
                suf += 1
            stack.record_replacement(
                comp,
                span_start + pre,
                span_end - suf,
                "".join(b[pre : len(b) - suf]),
            )
        cs = ChangeSet(
            [Retain(span_start), *inner.ops, Retain(total - span_end)]
        )
        new_start = map_position(cs, sel.start, "right")
        new_end = max(new_start, map_position(cs, sel.end, "left"))
        return TransformOutcome(cs, SelectionRange(new_start, new_end), provenance)

    def _scoped(
        self,
        stack: LayerStack,
        sel: SelectionRange,
        kind: str,
        constraints: Optional[dict] = None,
        extra_slots: Optional[dict] = None,
        require_words: int = 0,
    ) -> TransformOutcome:
        comp = self._compose(stack)
        text = comp.text
        self._check_bounds(sel, len(comp))
        scope_start, scope_end = self._scope(text, sel)
        scope_text = grapheme_slice(text, scope_start, scope_end)
        sel_text = grapheme_slice(text, sel.start, sel.end)
        if require_words and word_count(sel_text) < require_words:
            raise InvalidRequestError(
                f"{kind} needs a selection of at least {require_words} word(s)"
            )
        req = BackendRequest(
            kind=kind,
            slots={"selection": sel_text, "sentence": scope_text, **(extra_slots or {})},
            constraints={
                "selection_offset": sel.start - scope_start,
                "selection_length": sel.end - sel.start,
                **(constraints or {}),
            },
        )
        core = self.backend.complete(req).texts[0]
        provenance = {"tool": kind, "backend": self.backend.name, "digest": self._digest(req)}
        if not core.strip():
            # The whole scope went away: swallow one separating space too.
            new_span = ""
            span_start, span_end = scope_start, scope_end
            if span_end < len(comp) and grapheme_slice(text, span_end, span_end + 1) == " ":
                span_end += 1
            elif span_start > 0 and grapheme_slice(text, span_start - 1, span_start) == " ":
                span_start -= 1
            return self._commit(stack, comp, sel, span_start, span_end, new_span, provenance)
        new_scope = reintegrate(scope_text, core)
        return self._commit(stack, comp, sel, scope_start, scope_end, new_scope, provenance)

    # -- tools ----------------------------------------------------------------

    def erase(self, stack: LayerStack, sel: SelectionRange) -> TransformOutcome:
        return self._scoped(stack, sel, "erase", require_words=1)

    def repair(self, stack: LayerStack, sel: SelectionRange) -> TransformOutcome:
        return self._scoped(stack, sel, "repair")

    def smudge(self, stack: LayerStack, sel: SelectionRange) -> TransformOutcome:
        return self._scoped(stack, sel, "smudge", require_words=1)

    def set_number(
        self, stack: LayerStack, sel: SelectionRange, direction: str
    ) -> TransformOutcome:
        if direction not in ("singular", "plural"):
            raise InvalidRequestError(f"number direction must be singular or plural, got {direction!r}")
        return self._scoped(
            stack, sel, "number", constraints={"number": direction}, require_words=1
        )

    def set_tense(
        self, stack: LayerStack, sel: SelectionRange, tense: str
    ) -> TransformOutcome:
        if tense not in ("past", "present", "future"):
            raise InvalidRequestError(f"tense must be past, present or future, got {tense!r}")
        return self._scoped(
            stack, sel, "tense", constraints={"tense": tense}, require_words=1
        )

    def apply_tone(
        self, stack: LayerStack, sel: SelectionRange, tone: ToneVector
    ) -> TransformOutcome:
        return self._scoped(stack, sel, "tone", constraints=tone.to_wire())

    def estimate_tone(self, stack: LayerStack, sel: SelectionRange) -> ToneVector:
        comp = stack.compose()
        self._check_bounds(sel, len(comp))
        sel_text = grapheme_slice(comp.text, sel.start, sel.end)
        if not sel_text.strip():
            raise InvalidRequestError("cannot estimate the tone of an empty selection")
        req = BackendRequest(kind="estimate_tone", slots={"selection": sel_text})
        reply = self.backend.complete(req).texts[0]
        return parse_tone_reply(reply)

    def run_prompt(
        self, stack: LayerStack, sel: SelectionRange, prompt: str
    ) -> TransformOutcome:
        if not prompt.strip():
            raise InvalidRequestError("prompt must not be empty")
        return self._scoped(
            stack, sel, "prompt", extra_slots={"prompt": prompt}, require_words=1
        )

    def rotate(
        self, stack: LayerStack, sel: SelectionRange, angle_deg: float
    ) -> TransformOutcome:
        if not 0 <= angle_deg <= 180:
            raise InvalidRequestError(f"angle {angle_deg} outside [0, 180]")
        return self._scoped(
            stack,
            sel,
            "rotate",
            constraints={"intensity": angle_deg / 180.0},
            require_words=2,
        )

    def split_sentence(self, stack: LayerStack, sel: SelectionRange) -> TransformOutcome:
        comp = self._compose(stack)
        self._check_bounds(sel, len(comp))
        scope_start, scope_end = self._scope(comp.text, sel)
        if ", " not in grapheme_slice(comp.text, scope_start, scope_end):
            raise NoSplitPointError("no comma to split at")
        return self._scoped(stack, sel, "split")

    def combine_sentences(self, stack: LayerStack, sel: SelectionRange) -> TransformOutcome:
        return self._scoped(stack, sel, "combine")

    # -- resizing -------------------------------------------------------------

    def resize(
        self, stack: LayerStack, sel: SelectionRange, target_words: int
    ) -> TransformOutcome:
        if target_words < 1:
            raise InvalidRequestError(f"target_words must be >= 1, got {target_words}")
        comp = self._compose(stack)
        text = comp.text
        self._check_bounds(sel, len(comp))
        sel_text = grapheme_slice(text, sel.start, sel.end)
        spans = segment_sentences(sel_text)
        if not spans:
            raise InvalidRequestError("selection holds no sentences to resize")
        sentences = [grapheme_slice(sel_text, sp.start, sp.end) for sp in spans]
        lengths = [word_count(s) for s in sentences]
        total = sum(lengths)
        if total == 0:
            raise InvalidRequestError("selection holds no words to resize")
        delta_total = target_words - total
        k = self.resize_variant_count
        offsets = [i - ((k - 1) // 2) for i in range(k)]

        rows = []
        warning = False
        for sentence, length in zip(sentences, lengths):
            base = round_half_away(delta_total * length / total)
            deltas = [base + off for off in offsets]
            texts = self.backend.resize_variants(sentence, deltas)
            if len(texts) < len(deltas):
                warning = True
            row = [Candidate(sentence, length)]
            row.extend(Candidate(t, word_count(t)) for t in texts)
            rows.append(tuple(row))
        table = VariantTable(tuple(rows))
        indices = select_variants(table, target_words)
        achieved = sum(table.rows[i][j].word_count for i, j in enumerate(indices))
        if abs(achieved - target_words) > len(rows):
            raise UnreachableTargetError(
                f"best combination reaches {achieved} words for target {target_words}"
            )

        pieces = []
        cursor = 0
        for sp, (i, j) in zip(spans, enumerate(indices)):
            pieces.append(grapheme_slice(sel_text, cursor, sp.start))
            original = table.rows[i][0].text
            chosen = table.rows[i][j].text
            pieces.append(original if j == 0 else reintegrate(original, chosen))
            cursor = sp.end
        pieces.append(grapheme_slice(sel_text, cursor, grapheme_length(sel_text)))
        new_sel_text = "".join(pieces)

        digest_req = BackendRequest(
            kind="resize",
            slots={"sentence": sel_text},
            constraints={"target_words": target_words},
        )
        provenance = {
            "tool": "resize",
            "backend": self.backend.name,
            "digest": self._digest(digest_req),
            "achieved_words": achieved,
        }
        if warning:
            provenance["warning"] = "some variant requests failed"
        return self._commit(stack, comp, sel, sel.start, sel.end, new_sel_text, provenance)

    # -- boolean passage operations --------------------------------------------

    def boolean_merge(
        self,
        stack: LayerStack,
        fragment_text: str,
        target_sel: SelectionRange,
        op: BooleanOpKind,
    ) -> TransformOutcome:
        if not fragment_text:
            raise InvalidRequestError("fragment text must not be empty")
        if op is BooleanOpKind.INSERT_RAW:
            if not target_sel.is_caret:
                raise InvalidRequestError("insert_raw needs a caret, not a span")
            comp = self._compose(stack)
            self._check_bounds(target_sel, len(comp))
            p = target_sel.start
            stack.record_replacement(comp, p, p, fragment_text)
            cs = ChangeSet(
                [Retain(p), Insert(fragment_text), Retain(len(comp) - p)]
            )
            new_start = map_position(cs, p, "right")
            return TransformOutcome(
                cs,
                SelectionRange(new_start, new_start),
                {"tool": "insert_raw", "backend": "none", "digest": ""},
            )
        if target_sel.is_caret:
            raise InvalidRequestError(f"{op.value} needs a non-empty target span")
        return self._boolean_scoped(stack, target_sel, op.value, fragment_text)

    def _boolean_scoped(
        self, stack: LayerStack, sel: SelectionRange, kind: str, fragment_text: str
    ) -> TransformOutcome:
        # Unlike the scoped tools, the result replaces the target span itself;
        # the enclosing sentences travel along only as context.
        comp = self._compose(stack)
        text = comp.text
        self._check_bounds(sel, len(comp))
        scope_start, scope_end = self._scope(text, sel)
        scope_text = grapheme_slice(text, scope_start, scope_end)
        target_text = grapheme_slice(text, sel.start, sel.end)
        req = BackendRequest(
            kind=kind,
            slots={
                "fragment": fragment_text,
                "target": target_text,
                "sentence": scope_text,
                "selection": target_text,
            },
            constraints={
                "selection_offset": sel.start - scope_start,
                "selection_length": sel.end - sel.start,
            },
        )
        core = self.backend.complete(req).texts[0]
        provenance = {
            "tool": kind,
            "backend": self.backend.name,
            "digest": self._digest(req),
        }
        new_target = reintegrate(target_text, core) if core.strip() else ""
        return self._commit(stack, comp, sel, sel.start, sel.end, new_target, provenance)


def dispatch_tool(
    engine: TransformEngine,
    stack: LayerStack,
    op: str,
    sel: SelectionRange,
    params: dict,
) -> TransformOutcome:
    """Route a wire-level op name plus parameters to the matching tool."""
    if op == "erase":
        return engine.erase(stack, sel)
    if op == "repair":
        return engine.repair(stack, sel)
    if op == "smudge":
        return engine.smudge(stack, sel)
    if op == "number":
        return engine.set_number(stack, sel, params.get("direction", ""))
    if op == "tense":
        return engine.set_tense(stack, sel, params.get("tense", ""))
    if op == "tone":
        try:
            tone = ToneVector.from_wire(params)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidRequestError(f"bad tone parameters: {exc}") from None
        return engine.apply_tone(stack, sel, tone)
    if op == "prompt":
        return engine.run_prompt(stack, sel, str(params.get("prompt", "")))
    if op == "rotate":
        try:
            angle = float(params["angle"])
        except (KeyError, TypeError, ValueError):
            raise InvalidRequestError("rotate needs a numeric angle") from None
        return engine.rotate(stack, sel, angle)
    if op == "resize":
        try:
            target = int(params["target_words"])
        except (KeyError, TypeError, ValueError):
            raise InvalidRequestError("resize needs an integer target_words") from None
        return engine.resize(stack, sel, target)
    if op == "split":
        return engine.split_sentence(stack, sel)
    if op == "combine":
        return engine.combine_sentences(stack, sel)
    raise InvalidRequestError(f"unknown transform op {op!r}")
