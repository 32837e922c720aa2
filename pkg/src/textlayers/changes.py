"""Edit scripts between texts: diff, apply, invert, position mapping, and the
two-phase change-highlight animation timeline.

All counts and offsets are grapheme-cluster offsets (see textcore).
"""

from __future__ import annotations

from dataclasses import dataclass
from difflib import SequenceMatcher
from typing import Iterable, Union

from .textcore import grapheme_length, graphemes

# Interior diffs larger than this fall back to a whole-span replace; validity
# is the contract, minimality is not.
DIFF_INTERIOR_CAP = 5000

DELETE_PHASE_MS = 500
INSERT_PHASE_MS = 500
TOTAL_MS = DELETE_PHASE_MS + INSERT_PHASE_MS


class ChangeSetError(Exception):
    pass


class LengthMismatchError(ChangeSetError):
    pass


class ContentMismatchError(ChangeSetError):
    pass


@dataclass(frozen=True)
class Retain:
    count: int


@dataclass(frozen=True)
class Delete:
    text: str


@dataclass(frozen=True)
class Insert:
    text: str


Op = Union[Retain, Delete, Insert]


def _normalize(ops: Iterable[Op]) -> tuple[Op, ...]:
    """Drop empty ops, merge adjacent ops of one kind, and canonicalize each
    delete/insert island to delete-first order."""
    merged: list[Op] = []
    for op in ops:
        if isinstance(op, Retain) and op.count == 0:
            continue
        if isinstance(op, (Delete, Insert)) and not op.text:
            continue
        # Keep islands canonical: an Insert directly followed by a Delete is
        # reordered so deletions always animate first.
        if merged and isinstance(op, Delete) and isinstance(merged[-1], Insert):
            insert = merged[-1]
            if len(merged) >= 2 and isinstance(merged[-2], Delete):
                merged[-2] = Delete(merged[-2].text + op.text)
            else:
                merged[-1] = op
                merged.append(insert)
            continue
        if merged and type(merged[-1]) is type(op):
            last = merged[-1]
            if isinstance(op, Retain):
                merged[-1] = Retain(last.count + op.count)
            elif isinstance(op, Delete):
                merged[-1] = Delete(last.text + op.text)
            else:
                merged[-1] = Insert(last.text + op.text)
        else:
            merged.append(op)
    return tuple(merged)


@dataclass(frozen=True)
class ChangeSet:
    """Retain/delete/insert script turning a source text into a target text."""

    ops: tuple[Op, ...]

    def __init__(self, ops: Iterable[Op]):
        object.__setattr__(self, "ops", _normalize(ops))

    @property
    def source_length(self) -> int:
        return sum(
            op.count if isinstance(op, Retain) else grapheme_length(op.text)
            for op in self.ops
            if not isinstance(op, Insert)
        )

    @property
    def target_length(self) -> int:
        return sum(
            op.count if isinstance(op, Retain) else grapheme_length(op.text)
            for op in self.ops
            if not isinstance(op, Delete)
        )

    def is_identity(self) -> bool:
        return all(isinstance(op, Retain) for op in self.ops)

    def to_wire(self) -> list[dict]:
        out = []
        for op in self.ops:
            if isinstance(op, Retain):
                out.append({"retain": op.count})
            elif isinstance(op, Delete):
                out.append({"delete": op.text})
            else:
                out.append({"insert": op.text})
        return out

    @classmethod
    def from_wire(cls, data: list[dict]) -> "ChangeSet":
        ops: list[Op] = []
        for entry in data:
            if "retain" in entry:
                ops.append(Retain(int(entry["retain"])))
            elif "delete" in entry:
                ops.append(Delete(entry["delete"]))
            elif "insert" in entry:
                ops.append(Insert(entry["insert"]))
            else:
                raise ChangeSetError(f"unknown op {entry!r}")
        return cls(ops)


def diff(old: str, new: str) -> ChangeSet:
    """Edit script from old to new: common prefix/suffix retained, interior
    aligned on grapheme clusters by longest-common-subsequence matching."""
    a = graphemes(old)
    b = graphemes(new)
    pre = 0
    limit = min(len(a), len(b))
    while pre < limit and a[pre] == b[pre]:
        pre += 1
    suf = 0
    while suf < limit - pre and a[len(a) - 1 - suf] == b[len(b) - 1 - suf]:
        suf += 1
    mid_a = a[pre : len(a) - suf]
    mid_b = b[pre : len(b) - suf]

    ops: list[Op] = [Retain(pre)]
    if len(mid_a) + len(mid_b) > DIFF_INTERIOR_CAP:
        ops.append(Delete("".join(mid_a)))
        ops.append(Insert("".join(mid_b)))
    else:
        matcher = SequenceMatcher(None, mid_a, mid_b, autojunk=False)
        for tag, i1, i2, j1, j2 in matcher.get_opcodes():
            if tag == "equal":
                ops.append(Retain(i2 - i1))
                continue
            if tag in ("replace", "delete"):
                ops.append(Delete("".join(mid_a[i1:i2])))
            if tag in ("replace", "insert"):
                ops.append(Insert("".join(mid_b[j1:j2])))
    ops.append(Retain(suf))
    return ChangeSet(ops)


def apply(old: str, cs: ChangeSet) -> str:
    """Apply a changeset to its source text."""
    clusters = graphemes(old)
    if cs.source_length != len(clusters):
        raise LengthMismatchError(
            f"changeset expects source of length {cs.source_length}, got {len(clusters)}"
        )
    out: list[str] = []
    pos = 0
    for op in cs.ops:
        if isinstance(op, Retain):
            out.extend(clusters[pos : pos + op.count])
            pos += op.count
        elif isinstance(op, Delete):
            n = grapheme_length(op.text)
            if "".join(clusters[pos : pos + n]) != op.text:
                raise ContentMismatchError(
                    f"delete of {op.text!r} does not match source at offset {pos}"
                )
            pos += n
        else:
            out.append(op.text)
    return "".join(out)


def invert(cs: ChangeSet) -> ChangeSet:
    """The undo script: apply(apply(x, cs), invert(cs)) == x."""
    ops: list[Op] = []
    for op in cs.ops:
        if isinstance(op, Retain):
            ops.append(op)
        elif isinstance(op, Delete):
            ops.append(Insert(op.text))
        else:
            ops.append(Delete(op.text))
    return ChangeSet(ops)


def map_position(cs: ChangeSet, p: int, bias: str = "left") -> int:
    """Map a source offset through a changeset into target coordinates.

    An insertion at the offset itself moves the position only under
    bias="right"; positions inside a deleted region collapse to its start.
    """
    if bias not in ("left", "right"):
        raise ValueError(f"bias must be 'left' or 'right', got {bias!r}")
    if not 0 <= p <= cs.source_length:
        raise ValueError(f"position {p} outside source of length {cs.source_length}")
    src = 0
    shift = 0
    for op in cs.ops:
        if isinstance(op, Retain):
            src += op.count
        elif isinstance(op, Insert):
            n = grapheme_length(op.text)
            if p > src or (p == src and bias == "right"):
                shift += n
        else:
            n = grapheme_length(op.text)
            if p >= src + n:
                shift -= n
            elif p > src:
                return src + shift
            src += n
    return p + shift


@dataclass(frozen=True)
class AnimationEvent:
    start: int
    end: int
    kind: str  # "delete" (span in source) or "insert" (span in target)
    start_ms: int
    end_ms: int


@dataclass(frozen=True)
class AnimationTimeline:
    events: tuple[AnimationEvent, ...]
    total_ms: int

    def to_wire(self) -> dict:
        return {
            "total_ms": self.total_ms,
            "events": [
                {
                    "start": e.start,
                    "end": e.end,
                    "kind": e.kind,
                    "start_ms": e.start_ms,
                    "end_ms": e.end_ms,
                }
                for e in self.events
            ],
        }


def timeline(cs: ChangeSet) -> AnimationTimeline:
    """Two-phase highlight animation: every deletion plays in the first half
    second, every insertion in the second, one second in total."""
    events: list[AnimationEvent] = []
    src = 0
    tgt = 0
    for op in cs.ops:
        if isinstance(op, Retain):
            src += op.count
            tgt += op.count
        elif isinstance(op, Delete):
            n = grapheme_length(op.text)
            events.append(AnimationEvent(src, src + n, "delete", 0, DELETE_PHASE_MS))
            src += n
        else:
            n = grapheme_length(op.text)
            events.append(
                AnimationEvent(tgt, tgt + n, "insert", DELETE_PHASE_MS, TOTAL_MS)
            )
            tgt += n
    if not events:
        return AnimationTimeline((), 0)
    return AnimationTimeline(tuple(events), TOTAL_MS)
