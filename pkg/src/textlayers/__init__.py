"""Layered, non-destructive text editing with drawing-software ergonomics.

The package splits into small layers:

- textcore: grapheme-safe slicing, sentence segmentation, format carry-over
- layers: anchored edits, stable ids, layer stack composition
- changes: retain/delete/insert changesets, diffing, position mapping
- tone: the 0-10 tone lattice and its color-wheel projection
- backend: deterministic mock provider and the remote HTTP provider
- engine: the editing tools themselves, built on all of the above
- service: REST + SSE document service with persistence and undo
- cli, report: batch entry points and rendered summaries
"""

from .changes import (
    AnimationEvent,
    AnimationTimeline,
    ChangeSet,
    ChangeSetError,
    ContentMismatchError,
    Delete,
    Insert,
    LengthMismatchError,
    Retain,
    apply,
    diff,
    invert,
    map_position,
    timeline,
)
from .engine import (
    BooleanOpKind,
    Candidate,
    EngineError,
    InvalidRequestError,
    NoSplitPointError,
    SelectionRange,
    TransformEngine,
    TransformOutcome,
    UnreachableTargetError,
    VariantTable,
    select_variants,
)
from .layers import (
    AnchorBoundary,
    AnchoredEdit,
    Composition,
    HiddenLayerError,
    LastLayerError,
    Layer,
    LayerError,
    LayerStack,
    OverlapError,
    StableId,
    UnknownLayerError,
)
from .store import DocumentRecord, DocumentStore, Fragment, OpLogEntry
from .textcore import (
    grapheme_length,
    grapheme_slice,
    graphemes,
    reintegrate,
    segment_sentences,
    word_count,
)
from .tone import (
    DiscPoint,
    ToneVector,
    disc_to_tone,
    strongest_change_arrows,
    tone_to_disc,
    tone_to_rgb,
    rgb_to_tone,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorBoundary",
    "AnchoredEdit",
    "AnimationEvent",
    "AnimationTimeline",
    "BooleanOpKind",
    "Candidate",
    "ChangeSet",
    "ChangeSetError",
    "Composition",
    "ContentMismatchError",
    "Delete",
    "DiscPoint",
    "DocumentRecord",
    "DocumentStore",
    "EngineError",
    "Fragment",
    "HiddenLayerError",
    "Insert",
    "InvalidRequestError",
    "LastLayerError",
    "Layer",
    "LayerError",
    "LayerStack",
    "LengthMismatchError",
    "NoSplitPointError",
    "OpLogEntry",
    "OverlapError",
    "Retain",
    "SelectionRange",
    "StableId",
    "ToneVector",
    "TransformEngine",
    "TransformOutcome",
    "UnknownLayerError",
    "UnreachableTargetError",
    "VariantTable",
    "apply",
    "diff",
    "disc_to_tone",
    "grapheme_length",
    "grapheme_slice",
    "graphemes",
    "invert",
    "map_position",
    "reintegrate",
    "rgb_to_tone",
    "segment_sentences",
    "select_variants",
    "strongest_change_arrows",
    "timeline",
    "tone_to_disc",
    "tone_to_rgb",
    "word_count",
]
