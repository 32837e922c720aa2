"""Grapheme-aware text primitives.

All public offsets in this package are grapheme-cluster offsets, not byte or
code-point offsets, so that cursor positions, spans, and diff animation stay
consistent across scripts and emoji.
"""

from __future__ import annotations

from dataclasses import dataclass

import regex as _regex

_GRAPHEME = _regex.compile(r"\X")

# Tokens (including a leading bracket/quote, e.g. "(e.g.") whose trailing
# period never ends a sentence.
ABBREVIATIONS = frozenset(
    ["Mr.", "Mrs.", "Dr.", "e.g.", "i.e.", "etc.", "vs.", "Prof.", "St."]
)

SENTENCE_TERMINATORS = frozenset([".", "!", "?"])

# Terminal punctuation recognized by format signatures. "..." is normalized
# to the single-character ellipsis entry.
TERMINAL_PUNCTUATION = frozenset([".", "!", "?", "…"])


def graphemes(text: str) -> list[str]:
    """Split text into grapheme clusters, the unit of every public offset."""
    if not text:
        return []
    return _GRAPHEME.findall(text)


def grapheme_length(text: str) -> int:
    return len(graphemes(text))


def grapheme_slice(text: str, start: int, end: int) -> str:
    """Slice by grapheme offsets (half-open)."""
    return "".join(graphemes(text)[start:end])


@dataclass(frozen=True)
class SentenceSpan:
    """Half-open span of one sentence, in grapheme offsets."""

    start: int
    end: int


@dataclass(frozen=True)
class FormatSignature:
    leading_ws: str
    trailing_ws: str
    starts_uppercase: bool
    terminal_punct: str | None


def _token_ending_at(clusters: list[str], dot_index: int) -> str:
    """The maximal non-whitespace run ending at clusters[dot_index], inclusive,
    with leading non-letter characters (quotes, brackets) stripped."""
    i = dot_index
    while i > 0 and not clusters[i - 1].isspace():
        i -= 1
    token = "".join(clusters[i : dot_index + 1])
    return token.lstrip("\"'‘’“”([{")


def segment_sentences(text: str) -> list[SentenceSpan]:
    """Rule-based sentence segmentation over grapheme clusters.

    A sentence ends after '.', '!' or '?' when followed by whitespace and
    then an uppercase letter (or end of text). A trailing period belonging
    to a known abbreviation never ends a sentence. Deterministic; spans are
    disjoint, ordered, trimmed of surrounding whitespace, and cover every
    non-whitespace cluster.
    """
    clusters = graphemes(text)
    n = len(clusters)
    spans: list[SentenceSpan] = []
    start: int | None = None
    i = 0
    while i < n:
        c = clusters[i]
        if start is None:
            if c.isspace():
                i += 1
                continue
            start = i
        if c in SENTENCE_TERMINATORS:
            if c == "." and _token_ending_at(clusters, i) in ABBREVIATIONS:
                i += 1
                continue
            # Look past the terminator run is not needed: split only when the
            # very next cluster is whitespace (or text ends here).
            j = i + 1
            if j >= n:
                spans.append(SentenceSpan(start, i + 1))
                start = None
                i = j
                continue
            if clusters[j].isspace():
                k = j
                while k < n and clusters[k].isspace():
                    k += 1
                if k >= n or clusters[k][:1].isupper():
                    spans.append(SentenceSpan(start, i + 1))
                    start = None
                    i = j
                    continue
        i += 1
    if start is not None:
        end = n
        while end > start and clusters[end - 1].isspace():
            end -= 1
        if end > start:
            spans.append(SentenceSpan(start, end))
    return spans


def word_count(text: str) -> int:
    """Number of maximal runs of non-whitespace characters."""
    return len(text.split())


def _first_cased_index(clusters: list[str]) -> int | None:
    for i, c in enumerate(clusters):
        ch = c[:1]
        if ch.isupper() or ch.islower():
            return i
    return None


def _terminal_punct_of(core: str) -> str | None:
    if core.endswith("..."):
        return "…"
    if core and core[-1] in TERMINAL_PUNCTUATION:
        return "…" if core[-1] == "…" else core[-1]
    return None


def format_signature(selection: str) -> FormatSignature:
    """Extract the formatting conventions of a selection: its surrounding
    whitespace, the case of its first letter, and its terminal punctuation."""
    stripped = selection.strip()
    if not stripped:
        return FormatSignature(selection, "", False, None)
    lead_len = len(selection) - len(selection.lstrip())
    trail_len = len(selection) - len(selection.rstrip())
    leading = selection[:lead_len]
    trailing = selection[len(selection) - trail_len :] if trail_len else ""
    clusters = graphemes(stripped)
    cased = _first_cased_index(clusters)
    starts_upper = cased is not None and clusters[cased][:1].isupper()
    return FormatSignature(leading, trailing, starts_upper, _terminal_punct_of(stripped))


def _match_case(core: str, uppercase: bool) -> str:
    clusters = graphemes(core)
    idx = _first_cased_index(clusters)
    if idx is None:
        return core
    c = clusters[idx]
    clusters[idx] = c[:1].upper() + c[1:] if uppercase else c[:1].lower() + c[1:]
    return "".join(clusters)


def reintegrate(original: str, replacement: str) -> str:
    """Adjust a replacement so it wears the original's formatting.

    The original's leading/trailing whitespace is re-applied, the first
    letter's case is matched, and terminal punctuation is added when the
    original had some and the replacement has none, or stripped when the
    original had none and the replacement ends in '.', '!' or '?'.
    """
    sig = format_signature(original)
    core = replacement.strip()
    if not core:
        return sig.leading_ws + sig.trailing_ws
    core = _match_case(core, sig.starts_uppercase)
    if sig.terminal_punct is not None:
        if _terminal_punct_of(core) is None:
            core += sig.terminal_punct
    else:
        # Strip to a fixed point: dropping a terminator can expose
        # whitespace (or another terminator) that must go too.
        while True:
            stripped = core.rstrip(".!?").rstrip()
            if stripped == core:
                break
            core = stripped
        if not core:
            return sig.leading_ws + sig.trailing_ws
    return sig.leading_ws + core + sig.trailing_ws


def round_half_away(x: float) -> int:
    """Round with halves going away from zero (round() would go to even)."""
    import math

    return int(math.floor(x + 0.5)) if x >= 0 else int(math.ceil(x - 0.5))
