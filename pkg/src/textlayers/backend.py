"""Language-transform providers.

Two implementations share one request/response contract: a deterministic mock
whose rules are normative for the test suite (documented in the README), and
a remote provider speaking the OpenAI-compatible chat-completions protocol
with prompt templates, a response cache, one transport retry, and timeouts.
"""

from __future__ import annotations

import hashlib
import json
import re
import string
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import httpx

from .textcore import (
    grapheme_length,
    grapheme_slice,
    round_half_away,
    segment_sentences,
    word_count,
)


class BackendError(Exception):
    pass


class TimeoutError(BackendError):  # noqa: A001 - scoped to this module
    pass


class RemoteError(BackendError):
    def __init__(self, status: int, body_excerpt: str):
        super().__init__(f"remote backend returned {status}: {body_excerpt}")
        self.status = status
        self.body_excerpt = body_excerpt


class ValidationError(BackendError):
    pass


@dataclass(frozen=True)
class BackendRequest:
    kind: str
    slots: dict[str, str] = field(default_factory=dict)
    constraints: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BackendResponse:
    texts: tuple[str, ...]
    usage: int = 0
    latency_ms: float = 0.0


# Slots each kind must carry; checked before any work, network or not.
REQUIRED_SLOTS: dict[str, tuple[str, ...]] = {
    "erase": ("selection", "sentence"),
    "repair": ("sentence",),
    "smudge": ("selection", "sentence"),
    "number": ("selection", "sentence"),
    "tense": ("selection", "sentence"),
    "tone": ("sentence",),
    "estimate_tone": ("selection",),
    "prompt": ("selection", "prompt"),
    "rotate": ("selection", "sentence"),
    "split": ("sentence",),
    "combine": ("sentence",),
    "unite": ("fragment", "target"),
    "intersect": ("fragment", "target"),
    "subtract": ("fragment", "target"),
    "exclude": ("fragment", "target"),
    "resize": ("sentence",),
}


def validate_request(req: BackendRequest) -> None:
    if req.kind not in REQUIRED_SLOTS:
        raise ValidationError(f"unknown request kind {req.kind!r}")
    for slot in REQUIRED_SLOTS[req.kind]:
        if not req.slots.get(slot):
            raise ValidationError(f"{req.kind} request missing slot {slot!r}")


def cache_key(req: BackendRequest, model: str) -> str:
    canon = json.dumps(
        {
            "kind": req.kind,
            "slots": req.slots,
            "constraints": req.constraints,
            "model": model,
        },
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------
# Deterministic mock

POSITIVE_WORDS = frozenset(
    "good great happy love loved nice wonderful excellent delighted joy bright calm".split()
)
NEGATIVE_WORDS = frozenset(
    "bad sad tired hate hated awful terrible angry exhausted horrible pain dark".split()
)

_WORD_TRIM = ".,!?;:…\"'()[]"


def estimate_tone_triple(text: str) -> tuple[int, int, int]:
    """The mock tone reading: formality from mean raw-token length, sentiment
    from lexicon hits around a neutral 5, complexity from mean sentence
    length in words divided by three."""
    words = text.split()
    if not words:
        return (0, 5, 0)
    formality = min(10, round_half_away(sum(len(w) for w in words) / len(words)))
    hits = 0
    for w in words:
        key = w.strip(_WORD_TRIM).casefold()
        if key in POSITIVE_WORDS:
            hits += 1
        elif key in NEGATIVE_WORDS:
            hits -= 1
    sentiment = max(0, min(10, 5 + hits))
    spans = segment_sentences(text)
    n_sentences = max(1, len(spans))
    complexity = min(10, round_half_away(word_count(text) / n_sentences / 3.0))
    return (formality, sentiment, complexity)


def _splice_selection(req: BackendRequest, new_selection: str) -> str:
    scope = req.slots["sentence"]
    off = int(req.constraints["selection_offset"])
    length = int(req.constraints["selection_length"])
    total = grapheme_length(scope)
    return (
        grapheme_slice(scope, 0, off)
        + new_selection
        + grapheme_slice(scope, off + length, total)
    )


def _multiset_difference(keep: list[str], remove: list[str]) -> list[str]:
    budget: dict[str, int] = {}
    for w in remove:
        k = w.casefold()
        budget[k] = budget.get(k, 0) + 1
    out = []
    for w in keep:
        k = w.casefold()
        if budget.get(k, 0) > 0:
            budget[k] -= 1
        else:
            out.append(w)
    return out


def _multiset_intersection(a: list[str], b: list[str]) -> list[str]:
    budget: dict[str, int] = {}
    for w in b:
        k = w.casefold()
        budget[k] = budget.get(k, 0) + 1
    out = []
    for w in a:
        k = w.casefold()
        if budget.get(k, 0) > 0:
            budget[k] -= 1
            out.append(w)
    return out


def _ensure_terminal(text: str, punct: str) -> str:
    return text.rstrip(".!?…") + punct


class MockBackend:
    """Rule-based stand-in. Every rule is a pure string function, so the full
    engine/service path is testable byte for byte without a model."""

    name = "mock"

    def complete(self, req: BackendRequest) -> BackendResponse:
        validate_request(req)
        handler = getattr(self, f"_{req.kind}", None)
        if handler is None:
            raise ValidationError(f"mock cannot serve kind {req.kind!r}")
        started = time.perf_counter()
        text = handler(req)
        return BackendResponse(
            texts=(text,), usage=0, latency_ms=(time.perf_counter() - started) * 1000.0
        )

    def resize_variants(self, sentence: str, deltas: list[int]) -> list[str]:
        if not sentence:
            raise ValidationError("resize needs a sentence")
        if not deltas:
            raise ValidationError("resize needs at least one delta")
        out = []
        for delta in deltas:
            words = sentence.split()
            if delta < 0:
                words = words[: max(1, len(words) + delta)]
            elif delta > 0:
                words = words + [words[-1]] * delta
            out.append(" ".join(words))
        return out

    # -- one rule per kind ---------------------------------------------------

    def _erase(self, req: BackendRequest) -> str:
        joined = _splice_selection(req, "")
        joined = re.sub(r"[ \t]{2,}", " ", joined)
        joined = re.sub(r" +([.,!?;:])", r"\1", joined)
        return joined

    def _repair(self, req: BackendRequest) -> str:
        s = re.sub(r" {2,}", " ", req.slots["sentence"].strip())
        for i, ch in enumerate(s):
            if ch.isalpha():
                s = s[:i] + ch.upper() + s[i + 1 :]
                break
        if s and s[-1] not in ".!?…":
            s += "."
        return s

    def _smudge(self, req: BackendRequest) -> str:
        words = req.slots["selection"].split()
        if len(words) > 1:
            words = [words[-1]] + words[:-1]
        return _splice_selection(req, " ".join(words))

    def _number(self, req: BackendRequest) -> str:
        direction = req.constraints.get("number")
        if direction not in ("singular", "plural"):
            raise ValidationError(f"bad number direction {direction!r}")
        words = req.slots["selection"].split()
        if direction == "plural":
            words = [w + "s" for w in words]
        else:
            words = [w[:-1] if w.endswith("s") else w for w in words]
        return _splice_selection(req, " ".join(words))

    def _tense(self, req: BackendRequest) -> str:
        tense = req.constraints.get("tense")
        sel = req.slots["selection"]
        if tense == "future":
            sel = "will " + sel
        elif tense == "past":
            sel = "did " + sel
        elif tense == "present":
            if sel.startswith("will "):
                sel = sel[5:]
            elif sel.startswith("did "):
                sel = sel[4:]
        else:
            raise ValidationError(f"bad tense {tense!r}")
        return _splice_selection(req, sel)

    def _tone(self, req: BackendRequest) -> str:
        core = req.slots["sentence"].strip()
        f0, s0, c0 = estimate_tone_triple(core)
        df = int(req.constraints["formality"]) - f0
        ds = int(req.constraints["sentiment"]) - s0
        dc = int(req.constraints["complexity"]) - c0
        words = core.split()
        if dc > 0:
            words = words + [words[-1]]
        elif dc < 0 and len(words) > 1:
            words = words[:-1]
        if df > 0:
            words[-1] = words[-1].upper()
        elif df < 0:
            words[-1] = words[-1].lower()
        text = " ".join(words)
        if ds > 0:
            text = _ensure_terminal(text, "!")
        elif ds < 0:
            text = _ensure_terminal(text, ".")
        return text

    def _estimate_tone(self, req: BackendRequest) -> str:
        f, s, c = estimate_tone_triple(req.slots["selection"])
        return f"{f},{s},{c}"

    def _prompt(self, req: BackendRequest) -> str:
        first = req.slots["prompt"].split()[0]
        return _splice_selection(req, f"[{first}] " + req.slots["selection"])

    def _rotate(self, req: BackendRequest) -> str:
        d = float(req.constraints["intensity"])
        words = req.slots["selection"].split()
        n = len(words)
        k = round_half_away(d * n) % n if n else 0
        return _splice_selection(req, " ".join(words[k:] + words[:k]))

    def _split(self, req: BackendRequest) -> str:
        s = req.slots["sentence"]
        positions = [m.start() for m in re.finditer(", ", s)]
        if not positions:
            return s
        mid = len(s) / 2.0
        at = min(positions, key=lambda p: (abs(p - mid), p))
        rest = s[at + 2 :]
        if rest:
            rest = rest[0].upper() + rest[1:]
        return s[:at] + ". " + rest

    def _combine(self, req: BackendRequest) -> str:
        s = req.slots["sentence"]
        while True:
            at = s.find(". ")
            if at == -1 or at + 2 >= len(s):
                break
            rest = s[at + 2 :]
            s = s[:at] + ", " + rest[0].lower() + rest[1:]
        return s

    def _unite(self, req: BackendRequest) -> str:
        a = req.slots["fragment"].split()
        b = req.slots["target"].split()
        return " ".join(a + _multiset_difference(b, a))

    def _intersect(self, req: BackendRequest) -> str:
        a = req.slots["fragment"].split()
        b = req.slots["target"].split()
        return " ".join(_multiset_intersection(a, b))

    def _subtract(self, req: BackendRequest) -> str:
        a = req.slots["fragment"].split()
        b = req.slots["target"].split()
        return " ".join(_multiset_difference(b, a))

    def _exclude(self, req: BackendRequest) -> str:
        a = req.slots["fragment"].split()
        b = req.slots["target"].split()
        return " ".join(_multiset_difference(a, b) + _multiset_difference(b, a))


# --------------------------------------------------------------------------
# Remote chat-completions provider

SYSTEM_MESSAGE = (
    "You are a precise text-editing engine. Reply with the transformed text "
    "only: no explanations, no quotes, no code fences."
)

_FENCE = re.compile(r"\A```[^\n]*\n(.*?)\n?```\s*\Z", re.DOTALL)
_QUOTE_PAIRS = [('"', '"'), ("'", "'"), ("“", "”"), ("‘", "’")]


def sanitize_reply(text: str) -> str:
    """Strip one markdown-fence layer, then one pair of matching quotes."""
    out = text.strip()
    m = _FENCE.match(out)
    if m:
        out = m.group(1).strip()
    for open_q, close_q in _QUOTE_PAIRS:
        if len(out) >= 2 and out.startswith(open_q) and out.endswith(close_q):
            out = out[1:-1].strip()
            break
    return out


def load_template(kind: str) -> string.Template:
    text = (
        resources.files("textlayers")
        .joinpath("templates", f"{kind}.txt")
        .read_text(encoding="utf-8")
    )
    return string.Template(text)


class ResponseCache:
    """In-memory map with optional on-disk spill; I/O trouble degrades to a
    miss, never to a request failure."""

    def __init__(self, spill_dir: Optional[Path] = None):
        self._mem: dict[str, str] = {}
        self._lock = threading.Lock()
        self.spill_dir = spill_dir
        if spill_dir is not None:
            try:
                spill_dir.mkdir(parents=True, exist_ok=True)
            except OSError:
                self.spill_dir = None

    def lookup(self, key: str) -> Optional[str]:
        with self._lock:
            if key in self._mem:
                return self._mem[key]
        if self.spill_dir is not None:
            try:
                text = (self.spill_dir / f"{key}.json").read_text(encoding="utf-8")
                value = json.loads(text)["text"]
            except (OSError, ValueError, KeyError):
                return None
            with self._lock:
                self._mem[key] = value
            return value
        return None

    def store(self, key: str, value: str) -> None:
        with self._lock:
            self._mem[key] = value
        if self.spill_dir is not None:
            try:
                path = self.spill_dir / f"{key}.json"
                path.write_text(
                    json.dumps({"text": value}, ensure_ascii=False), encoding="utf-8"
                )
            except OSError:
                pass


class RemoteBackend:
    name = "remote"

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: Optional[str] = None,
        timeout_ms: int = 30_000,
        cache: Optional[ResponseCache] = None,
        transport: Optional[httpx.BaseTransport] = None,
        temperature: float = 0.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.timeout_ms = timeout_ms
        self.cache = cache if cache is not None else ResponseCache()
        self.temperature = temperature
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = httpx.Client(
            headers=headers, timeout=timeout_ms / 1000.0, transport=transport
        )

    def close(self) -> None:
        self._client.close()

    def complete(self, req: BackendRequest) -> BackendResponse:
        validate_request(req)
        key = cache_key(req, self.model)
        cached = self.cache.lookup(key)
        if cached is not None:
            return BackendResponse(texts=(cached,), usage=0, latency_ms=0.0)
        prompt = load_template(req.kind).safe_substitute(
            {**{k: str(v) for k, v in req.constraints.items()}, **req.slots}
        )
        started = time.perf_counter()
        content, usage = self._chat(prompt)
        text = sanitize_reply(content)
        if not text:
            raise ValidationError(f"{req.kind} produced a blank completion")
        self.cache.store(key, text)
        return BackendResponse(
            texts=(text,),
            usage=usage,
            latency_ms=(time.perf_counter() - started) * 1000.0,
        )

    def resize_variants(self, sentence: str, deltas: list[int]) -> list[str]:
        if not sentence:
            raise ValidationError("resize needs a sentence")
        if not deltas:
            raise ValidationError("resize needs at least one delta")

        def one(delta: int) -> str:
            req = BackendRequest(
                kind="resize",
                slots={"sentence": sentence},
                constraints={
                    "delta": delta,
                    "target_words": word_count(sentence) + delta,
                },
            )
            return self.complete(req).texts[0]

        results: list[Optional[str]] = [None] * len(deltas)
        with ThreadPoolExecutor(max_workers=min(8, len(deltas))) as pool:
            futures = {pool.submit(one, d): i for i, d in enumerate(deltas)}
            errors = []
            for fut, i in futures.items():
                try:
                    results[i] = fut.result()
                except BackendError as exc:
                    errors.append(exc)
        got = [r for r in results if r is not None]
        if not got:
            raise BackendError(f"all {len(deltas)} variant requests failed: {errors[0]}")
        return got

    def _chat(self, prompt: str) -> tuple[str, int]:
        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": SYSTEM_MESSAGE},
                {"role": "user", "content": prompt},
            ],
            "temperature": self.temperature,
        }
        url = f"{self.base_url}/chat/completions"
        attempts = 0
        while True:
            attempts += 1
            try:
                resp = self._client.post(url, json=body)
            except httpx.TimeoutException as exc:
                raise TimeoutError(f"no reply within {self.timeout_ms} ms") from exc
            except httpx.TransportError as exc:
                if attempts >= 2:
                    raise RemoteError(0, f"transport failure: {exc}") from exc
                continue
            if resp.status_code >= 400:
                raise RemoteError(resp.status_code, resp.text[:200])
            try:
                data = resp.json()
                content = data["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise RemoteError(resp.status_code, resp.text[:200]) from exc
            usage = 0
            if isinstance(data.get("usage"), dict):
                usage = int(data["usage"].get("total_tokens", 0))
            return content, usage
