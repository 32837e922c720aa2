from __future__ import annotations

import random

import pytest
from hypothesis import HealthCheck, settings

from textlayers.layers import HiddenLayerError, LayerStack, OverlapError

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")

# Mixed ASCII, accents, a combining mark, an emoji, and sentence punctuation:
# slicing anywhere must stay cluster-safe.
ALPHABET = "abcde t. , !?Zné" + "ó" + "🙂"


def random_text(rng: random.Random, max_len: int) -> str:
    return "".join(
        rng.choice(ALPHABET) for _ in range(rng.randint(0, max_len))
    )


def build_random_stack(
    seed: int,
    max_layers: int = 8,
    max_edits: int = 50,
    text_cap: int = 500,
) -> LayerStack:
    """Drive the public API with a seeded random walk: edits on random active
    layers, visibility toggles, occasional reorders."""
    rng = random.Random(seed)
    stack = LayerStack.new(random_text(rng, 40))
    for i in range(rng.randint(0, max_layers - 1)):
        stack.add_layer(f"layer{i}")
    ordinals = [layer.ordinal for layer in stack.layers]

    for _ in range(rng.randint(0, max_edits)):
        stack.set_active(rng.choice(ordinals))
        if rng.random() < 0.15:
            victim = rng.choice(ordinals)
            stack.set_visibility(
                victim, not stack.layer_by_ordinal(victim).visible
            )
        comp = stack.compose()
        n = len(comp)
        start = rng.randint(0, n)
        end = min(n, start + rng.randint(0, 8))
        replacement = random_text(rng, 8) if n < text_cap else ""
        try:
            if rng.random() < 0.5:
                stack.record_edit(comp, start, end, replacement)
            else:
                stack.record_replacement(comp, start, end, replacement)
        except (OverlapError, HiddenLayerError):
            pass
        if rng.random() < 0.1 and len(stack.layers) > 1:
            stack.reorder_layer(
                rng.randrange(len(stack.layers)), rng.randrange(len(stack.layers))
            )
    return stack


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)
