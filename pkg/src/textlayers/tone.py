"""Tone as a point in a three-axis space (formality, sentiment, complexity),
its color encoding, and the picker-disc geometry used by the UI.

Axes run 0..10 in integer steps, so the space is an 11x11x11 lattice of 1331
distinct tones. Colors use the standard hexcone hue/saturation/value model.
"""

from __future__ import annotations

import colorsys
import math
from dataclasses import dataclass

from .textcore import round_half_away

AXIS_MIN = 0
AXIS_MAX = 10
LATTICE_SIZE = (AXIS_MAX - AXIS_MIN + 1) ** 3

# Finite-difference step for the strongest-change probe, as a fraction of the
# disc radius.
GRADIENT_STEP = 1e-3
GRADIENT_EPSILON = 1e-9


@dataclass(frozen=True)
class ToneVector:
    formality: int
    sentiment: int
    complexity: int

    def __post_init__(self):
        for name in ("formality", "sentiment", "complexity"):
            v = getattr(self, name)
            if not isinstance(v, int) or not AXIS_MIN <= v <= AXIS_MAX:
                raise ValueError(f"{name} must be an integer in [0, 10], got {v!r}")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.formality, self.sentiment, self.complexity)

    def delta(self, other: "ToneVector") -> tuple[int, int, int]:
        """Per-axis difference self - other."""
        return (
            self.formality - other.formality,
            self.sentiment - other.sentiment,
            self.complexity - other.complexity,
        )

    def to_wire(self) -> dict:
        return {
            "formality": self.formality,
            "sentiment": self.sentiment,
            "complexity": self.complexity,
        }

    @classmethod
    def from_wire(cls, data: dict) -> "ToneVector":
        return cls(
            int(data["formality"]), int(data["sentiment"]), int(data["complexity"])
        )


def axis_to_channel(v: int) -> int:
    """Slider value 0..10 to a color channel 0..255."""
    return round_half_away(255 * v / 10)


def channel_to_axis(c: int) -> int:
    """Color channel 0..255 back to the nearest slider value."""
    return round_half_away(10 * c / 255)


def tone_to_rgb(tone: ToneVector) -> tuple[int, int, int]:
    return (
        axis_to_channel(tone.formality),
        axis_to_channel(tone.sentiment),
        axis_to_channel(tone.complexity),
    )


def rgb_to_tone(rgb: tuple[int, int, int]) -> ToneVector:
    r, g, b = rgb
    return ToneVector(channel_to_axis(r), channel_to_axis(g), channel_to_axis(b))


@dataclass(frozen=True)
class DiscPoint:
    """Position on the hue/saturation picker disc, unit-radius coordinates."""

    x: float
    y: float

    def __post_init__(self):
        if math.hypot(self.x, self.y) > 1.0 + 1e-12:
            raise ValueError(f"disc point ({self.x}, {self.y}) outside unit radius")


def tone_to_disc(tone: ToneVector) -> tuple[DiscPoint, float]:
    """Project a tone's color onto the picker: hue is the angle, saturation the
    radius, and the value channel rides along unchanged."""
    r, g, b = tone_to_rgb(tone)
    h, s, v = colorsys.rgb_to_hsv(r / 255.0, g / 255.0, b / 255.0)
    angle = 2.0 * math.pi * h
    return DiscPoint(s * math.cos(angle), s * math.sin(angle)), v


def disc_to_tone(point: DiscPoint, value: float) -> ToneVector:
    """Nearest lattice tone for a disc position at the given value level."""
    s = min(math.hypot(point.x, point.y), 1.0)
    h = (math.atan2(point.y, point.x) / (2.0 * math.pi)) % 1.0
    r, g, b = colorsys.hsv_to_rgb(h, s, value)
    return ToneVector(
        channel_to_axis(round_half_away(r * 255)),
        channel_to_axis(round_half_away(g * 255)),
        channel_to_axis(round_half_away(b * 255)),
    )


def _axes_at(x: float, y: float, value: float) -> tuple[float, float, float]:
    # Continuous (unquantized) axis coordinates for gradient probing.
    s = min(math.hypot(x, y), 1.0)
    h = (math.atan2(y, x) / (2.0 * math.pi)) % 1.0
    r, g, b = colorsys.hsv_to_rgb(h, s, value)
    return (r * 10.0, g * 10.0, b * 10.0)


def strongest_change_arrows(
    point: DiscPoint, value: float
) -> tuple[tuple[float, float], tuple[float, float], tuple[float, float]]:
    """Unit direction of steepest increase for each axis at a disc position.

    Estimated by central differences with step 1e-3 of the disc radius; an
    axis that does not vary locally gets the zero vector.
    """
    h = GRADIENT_STEP
    px = _axes_at(point.x + h, point.y, value)
    mx = _axes_at(point.x - h, point.y, value)
    py = _axes_at(point.x, point.y + h, value)
    my = _axes_at(point.x, point.y - h, value)
    arrows = []
    for i in range(3):
        gx = (px[i] - mx[i]) / (2.0 * h)
        gy = (py[i] - my[i]) / (2.0 * h)
        norm = math.hypot(gx, gy)
        if norm < GRADIENT_EPSILON:
            arrows.append((0.0, 0.0))
        else:
            arrows.append((gx / norm, gy / norm))
    return tuple(arrows)


def all_tones() -> list[ToneVector]:
    """The full 1331-point lattice, lexicographic order."""
    return [
        ToneVector(f, s, c)
        for f in range(AXIS_MIN, AXIS_MAX + 1)
        for s in range(AXIS_MIN, AXIS_MAX + 1)
        for c in range(AXIS_MIN, AXIS_MAX + 1)
    ]
