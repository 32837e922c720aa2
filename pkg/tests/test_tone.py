from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from textlayers.tone import (
    DiscPoint,
    ToneVector,
    all_tones,
    disc_to_tone,
    rgb_to_tone,
    strongest_change_arrows,
    tone_to_disc,
    tone_to_rgb,
)

from naive_oracles import reference_axis_gradients

AXIS = st.integers(min_value=0, max_value=10)


def test_tone_vector_validates_range():
    with pytest.raises(ValueError):
        ToneVector(11, 0, 0)
    with pytest.raises(ValueError):
        ToneVector(0, -1, 0)


def test_lattice_has_1331_points():
    tones = list(all_tones())
    assert len(tones) == 1331
    assert len(set(tones)) == 1331


# -- colour mapping -----------------------------------------------------------


def test_black_and_white_corners():
    assert tone_to_rgb(ToneVector(0, 0, 0)) == (0, 0, 0)
    assert tone_to_rgb(ToneVector(10, 10, 10)) == (255, 255, 255)


def test_purple_corner():
    assert tone_to_rgb(ToneVector(10, 0, 10)) == (255, 0, 255)
    assert rgb_to_tone((255, 0, 255)) == ToneVector(10, 0, 10)


def test_grey_midpoint():
    assert tone_to_rgb(ToneVector(5, 5, 5)) == (128, 128, 128)
    assert rgb_to_tone((128, 128, 128)) == ToneVector(5, 5, 5)


def test_colour_round_trip_exhaustive():
    for tone in all_tones():
        assert rgb_to_tone(tone_to_rgb(tone)) == tone


@given(AXIS, AXIS, AXIS)
def test_channel_monotone_in_axis(s, c, other):
    # Raising one slider never lowers its channel.
    values = [tone_to_rgb(ToneVector(f, s, c))[0] for f in range(11)]
    assert values == sorted(values)


# -- wheel --------------------------------------------------------------------


def test_pure_red_sits_at_angle_zero_full_radius():
    point, value = tone_to_disc(ToneVector(10, 0, 0))
    assert point.x == pytest.approx(1.0)
    assert point.y == pytest.approx(0.0, abs=1e-12)
    assert value == pytest.approx(1.0)


def test_pure_green_sits_at_120_degrees():
    point, _ = tone_to_disc(ToneVector(0, 10, 0))
    angle = math.degrees(math.atan2(point.y, point.x)) % 360
    assert angle == pytest.approx(120.0)


def test_grey_sits_at_center():
    point, value = tone_to_disc(ToneVector(5, 5, 5))
    assert (point.x, point.y) == (0.0, 0.0)
    assert value == pytest.approx(128 / 255)


def test_pure_blue_from_disc():
    angle = math.radians(240)
    assert disc_to_tone(DiscPoint(math.cos(angle), math.sin(angle)), 1.0) == ToneVector(
        0, 0, 10
    )


def test_center_at_full_value_is_white():
    assert disc_to_tone(DiscPoint(0.0, 0.0), 1.0) == ToneVector(10, 10, 10)


def test_disc_point_outside_radius_rejected():
    with pytest.raises(ValueError):
        DiscPoint(1.2, 0.0)


def test_wheel_round_trip_exhaustive_1331():
    for tone in all_tones():
        point, value = tone_to_disc(tone)
        assert disc_to_tone(point, value) == tone


# -- arrows ---------------------------------------------------------------------


def test_arrows_are_deterministic():
    point, value = tone_to_disc(ToneVector(3, 7, 2))
    assert strongest_change_arrows(point, value) == strongest_change_arrows(
        point, value
    )


def test_arrows_at_pure_red_rim():
    # On the rim at hue 0 the red channel is locally flat (it equals the
    # retained value across the whole sector), so the formality arrow
    # degenerates to zero; the other two point inward, mirrored across y=0.
    point, value = tone_to_disc(ToneVector(10, 0, 0))
    formality, sentiment, complexity = strongest_change_arrows(point, value)
    assert formality == (0.0, 0.0)
    assert math.hypot(*sentiment) == pytest.approx(1.0)
    assert math.hypot(*complexity) == pytest.approx(1.0)
    assert sentiment[0] < 0 and complexity[0] < 0
    assert sentiment[1] == pytest.approx(-complexity[1])


def test_arrows_at_center_mirror_and_point_at_their_channels():
    # At the cone apex the finite-difference arrows land at 0, 135 and 225
    # degrees: each one inside its channel's sector, green/blue mirrored.
    point, value = tone_to_disc(ToneVector(5, 5, 5))
    arrows = strongest_change_arrows(point, value)
    angles = [math.degrees(math.atan2(dy, dx)) % 360 for dx, dy in arrows]
    assert angles[0] == pytest.approx(0.0, abs=1e-6)
    assert angles[1] == pytest.approx(135.0, abs=1e-6)
    assert angles[2] == pytest.approx(225.0, abs=1e-6)


@given(
    st.floats(min_value=-0.95, max_value=0.95),
    st.floats(min_value=-0.95, max_value=0.95),
    st.floats(min_value=0.05, max_value=1.0),
)
def test_arrows_match_independent_finite_difference_oracle(x, y, value):
    if math.hypot(x, y) > 0.95:
        return
    got = strongest_change_arrows(DiscPoint(x, y), value)
    want = reference_axis_gradients(x, y, value)
    for (gx, gy), (wx, wy) in zip(got, want):
        assert gx == pytest.approx(wx, abs=1e-6)
        assert gy == pytest.approx(wy, abs=1e-6)


def test_wire_round_trip():
    tone = ToneVector(2, 9, 4)
    assert ToneVector.from_wire(tone.to_wire()) == tone
    assert tone.to_wire() == {"formality": 2, "sentiment": 9, "complexity": 4}
