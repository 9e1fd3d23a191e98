import random

import pytest

from motifdev.core import TICKS_PER_BAR, ValidationError
from motifdev.emotion import VAPoint
from motifdev.labeling import pitch_trend
from motifdev.textmotif import (
    MODE_MAJOR,
    MODE_MINOR,
    MusicalFeatures,
    NAD_MARGINS,
    ND_MARGINS,
    arousal_band,
    features_to_motif,
    parse_key,
    scale_pitches,
    synthesize_motif,
    va_to_features,
)


def test_high_arousal_low_valence_bins():
    rng = random.Random(1)
    f = va_to_features(VAPoint(3, 8), rng)
    assert f.mode == MODE_MAJOR
    assert arousal_band(8) == 3
    assert ND_MARGINS[2] < f.nd <= ND_MARGINS[3]
    assert NAD_MARGINS[0] < f.nad <= NAD_MARGINS[1]


def test_low_arousal_high_valence_bins():
    rng = random.Random(2)
    f = va_to_features(VAPoint(7, 2), rng)
    assert f.mode == MODE_MINOR
    assert arousal_band(2) == 1
    assert ND_MARGINS[0] < f.nd <= ND_MARGINS[1]
    assert NAD_MARGINS[2] < f.nad <= NAD_MARGINS[3]


def test_valence_boundary_is_major():
    f = va_to_features(VAPoint(5, 3), random.Random(3))
    assert f.mode == MODE_MAJOR
    assert arousal_band(3) == 1


def test_invert_valence_mode_flag():
    rng = random.Random(4)
    assert va_to_features(VAPoint(3, 5), rng, invert_valence_mode=True).mode == MODE_MINOR
    assert va_to_features(VAPoint(7, 5), rng, invert_valence_mode=True).mode == MODE_MAJOR


def test_mode_depends_only_on_valence():
    for arousal in (0.5, 3, 6, 9):
        assert va_to_features(VAPoint(4, arousal), random.Random(0)).mode == MODE_MAJOR
        assert va_to_features(VAPoint(6, arousal), random.Random(0)).mode == MODE_MINOR


def test_arousal_band_edges():
    assert [arousal_band(a) for a in (0.1, 3, 3.1, 6, 6.1, 9)] == [1, 1, 2, 2, 3, 3]
    with pytest.raises(ValidationError):
        arousal_band(0)
    with pytest.raises(ValidationError):
        arousal_band(9.1)


def test_scale_d4_major():
    assert scale_pitches(62, MODE_MAJOR) == (62, 64, 66, 67, 69, 71, 73, 74)


def test_scale_minor_offsets():
    assert scale_pitches(60, MODE_MINOR) == (60, 62, 63, 65, 67, 68, 70, 72)


def test_low_density_clamps_to_two_notes():
    f = MusicalFeatures(mode=MODE_MAJOR, nd=0.25, nad=1.0)
    clip, spec = features_to_motif(f, 60, random.Random(5))
    assert spec.non == 2
    assert len(clip.melody) == 2


def test_two_notes_per_beat_in_d_major():
    f = MusicalFeatures(mode=MODE_MAJOR, nd=2.0, nad=0.5)
    clip, spec = features_to_motif(f, 62, random.Random(5))
    assert spec.non == 8
    assert spec.scale == (62, 64, 66, 67, 69, 71, 73, 74)
    assert len(clip.melody) == 8


def test_high_density_caps_at_bar_capacity():
    # 8 notes/beat would ask for 32 notes; 16 one-tick notes is the grid cap
    f = MusicalFeatures(mode=MODE_MINOR, nd=8.0, nad=0.1)
    clip, spec = features_to_motif(f, 60, random.Random(6))
    assert spec.non == 16
    assert sum(spec.durations) == TICKS_PER_BAR


def test_motif_fills_exactly_one_bar():
    rng = random.Random(6)
    for _ in range(300):
        va = VAPoint(rng.uniform(1, 9), rng.uniform(0.01, 9))
        clip, features, spec = synthesize_motif(va, 60, seed=rng.randrange(1 << 30))
        assert spec.non >= 2
        assert sum(spec.durations) == TICKS_PER_BAR
        assert sum(int(n.duration) for n in clip.melody) == TICKS_PER_BAR
        scale = set(spec.scale)
        assert all(n.pitch in scale for n in clip.melody)
        band = arousal_band(va.arousal)
        assert ND_MARGINS[band - 1] < features.nd <= ND_MARGINS[band]
        assert NAD_MARGINS[3 - band] < features.nad <= NAD_MARGINS[4 - band]


def test_motif_determinism():
    a = synthesize_motif(VAPoint(3, 8), 62, seed=11)
    b = synthesize_motif(VAPoint(3, 8), 62, seed=11)
    assert a == b
    c = synthesize_motif(VAPoint(3, 8), 62, seed=12)
    assert a != c


def test_motif_is_labeled_and_monophonic():
    clip, _, _ = synthesize_motif(VAPoint(5, 5), 60, seed=0)
    assert len(clip.motif_labels) == 1
    assert clip.motif_labels[0].start == 0
    assert clip.motif_labels[0].end == TICKS_PER_BAR
    assert len(pitch_trend([n.pitch for n in clip.melody])) >= 1


def test_parse_key():
    assert parse_key("C4") == 60
    assert parse_key("D4") == 62
    assert parse_key("F#3") == 54
    assert parse_key("Eb5") == 75
    with pytest.raises(ValidationError):
        parse_key("H2")
    with pytest.raises(ValidationError):
        parse_key("C99")
