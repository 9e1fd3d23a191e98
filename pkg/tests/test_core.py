import pytest

from motifdev.core import (
    Clip,
    MotifLabel,
    NoteEvent,
    ValidationError,
    VariantLabel,
    monophonic,
    quantize_clip,
    validate_clip,
)


def test_note_event_bounds():
    with pytest.raises(ValidationError):
        NoteEvent(start=-1, duration=1, pitch=60)
    with pytest.raises(ValidationError):
        NoteEvent(start=0, duration=0, pitch=60)
    with pytest.raises(ValidationError):
        NoteEvent(start=0, duration=1, pitch=128)
    with pytest.raises(ValidationError):
        NoteEvent(start=0, duration=1, pitch=60, velocity=0)


def test_clip_rejects_polyphony():
    notes = (
        NoteEvent(start=0, duration=4, pitch=60),
        NoteEvent(start=2, duration=4, pitch=64),
    )
    with pytest.raises(ValidationError, match="monophonic"):
        Clip(melody=notes)


def test_clip_rejects_non_44():
    with pytest.raises(ValidationError, match="4/4"):
        Clip(time_signature=(3, 4))


def test_quantize_rounds_to_nearest_tick():
    clip = Clip(melody=(NoteEvent(start=0.49, duration=4, pitch=60),))
    assert quantize_clip(clip).melody[0].start == 0


def test_quantize_floors_duration_at_one():
    clip = Clip(melody=(NoteEvent(start=0, duration=0.2, pitch=60),))
    assert quantize_clip(clip).melody[0].duration == 1


def test_quantize_truncates_collision():
    # raw notes touch at 3.2; both round up to reach past the second onset
    clip = Clip(
        melody=(
            NoteEvent(start=1.6, duration=1.6, pitch=60),
            NoteEvent(start=3.2, duration=2, pitch=62),
        )
    )
    out = quantize_clip(clip)
    assert [(n.start, n.duration) for n in out.melody] == [(2, 1), (3, 2)]


def test_quantize_drops_note_truncated_to_nothing():
    # both onsets round to tick 1; the earlier note is truncated to nothing
    clip = Clip(
        melody=(
            NoteEvent(start=0.9, duration=0.2, pitch=60),
            NoteEvent(start=1.1, duration=2, pitch=62),
        )
    )
    out = quantize_clip(clip)
    assert [(n.start, n.pitch) for n in out.melody] == [(1, 62)]


def test_quantize_idempotent(rng):
    for _ in range(50):
        melody = []
        t = 0.0
        for _ in range(10):
            t += rng.random() * 3
            melody.append(NoteEvent(start=t, duration=0.3 + rng.random() * 3, pitch=rng.randint(40, 90)))
            t += melody[-1].duration
        clip = Clip(melody=tuple(melody))
        once = quantize_clip(clip)
        assert quantize_clip(once) == once
        assert once.is_quantized()


def test_monophonic_sorts_and_truncates():
    out = monophonic(
        [
            NoteEvent(start=4, duration=4, pitch=64),
            NoteEvent(start=0, duration=8, pitch=60),
        ]
    )
    assert [(n.start, n.duration) for n in out] == [(0, 4), (4, 4)]


def test_motif_label_invariants():
    with pytest.raises(ValidationError):
        MotifLabel(0, 0)
    with pytest.raises(ValidationError):
        MotifLabel(0, 40)  # > 2 bars
    with pytest.raises(ValidationError):
        MotifLabel(0, 16, note_count=1)


def test_variant_label_invariants():
    with pytest.raises(ValidationError):
        VariantLabel(0, 0, 16)
    with pytest.raises(ValidationError):
        VariantLabel(6, 0, 16)
    with pytest.raises(ValidationError):
        VariantLabel(1, 16, 16)


def test_validate_clip_checks_label_coverage():
    melody = (
        NoteEvent(start=0, duration=4, pitch=60),
        NoteEvent(start=4, duration=4, pitch=62),
    )
    good = Clip(melody=melody, motif_labels=(MotifLabel(0, 8, note_count=2),))
    validate_clip(good, require_quantized=True)

    bad = Clip(melody=melody, motif_labels=(MotifLabel(0, 8, note_count=3),))
    with pytest.raises(ValidationError, match="note_count"):
        validate_clip(bad)

    past_end = Clip(melody=melody, variant_labels=(VariantLabel(1, 20, 30),))
    with pytest.raises(ValidationError, match="past clip end"):
        validate_clip(past_end)
