"""Shared random-clip generators for property tests."""

from __future__ import annotations

import random

import pytest

from motifdev.core import TICKS_PER_BAR, ChordEvent, Clip, MotifLabel, NoteEvent, VariantLabel
from motifdev.core import CHORD_QUALITIES


def random_melody(
    rng: random.Random, bars: int = 8, fill: float = 0.75, randomize_velocity: bool = False
) -> tuple[NoteEvent, ...]:
    """Monophonic quantized notes with gaps, spanning up to `bars` bars.

    Velocities default to the package default because the token codec does
    not model them; MIDI tests opt into random velocities.
    """
    notes = []
    t = 0
    end = bars * TICKS_PER_BAR
    while t < end:
        if rng.random() < fill:
            d = min(rng.choice([1, 1, 2, 2, 3, 4, 6]), end - t)
            velocity = rng.randint(40, 120) if randomize_velocity else 100
            notes.append(NoteEvent(start=t, duration=d, pitch=rng.randint(48, 84), velocity=velocity))
            t += d
        else:
            t += rng.choice([1, 2])
    return tuple(notes)


def random_chords(rng: random.Random, bars: int = 8) -> tuple[ChordEvent, ...]:
    qualities = list(CHORD_QUALITIES)
    chords = []
    for bar in range(bars):
        if rng.random() < 0.6:
            chords.append(
                ChordEvent(
                    start=bar * TICKS_PER_BAR,
                    duration=TICKS_PER_BAR,
                    root=rng.randrange(12),
                    quality=rng.choice(qualities),
                )
            )
    return tuple(chords)


def _aligned_note_runs(rng: random.Random, notes, count: int, max_ticks: int = 32):
    """Disjoint content-aligned (start, end, n_notes) spans over note runs."""
    spans = []
    used_until = -1
    i = 0
    while len(spans) < count and i < len(notes) - 1:
        if notes[i].start <= used_until or rng.random() < 0.5:
            i += 1
            continue
        k = rng.randint(2, min(5, len(notes) - i))
        start = int(notes[i].start)
        end = int(notes[i + k - 1].end)
        if end - start <= max_ticks:
            spans.append((start, end, k))
            used_until = end - 1
            i += k
        else:
            i += 1
    return spans


def random_labeled_clip(
    rng: random.Random,
    bars: int = 8,
    n_variants: int = 2,
    with_chords: bool = False,
    randomize_velocity: bool = False,
) -> Clip:
    """Quantized clip with content-aligned, disjoint motif/variant labels."""
    while True:
        melody = random_melody(rng, bars=bars, randomize_velocity=randomize_velocity)
        spans = _aligned_note_runs(rng, melody, count=1 + n_variants)
        if len(spans) >= 1 + n_variants:
            break
    motif = MotifLabel(spans[0][0], spans[0][1], note_count=spans[0][2])
    variants = tuple(
        VariantLabel(rng.randint(1, 5), s, e) for s, e, _ in spans[1:]
    )
    return Clip(
        melody=melody,
        chords=random_chords(rng, bars) if with_chords else (),
        motif_labels=(motif,),
        variant_labels=variants,
    )


def random_motif_clip(rng: random.Random, bars: int = 8) -> Clip:
    """Clip with one motif label only, for labeler scans."""
    while True:
        melody = random_melody(rng, bars=bars)
        spans = _aligned_note_runs(rng, melody, count=1)
        if spans:
            start, end, k = spans[0]
            if end <= (bars - 1) * TICKS_PER_BAR:  # leave room to scan
                return Clip(melody=melody, motif_labels=(MotifLabel(start, end, note_count=k),))


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
