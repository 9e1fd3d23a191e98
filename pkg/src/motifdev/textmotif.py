"""Emotion-driven motif synthesis.

Valence picks the mode, arousal picks a note-density and note-duration
band, and a one-bar motif is sampled from the resulting scale. All
randomness flows through an explicit seeded generator, so identical
(VA, key, seed) inputs produce identical motifs.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass

from .core import (
    TICKS_PER_BAR,
    TICKS_PER_BEAT,
    Clip,
    MotifLabel,
    NoteEvent,
    ValidationError,
)
from .emotion import VAPoint

MODE_MAJOR = "major"
MODE_MINOR = "minor"

# Semitone offsets of one octave of each mode, root included at both ends.
SCALE_OFFSETS = {
    MODE_MAJOR: (0, 2, 4, 5, 7, 9, 11, 12),
    MODE_MINOR: (0, 2, 3, 5, 7, 8, 10, 12),
}

# Band edges indexed by ceil(arousal / 3): higher arousal selects a denser
# note band and a shorter duration band.
ND_MARGINS = (0.0, 3.5, 5.0, 8.0)
NAD_MARGINS = (0.0, 0.8, 1.2, 2.0)

BEATS_PER_BAR = TICKS_PER_BAR // TICKS_PER_BEAT
MAX_NOTES_PER_BAR = TICKS_PER_BAR  # one-tick notes fill the bar
EIGHTH_TICKS = 2


@dataclass(frozen=True)
class MusicalFeatures:
    """Mode plus note density (notes/beat) and average duration (beats)."""

    mode: str
    nd: float
    nad: float

    def __post_init__(self):
        if self.mode not in (MODE_MAJOR, MODE_MINOR):
            raise ValidationError(f"mode must be major or minor, got {self.mode!r}")
        if not 0 < self.nd <= ND_MARGINS[-1]:
            raise ValidationError(f"nd {self.nd} outside (0, {ND_MARGINS[-1]}]")
        if not 0 < self.nad <= NAD_MARGINS[-1]:
            raise ValidationError(f"nad {self.nad} outside (0, {NAD_MARGINS[-1]}]")


@dataclass(frozen=True)
class MotifSpec:
    """Resolved sampling decisions behind a synthesized motif."""

    key: int
    non: int
    scale: tuple[int, ...]
    durations: tuple[int, ...]


def arousal_band(arousal: float) -> int:
    """Band index in {1, 2, 3}: ceil(arousal / 3)."""
    if not 0 < arousal <= 9:
        raise ValidationError(f"arousal {arousal} outside (0, 9]")
    return math.ceil(arousal / 3)


def _sample_half_open(rng: random.Random, lo: float, hi: float) -> float:
    """Uniform draw from (lo, hi]."""
    return hi - rng.random() * (hi - lo)


def va_to_features(
    va: VAPoint,
    rng: random.Random,
    invert_valence_mode: bool = False,
) -> MusicalFeatures:
    """Map a VA point to (mode, nd, nad).

    Low valence selects major by default; ``invert_valence_mode`` flips
    the branch for the conventional high-valence-positive reading.
    """
    major = va.valence <= 5
    if invert_valence_mode:
        major = not major
    idx = arousal_band(va.arousal)
    nd = _sample_half_open(rng, ND_MARGINS[idx - 1], ND_MARGINS[idx])
    nad = _sample_half_open(rng, NAD_MARGINS[3 - idx], NAD_MARGINS[4 - idx])
    return MusicalFeatures(mode=MODE_MAJOR if major else MODE_MINOR, nd=nd, nad=nad)


def scale_pitches(key: int, mode: str) -> tuple[int, ...]:
    """One octave of the mode's scale rooted at a MIDI key."""
    offsets = SCALE_OFFSETS[mode]
    if key < 0 or key + offsets[-1] > 127:
        raise ValidationError(f"key {key} leaves the scale outside MIDI range")
    return tuple(key + o for o in offsets)


def features_to_motif(
    features: MusicalFeatures,
    key: int,
    rng: random.Random,
) -> tuple[Clip, MotifSpec]:
    """Sample a one-bar, motif-labeled clip realizing the features.

    The note count is nd * beats-per-bar rounded, at least 2, and capped
    at the bar's sixteenth-grid capacity. Durations start at the
    quantized nad (shrunk if the bar would overflow) and are padded with
    eighth notes on random notes until they total exactly one bar, the
    final addition trimmed if it would overshoot.
    """
    non = max(2, min(MAX_NOTES_PER_BAR, round(features.nd * BEATS_PER_BAR)))
    scale = scale_pitches(key, features.mode)
    pitches = [rng.choice(scale) for _ in range(non)]

    base = max(1, round(features.nad * TICKS_PER_BEAT))
    if base * non > TICKS_PER_BAR:
        base = max(1, TICKS_PER_BAR // non)
    durations = [base] * non
    total = base * non
    while total < TICKS_PER_BAR:
        add = min(EIGHTH_TICKS, TICKS_PER_BAR - total)
        durations[rng.randrange(non)] += add
        total += add

    notes = []
    start = 0
    for p, d in zip(pitches, durations):
        notes.append(NoteEvent(start=start, duration=d, pitch=p))
        start += d
    clip = Clip(
        melody=tuple(notes),
        motif_labels=(MotifLabel(0, TICKS_PER_BAR, note_count=non),),
    )
    spec = MotifSpec(key=key, non=non, scale=scale, durations=tuple(durations))
    return clip, spec


def synthesize_motif(
    va: VAPoint,
    key: int,
    seed: int,
    invert_valence_mode: bool = False,
) -> tuple[Clip, MusicalFeatures, MotifSpec]:
    """Full chain from a VA point to a labeled one-bar motif clip."""
    rng = random.Random(seed)
    features = va_to_features(va, rng, invert_valence_mode=invert_valence_mode)
    clip, spec = features_to_motif(features, key, rng)
    return clip, features, spec


_NOTE_NAMES = {"c": 0, "d": 2, "e": 4, "f": 5, "g": 7, "a": 9, "b": 11}


def parse_key(name: str) -> int:
    """Turn a note name like C4, F#3, or Eb5 into a MIDI number (C4 = 60)."""
    m = re.fullmatch(r"([a-gA-G])([#b]?)(-?\d+)", name.strip())
    if not m:
        raise ValidationError(f"cannot parse key {name!r}; expected e.g. C4 or F#3")
    pc = _NOTE_NAMES[m.group(1).lower()]
    if m.group(2) == "#":
        pc += 1
    elif m.group(2) == "b":
        pc -= 1
    midi = (int(m.group(3)) + 1) * 12 + pc
    if not 0 <= midi <= 127:
        raise ValidationError(f"key {name!r} is outside the MIDI range")
    return midi
