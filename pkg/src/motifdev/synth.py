"""Synthetic labeled corpora built from deterministic motif transforms.

Each transform realizes one variant semantics exactly, so the generated
clips double as ground truth for the labeler and as desk-scale training
material:

* copy: identical restatement (type 1)
* transpose: constant nonzero pitch shift, rhythm kept (type 2)
* perturb_contour: same rhythm, 20-60% of interval directions kept (type 3)
* expand: one note split in two at the same pitch / compress: a repeated
  note removed and absorbed (type 4)
* invert: contour mirrored around the first pitch (type 5)
"""

from __future__ import annotations

import math
import random

from .core import (
    TICKS_PER_BAR,
    Clip,
    MotifLabel,
    NoteEvent,
    ValidationError,
    VariantLabel,
)
from .labeling import TREND_DOWN, TREND_FLAT, TREND_UP, pitch_trend

# (start, duration, pitch) triples relative to a bar start
Notes = tuple[tuple[int, int, int], ...]

TRANSFORM_TYPES = {
    "copy": 1,
    "transpose": 2,
    "perturb_contour": 3,
    "expand": 4,
    "compress": 4,
    "invert": 5,
}


def make_motif(
    rng: random.Random,
    n_notes: int | None = None,
    distinct_adjacent: bool = False,
    with_repeat: bool = False,
    pitch_center: int = 67,
    pitch_spread: int = 12,
) -> Notes:
    """Random one-bar motif as relative note triples.

    ``distinct_adjacent`` forbids repeated adjacent pitches (inversion
    cases need every trend nonzero); ``with_repeat`` forces at least one
    adjacent repeat (compression cases need one to remove).
    """
    if distinct_adjacent and with_repeat:
        raise ValidationError("distinct_adjacent and with_repeat are mutually exclusive")
    n = n_notes if n_notes is not None else rng.randint(3, 8)
    if n < 2 or n > TICKS_PER_BAR:
        raise ValidationError(f"motif note count {n} outside [2, {TICKS_PER_BAR}]")

    # random composition of the bar into n durations >= 1
    cuts = sorted(rng.sample(range(1, TICKS_PER_BAR), n - 1))
    bounds = [0, *cuts, TICKS_PER_BAR]
    durations = [b - a for a, b in zip(bounds, bounds[1:])]

    lo, hi = pitch_center - pitch_spread, pitch_center + pitch_spread
    pitches = [rng.randint(lo, hi)]
    for _ in range(n - 1):
        if distinct_adjacent:
            nxt = pitches[-1]
            while nxt == pitches[-1]:
                nxt = rng.randint(lo, hi)
        else:
            nxt = rng.randint(lo, hi)
        pitches.append(nxt)
    if with_repeat:
        i = rng.randrange(n - 1)
        pitches[i + 1] = pitches[i]

    starts = [0]
    for d in durations[:-1]:
        starts.append(starts[-1] + d)
    return tuple(zip(starts, durations, pitches))


def copy_notes(notes: Notes) -> Notes:
    return tuple(notes)


def transpose(notes: Notes, shift: int) -> Notes:
    if shift == 0:
        raise ValidationError("transposition shift must be nonzero")
    out = tuple((s, d, p + shift) for s, d, p in notes)
    if any(not 0 <= p <= 127 for _, _, p in out):
        raise ValidationError(f"transposition by {shift} leaves pitches outside MIDI range")
    return out


def invert(notes: Notes) -> Notes:
    """Mirror every pitch around the first one, flipping the whole contour."""
    axis = notes[0][2]
    out = tuple((s, d, 2 * axis - p) for s, d, p in notes)
    if any(not 0 <= p <= 127 for _, _, p in out):
        raise ValidationError("inversion leaves pitches outside MIDI range")
    return out


def expand(notes: Notes, rng: random.Random) -> Notes:
    """Split one note (duration >= 2) into two at the same pitch.

    Adds an onset while keeping every original onset and inserting a flat
    step into the trend, so the motif stays an ordered subsequence.
    """
    candidates = [i for i, (_, d, _) in enumerate(notes) if d >= 2]
    if not candidates:
        raise ValidationError("expansion needs a note of at least 2 ticks")
    i = rng.choice(candidates)
    s, d, p = notes[i]
    first = (s, d // 2, p)
    second = (s + d // 2, d - d // 2, p)
    return tuple(notes[:i]) + (first, second) + tuple(notes[i + 1 :])


def compress(notes: Notes, rng: random.Random) -> Notes:
    """Remove the second note of a repeated-pitch pair, extending the first."""
    candidates = [i for i in range(len(notes) - 1) if notes[i][2] == notes[i + 1][2]]
    if not candidates:
        raise ValidationError("compression needs an adjacent repeated pitch")
    if len(notes) <= 2:
        raise ValidationError("compression needs at least 3 notes")
    i = rng.choice(candidates)
    s, d, p = notes[i]
    merged = (s, d + notes[i + 1][1], p)
    return tuple(notes[:i]) + (merged,) + tuple(notes[i + 2 :])


def perturb_contour(notes: Notes, rng: random.Random) -> Notes:
    """Rebuild pitches so 20-60% of interval directions survive.

    Keeps the rhythm; the kept/changed trend positions are chosen at
    random and pitches are re-realized step by step from the first note.
    """
    n = len(notes)
    if n < 3:
        raise ValidationError("contour perturbation needs >= 3 notes for a mid band")
    old_trend = pitch_trend([p for _, _, p in notes])
    t = len(old_trend)
    lo = math.ceil(0.2 * t)
    hi = math.ceil(0.6 * t) - 1  # highest count still below 0.6
    keep = max(lo, min(hi, round(0.4 * t)))
    kept_positions = set(rng.sample(range(t), keep))

    new_trend = []
    for i, s in enumerate(old_trend):
        if i in kept_positions:
            new_trend.append(s)
        else:
            new_trend.append(rng.choice([x for x in (TREND_UP, TREND_FLAT, TREND_DOWN) if x != s]))

    pitches = [notes[0][2]]
    for s in new_trend:
        step = rng.randint(1, 3) * s
        pitches.append(pitches[-1] + step)
    if any(not 0 <= p <= 127 for p in pitches):
        raise ValidationError("contour perturbation left pitches outside MIDI range")
    return tuple((s, d, p) for (s, d, _), p in zip(notes, pitches))


def apply_transform(name: str, notes: Notes, rng: random.Random) -> Notes:
    if name == "copy":
        return copy_notes(notes)
    if name == "transpose":
        shift = rng.choice([-5, -4, -3, -2, 2, 3, 4, 5])
        return transpose(notes, shift)
    if name == "invert":
        return invert(notes)
    if name == "expand":
        return expand(notes, rng)
    if name == "compress":
        return compress(notes, rng)
    if name == "perturb_contour":
        return perturb_contour(notes, rng)
    raise ValidationError(f"unknown transform {name!r}")


def motif_constraints(name: str) -> dict:
    """make_motif keyword arguments a transform needs to be well defined."""
    if name == "invert":
        return {"distinct_adjacent": True, "pitch_spread": 8}
    if name == "compress":
        return {"with_repeat": True}
    if name == "perturb_contour":
        return {"n_notes": None, "pitch_spread": 8}
    return {}


def _shift_notes(notes: Notes, offset: int) -> tuple[NoteEvent, ...]:
    return tuple(NoteEvent(start=s + offset, duration=d, pitch=p) for s, d, p in notes)


def pair_clip(motif: Notes, variant: Notes, variant_type: int, gap_bars: int = 0) -> Clip:
    """Two-region clip: the motif in bar one, the variant after a gap."""
    v_start = (1 + gap_bars) * TICKS_PER_BAR
    melody = _shift_notes(motif, 0) + _shift_notes(variant, v_start)
    return Clip(
        melody=melody,
        motif_labels=(MotifLabel(0, TICKS_PER_BAR, note_count=len(motif)),),
        variant_labels=(VariantLabel(variant_type, v_start, v_start + TICKS_PER_BAR),),
    )


def phrase_clip(rng: random.Random, n_variants: int = 3, filler: bool = True) -> Clip:
    """Motif plus several transformed bars, optionally separated by filler.

    Used for phrase-model training data; labels come from construction,
    not from the labeler.
    """
    weights = {"copy": 0.25, "transpose": 0.2, "perturb_contour": 0.1, "expand": 0.35, "invert": 0.1}
    names = list(weights)
    # distinct adjacent pitches keep inversion well defined; compression
    # needs a repeated pair instead, so phrase clips realize type 4 via
    # expansion only
    motif = make_motif(rng, n_notes=rng.randint(4, 6), distinct_adjacent=True, pitch_spread=8)

    bars: list[tuple[str | None, Notes]] = [("motif", motif)]
    for _ in range(n_variants):
        name = rng.choices(names, weights=[weights[n] for n in names])[0]
        variant = apply_transform(name, motif, rng)
        if filler and rng.random() < 0.3:
            bars.append((None, make_motif(rng, n_notes=rng.randint(2, 5))))
        bars.append((name, variant))

    melody: list[NoteEvent] = []
    motif_labels: list[MotifLabel] = []
    variant_labels: list[VariantLabel] = []
    for bar_idx, (name, notes) in enumerate(bars):
        offset = bar_idx * TICKS_PER_BAR
        melody.extend(_shift_notes(notes, offset))
        if name == "motif":
            motif_labels.append(MotifLabel(offset, offset + TICKS_PER_BAR, note_count=len(notes)))
        elif name is not None:
            variant_labels.append(
                VariantLabel(TRANSFORM_TYPES[name], offset, offset + TICKS_PER_BAR)
            )
    return Clip(
        melody=tuple(melody),
        motif_labels=tuple(motif_labels),
        variant_labels=tuple(variant_labels),
    )


def generate_corpus(seed: int, n_clips: int, n_variants: int = 3, filler: bool = True) -> list[Clip]:
    """Deterministic corpus of phrase clips."""
    rng = random.Random(seed)
    return [phrase_clip(rng, n_variants=n_variants, filler=filler) for _ in range(n_clips)]


def transform_cases(
    name: str, seed: int, count: int, gap_bars: int = 0
) -> list[tuple[Clip, int]]:
    """Labeled single-transform pair clips plus their expected type."""
    rng = random.Random(seed)
    expected = TRANSFORM_TYPES[name]
    cases = []
    for _ in range(count):
        motif = make_motif(rng, **motif_constraints(name))
        variant = apply_transform(name, motif, rng)
        cases.append((pair_clip(motif, variant, expected, gap_bars=gap_bars), expected))
    return cases
