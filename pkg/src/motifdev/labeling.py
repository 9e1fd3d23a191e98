"""Motif repetition detection and variant classification.

A candidate window slides across the clip starting at the motif's end, one
bar at a time. A window whose relative note start times equal the motif's
is classified by two positional ratios:

* pitch match ratio: fraction of positions with identical pitch
* trend match ratio: fraction of positions whose interval direction
  (+1/0/-1 toward the next note) matches

Thresholds (inclusive at 0.6 and 0.2, computed in exact integer
arithmetic): trend >= 0.6 and pitch >= 0.6 gives type 1 (repetition);
trend >= 0.6 alone type 2 (progression); trend in [0.2, 0.6) type 3
(transformation); below 0.2 type 5 (inversion). A window whose start-time
list is a proper ordered sub- or supersequence of the motif's, with the
matching trend containment, is type 4 (expansion/compression) instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import (
    TICKS_PER_BAR,
    Clip,
    MotifLabel,
    NoteEvent,
    ValidationError,
    VariantLabel,
)

TREND_UP = 1
TREND_FLAT = 0
TREND_DOWN = -1


@dataclass(frozen=True)
class MatchRatios:
    """Positional pitch and trend match fractions, both in [0, 1]."""

    pmr: float
    tmr: float


@dataclass(frozen=True)
class WindowView:
    """Note content of one candidate window, relative to its start."""

    win_start: int
    win_len: int
    st: tuple[int, ...]
    pitches: tuple[int, ...]
    trend: tuple[int, ...]

    @classmethod
    def of(cls, clip: Clip, win_start: int, win_len: int) -> "WindowView":
        notes = clip.notes_in(win_start, win_start + win_len)
        st = tuple(int(n.start) - win_start for n in notes)
        pitches = tuple(n.pitch for n in notes)
        trend = pitch_trend(pitches) if len(pitches) >= 2 else ()
        return cls(win_start=win_start, win_len=win_len, st=st, pitches=pitches, trend=trend)


def pitch_trend(pitches: Sequence[int]) -> tuple[int, ...]:
    """Direction of each interval to the next note: +1, 0, or -1."""
    if len(pitches) < 2:
        raise ValidationError(f"pitch trend needs >= 2 pitches, got {len(pitches)}")
    out = []
    for a, b in zip(pitches, pitches[1:]):
        out.append(TREND_UP if b > a else TREND_DOWN if b < a else TREND_FLAT)
    return tuple(out)


def match_ratios(motif_pitches: Sequence[int], window: WindowView) -> MatchRatios:
    """Positional match fractions between a motif and an equal-rhythm window."""
    if len(motif_pitches) != len(window.pitches):
        raise ValidationError(
            f"match ratios need equal note counts: motif {len(motif_pitches)}, "
            f"window {len(window.pitches)}"
        )
    motif_trend = pitch_trend(motif_pitches)
    pmr = _match_count(motif_pitches, window.pitches) / len(motif_pitches)
    tmr = _match_count(motif_trend, window.trend) / len(motif_trend)
    return MatchRatios(pmr=pmr, tmr=tmr)


def _match_count(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(1 for x, y in zip(a, b) if x == y)


def is_subsequence(a: Sequence[int], b: Sequence[int]) -> bool:
    """True when ``a`` occurs in ``b`` as an ordered (not contiguous) subsequence."""
    it = iter(b)
    return all(any(x == y for y in it) for x in a)


def _is_proper_subsequence(a: Sequence[int], b: Sequence[int]) -> bool:
    return len(a) < len(b) and is_subsequence(a, b)


def _motif_notes(clip: Clip, motif: MotifLabel) -> tuple[NoteEvent, ...]:
    notes = clip.notes_in(motif.start, motif.end)
    if len(notes) < 2:
        raise ValidationError(f"motif at [{motif.start},{motif.end}) covers fewer than 2 notes")
    return notes


def detect_repetitions(clip: Clip, motif: MotifLabel) -> list[MotifLabel]:
    """Find every exact restatement of the motif anywhere in the clip.

    A region matches when its relative start times, durations, and pitches
    all equal the motif's. The motif's own position is excluded.
    """
    motif_notes = _motif_notes(clip, motif)
    signature = tuple(
        (int(n.start) - motif.start, int(n.duration), n.pitch) for n in motif_notes
    )
    length = motif.length
    end_time = int(clip.end_tick)
    found = []
    for offset in range(0, end_time - length + 1):
        if offset == motif.start:
            continue
        candidate = tuple(
            (int(n.start) - offset, int(n.duration), n.pitch)
            for n in clip.notes_in(offset, offset + length)
        )
        if candidate == signature:
            found.append(MotifLabel(offset, offset + length, note_count=len(signature)))
    return found


def classify_window(
    motif_st: Sequence[int],
    motif_pitches: Sequence[int],
    motif_trend: Sequence[int],
    window: WindowView,
) -> int | None:
    """Variant type for one window, or None when it matches no rule.

    Threshold comparisons use integer cross-multiplication so boundary
    ratios (exactly 0.6 or 0.2) behave per their inclusive bounds.
    """
    if tuple(motif_st) == window.st:
        n = len(motif_pitches)
        pitch_matches = _match_count(motif_pitches, window.pitches)
        trend_matches = _match_count(motif_trend, window.trend)
        t = len(motif_trend)
        if 5 * trend_matches >= 3 * t:  # tmr >= 0.6
            return 1 if 5 * pitch_matches >= 3 * n else 2
        if 5 * trend_matches >= t:  # 0.2 <= tmr < 0.6
            return 3
        return 5
    if _is_proper_subsequence(motif_st, window.st) and is_subsequence(motif_trend, window.trend):
        return 4
    if _is_proper_subsequence(window.st, motif_st) and is_subsequence(window.trend, motif_trend):
        return 4
    return None


def label_variants(
    clip: Clip,
    motif: MotifLabel,
    step: int = TICKS_PER_BAR,
) -> list[VariantLabel]:
    """Scan the clip after the motif and label every variant window.

    The window length equals the motif length and the scan advances by
    ``step`` ticks (one bar by default, half a bar optionally). Windows
    overlapping an already-labeled variant are skipped, as are windows
    with fewer than two notes.
    """
    if step not in (TICKS_PER_BAR, TICKS_PER_BAR // 2):
        raise ValidationError(f"step must be a bar ({TICKS_PER_BAR}) or half bar, got {step}")
    motif_notes = _motif_notes(clip, motif)
    motif_st = tuple(int(n.start) - motif.start for n in motif_notes)
    motif_pitches = tuple(n.pitch for n in motif_notes)
    motif_trend = pitch_trend(motif_pitches)

    win_len = motif.length
    end_time = int(clip.end_tick)
    labels: list[VariantLabel] = []

    win_start = motif.end
    while win_start + win_len <= end_time:
        if any(v.start < win_start + win_len and win_start < v.end for v in labels):
            win_start += step
            continue
        window = WindowView.of(clip, win_start, win_len)
        if len(window.pitches) >= 2:
            vtype = classify_window(motif_st, motif_pitches, motif_trend, window)
            if vtype is not None:
                labels.append(VariantLabel(vtype, win_start, win_start + win_len))
        win_start += step
    return labels


def label_clip(clip: Clip, step: int = TICKS_PER_BAR) -> Clip:
    """Run variant labeling for every motif label and attach the results."""
    variants: list[VariantLabel] = []
    for motif in clip.motif_labels:
        variants.extend(label_variants(clip, motif, step=step))
    variants.sort(key=lambda v: (v.start, v.type))
    return clip.with_labels(variant_labels=variants)


STRONG_BEAT_TICKS = (0, 8)  # beats one and three of a 4/4 bar


def motif_criteria_violations(
    clip: Clip,
    motif: MotifLabel,
    variants: Sequence[VariantLabel] | None = None,
) -> list[str]:
    """Heuristic checks on a motif annotation, as human labelers apply them.

    Returns human-readable violation strings: too few notes, a span beyond
    two bars, no note on a strong beat, and (when the variants are known)
    no later development. Empty list means the label looks sound.
    """
    problems = []
    notes = clip.notes_in(motif.start, motif.end)
    if len(notes) < 2:
        problems.append(f"covers {len(notes)} notes, needs at least 2")
    if motif.length > 2 * TICKS_PER_BAR:
        problems.append(f"spans {motif.length} ticks, more than two bars")
    if not any(int(n.start) % TICKS_PER_BAR in STRONG_BEAT_TICKS for n in notes):
        problems.append("no note on a strong beat")
    if variants is not None and not any(v.start >= motif.end for v in variants):
        problems.append("no development after the motif")
    return problems
