"""Core symbolic-music data model: notes, chords, clips, and labels.

Everything lives on a sixteenth-note grid (4 ticks per beat, 16 ticks per
4/4 bar). Clips and labels are immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

TICKS_PER_BEAT = 4
TICKS_PER_BAR = 16
MAX_MOTIF_TICKS = 2 * TICKS_PER_BAR

DEFAULT_VELOCITY = 100

# Chord qualities the chord track can represent, as semitone offsets from
# the root. Stored in MIDI as stacked notes, so the mapping must be
# injective on interval sets.
CHORD_QUALITIES: dict[str, tuple[int, ...]] = {
    "maj": (0, 4, 7),
    "min": (0, 3, 7),
    "dim": (0, 3, 6),
    "aug": (0, 4, 8),
    "sus2": (0, 2, 7),
    "sus4": (0, 5, 7),
    "maj7": (0, 4, 7, 11),
    "min7": (0, 3, 7, 10),
    "dom7": (0, 4, 7, 10),
}
_INTERVALS_TO_QUALITY = {v: k for k, v in CHORD_QUALITIES.items()}


class MotifdevError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(MotifdevError):
    """A clip, label, or token sequence violates a structural invariant."""


class MidiParseError(MotifdevError):
    """Malformed MIDI input; carries the byte offset where parsing failed."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)


class EncodeError(MotifdevError):
    """A clip cannot be represented in the token vocabulary."""


class DecodeError(MotifdevError):
    """A token sequence cannot be decoded; carries the offending index."""

    def __init__(self, message: str, index: int | None = None):
        self.index = index
        if index is not None:
            message = f"{message} (token index {index})"
        super().__init__(message)


class MetricsError(MotifdevError):
    """A corpus metric is undefined for the given input."""


@dataclass(frozen=True, order=True)
class NoteEvent:
    """A single melody note. Times are in sixteenth-note ticks.

    ``start`` and ``duration`` may be fractional before quantization;
    after :func:`quantize_clip` they are exact integers.
    """

    start: float
    duration: float
    pitch: int
    velocity: int = DEFAULT_VELOCITY

    def __post_init__(self):
        if self.start < 0:
            raise ValidationError(f"note start {self.start} < 0")
        if self.duration <= 0:
            raise ValidationError(f"note duration {self.duration} <= 0")
        if not 0 <= self.pitch <= 127:
            raise ValidationError(f"pitch {self.pitch} outside [0, 127]")
        if not 1 <= self.velocity <= 127:
            raise ValidationError(f"velocity {self.velocity} outside [1, 127]")

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass(frozen=True, order=True)
class ChordEvent:
    """A chord-track event: pitch-class root plus a named quality."""

    start: float
    duration: float
    root: int
    quality: str

    def __post_init__(self):
        if not 0 <= self.root <= 11:
            raise ValidationError(f"chord root {self.root} outside [0, 11]")
        if self.quality not in CHORD_QUALITIES:
            raise ValidationError(f"unknown chord quality {self.quality!r}")
        if self.duration <= 0:
            raise ValidationError("chord duration must be positive")

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass(frozen=True)
class MotifLabel:
    """A time-bounded motif annotation covering at least two melody notes."""

    start: int
    end: int
    note_count: int = 2

    def __post_init__(self):
        if self.end <= self.start:
            raise ValidationError(f"motif label end {self.end} <= start {self.start}")
        if self.end - self.start > MAX_MOTIF_TICKS:
            raise ValidationError(
                f"motif label spans {self.end - self.start} ticks, max is {MAX_MOTIF_TICKS}"
            )
        if self.note_count < 2:
            raise ValidationError("motif must cover at least 2 notes")

    @property
    def length(self) -> int:
        return self.end - self.start


VARIANT_TYPES = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class VariantLabel:
    """A variant annotation: development type (1..5) plus a tick span."""

    type: int
    start: int
    end: int

    def __post_init__(self):
        if self.type not in VARIANT_TYPES:
            raise ValidationError(f"variant type {self.type} outside {{1..5}}")
        if self.end <= self.start:
            raise ValidationError(f"variant label end {self.end} <= start {self.start}")

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Clip:
    """A quantizable melody/chord segment with motif and variant labels.

    The melody must be monophonic (sorted by start, no overlap). The time
    signature is fixed at 4/4 on a sixteenth grid.
    """

    melody: tuple[NoteEvent, ...] = ()
    chords: tuple[ChordEvent, ...] = ()
    motif_labels: tuple[MotifLabel, ...] = ()
    variant_labels: tuple[VariantLabel, ...] = ()
    time_signature: tuple[int, int] = (4, 4)
    ticks_per_beat: int = TICKS_PER_BEAT

    def __post_init__(self):
        object.__setattr__(self, "melody", tuple(self.melody))
        object.__setattr__(self, "chords", tuple(self.chords))
        object.__setattr__(self, "motif_labels", tuple(self.motif_labels))
        object.__setattr__(self, "variant_labels", tuple(self.variant_labels))
        if self.time_signature != (4, 4):
            raise ValidationError(
                f"time signature {self.time_signature} not supported; only 4/4"
            )
        if self.ticks_per_beat != TICKS_PER_BEAT:
            raise ValidationError(f"ticks_per_beat must be {TICKS_PER_BEAT}")
        _check_monophonic(self.melody)

    @property
    def end_tick(self) -> float:
        """End of the clip's content span (notes, chords, and labels)."""
        ends: list[float] = [n.end for n in self.melody]
        ends += [c.end for c in self.chords]
        ends += [float(m.end) for m in self.motif_labels]
        ends += [float(v.end) for v in self.variant_labels]
        return max(ends, default=0.0)

    @property
    def n_bars(self) -> int:
        return math.ceil(self.end_tick / TICKS_PER_BAR)

    def notes_in(self, start: float, end: float) -> tuple[NoteEvent, ...]:
        """Melody notes whose onset lies in [start, end)."""
        return tuple(n for n in self.melody if start <= n.start < end)

    def is_quantized(self) -> bool:
        return all(
            float(n.start).is_integer() and float(n.duration).is_integer()
            for n in self.melody
        ) and all(
            float(c.start).is_integer() and float(c.duration).is_integer()
            for c in self.chords
        )

    def with_labels(
        self,
        motif_labels: Iterable[MotifLabel] | None = None,
        variant_labels: Iterable[VariantLabel] | None = None,
    ) -> "Clip":
        """Copy of this clip with labels replaced."""
        return replace(
            self,
            motif_labels=tuple(motif_labels) if motif_labels is not None else self.motif_labels,
            variant_labels=tuple(variant_labels) if variant_labels is not None else self.variant_labels,
        )


def _check_monophonic(melody: Sequence[NoteEvent]) -> None:
    for prev, cur in zip(melody, melody[1:]):
        if cur.start < prev.start:
            raise ValidationError(
                f"melody not sorted: note at {cur.start} after note at {prev.start}"
            )
        if cur.start < prev.end:
            raise ValidationError(
                f"melody not monophonic: note at {prev.start} (ends {prev.end}) "
                f"overlaps note at {cur.start}"
            )


def validate_clip(clip: Clip, require_quantized: bool = False) -> None:
    """Check label/content consistency beyond what Clip construction enforces.

    Raises ValidationError when a label lies outside the clip span, a motif
    label covers fewer notes than recorded, or (optionally) timing is not
    yet quantized.
    """
    if require_quantized and not clip.is_quantized():
        raise ValidationError("clip is not quantized to the sixteenth grid")
    content_end = max(
        [n.end for n in clip.melody] + [c.end for c in clip.chords], default=0.0
    )
    span_end = math.ceil(content_end / TICKS_PER_BAR) * TICKS_PER_BAR
    for label in clip.motif_labels:
        if label.end > span_end:
            raise ValidationError(f"motif label {label} extends past clip end {span_end}")
        covered = clip.notes_in(label.start, label.end)
        if len(covered) < 2:
            raise ValidationError(f"motif label {label} covers {len(covered)} notes, needs >= 2")
        if label.note_count != len(covered):
            raise ValidationError(
                f"motif label note_count {label.note_count} != covered notes {len(covered)}"
            )
    for label in clip.variant_labels:
        if label.end > span_end:
            raise ValidationError(f"variant label {label} extends past clip end {span_end}")


def monophonic(notes: Iterable[NoteEvent], drop_collisions: bool = False) -> tuple[NoteEvent, ...]:
    """Sort notes and truncate each note at the next onset.

    Notes sharing an onset are rejected by default: that is real polyphony,
    not the overlapping tails live MIDI produces. With ``drop_collisions``
    (used after rounding) the earlier note is truncated to nothing, i.e.
    dropped, which extends the truncation rule to zero length.
    """
    ordered = sorted(notes, key=lambda n: (n.start, n.pitch))
    out: list[NoteEvent] = []
    for note in ordered:
        if out and note.start == out[-1].start:
            if not drop_collisions:
                raise ValidationError(
                    f"polyphonic melody: notes {out[-1].pitch} and {note.pitch} "
                    f"share onset {note.start}"
                )
            out[-1] = note
            continue
        if out and out[-1].end > note.start:
            out[-1] = replace(out[-1], duration=note.start - out[-1].start)
        out.append(note)
    return tuple(out)


def quantize_clip(clip: Clip) -> Clip:
    """Snap all timing to the sixteenth grid.

    Starts and durations round to the nearest tick, durations floor at one
    tick, and monophony is re-enforced by truncating an earlier note at
    the next onset. Idempotent on already-quantized clips.
    """
    notes = []
    for n in clip.melody:
        start = round(n.start)
        duration = max(1, round(n.duration))
        notes.append(replace(n, start=start, duration=duration))
    chords = []
    for c in clip.chords:
        start = round(c.start)
        duration = max(1, round(c.duration))
        chords.append(replace(c, start=start, duration=duration))
    return replace(
        clip,
        melody=monophonic(notes, drop_collisions=True),
        chords=tuple(sorted(chords)),
    )
