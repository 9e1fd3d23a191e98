"""Standard MIDI File reader/writer for the clip data model.

Reads format 0/1, writes format 1. Track names carry the corpus
convention: "melody", "chord", "motif", and "variant_1".."variant_5".
Label tracks encode each motif/variant region as a single note spanning
[start, end), which keeps annotations round-trippable in plain MIDI.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass

from .core import (
    CHORD_QUALITIES,
    _INTERVALS_TO_QUALITY,
    TICKS_PER_BEAT,
    ChordEvent,
    Clip,
    MidiParseError,
    MotifLabel,
    NoteEvent,
    ValidationError,
    VariantLabel,
    monophonic,
    quantize_clip,
)

WRITE_DIVISION = 480  # pulses per quarter note in files we emit
DEFAULT_TEMPO_US = 500_000  # 120 bpm

LABEL_NOTE_PITCH = 60
LABEL_NOTE_VELOCITY = 100
CHORD_BASE_PITCH = 48  # chord roots are written in octave 3
CHORD_VELOCITY = 80

MELODY_TRACK = "melody"
CHORD_TRACK = "chord"
MOTIF_TRACK = "motif"
VARIANT_TRACK_PREFIX = "variant_"


@dataclass
class _RawNote:
    start: int  # in file pulses
    duration: int
    pitch: int
    velocity: int


def _read_varlen(buf: io.BytesIO) -> int:
    value = 0
    for _ in range(4):
        raw = buf.read(1)
        if not raw:
            raise MidiParseError("truncated variable-length quantity", buf.tell())
        byte = raw[0]
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value
    raise MidiParseError("variable-length quantity too long", buf.tell())


def _write_varlen(value: int) -> bytes:
    chunks = [value & 0x7F]
    value >>= 7
    while value:
        chunks.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(chunks))


def _parse_track(data: bytes, start: int) -> tuple[list[_RawNote], str | None, list[tuple[int, int]], int]:
    """Parse one MTrk chunk.

    Returns (notes, track name, time-signature events, offset after chunk).
    """
    if data[start : start + 4] != b"MTrk":
        raise MidiParseError("expected MTrk chunk", start)
    if len(data) < start + 8:
        raise MidiParseError("truncated track header", len(data))
    (length,) = struct.unpack(">I", data[start + 4 : start + 8])
    body_start = start + 8
    if len(data) < body_start + length:
        raise MidiParseError("track body shorter than declared length", len(data))
    buf = io.BytesIO(data[body_start : body_start + length])

    notes: list[_RawNote] = []
    open_notes: dict[tuple[int, int], _RawNote] = {}
    name: str | None = None
    time_sigs: list[tuple[int, int]] = []
    tick = 0
    running_status = 0

    def close(channel: int, pitch: int) -> None:
        raw = open_notes.pop((channel, pitch), None)
        if raw is not None:
            raw.duration = max(1, tick - raw.start)
            notes.append(raw)

    while buf.tell() < length:
        tick += _read_varlen(buf)
        first = buf.read(1)
        if not first:
            raise MidiParseError("truncated event", body_start + buf.tell())
        status = first[0]
        if status < 0x80:
            if running_status < 0x80:
                raise MidiParseError("data byte without running status", body_start + buf.tell())
            buf.seek(buf.tell() - 1)
            status = running_status
        if status == 0xFF:
            meta = buf.read(1)
            meta_len = _read_varlen(buf)
            payload = buf.read(meta_len)
            if len(payload) < meta_len:
                raise MidiParseError("truncated meta event", body_start + buf.tell())
            if meta == b"\x03" and name is None:
                name = payload.decode("latin-1").strip()
            elif meta == b"\x58" and len(payload) >= 2:
                time_sigs.append((payload[0], 1 << payload[1]))
            continue
        if status in (0xF0, 0xF7):
            skip = _read_varlen(buf)
            buf.read(skip)
            continue
        running_status = status
        kind = status & 0xF0
        channel = status & 0x0F
        n_data = 1 if kind in (0xC0, 0xD0) else 2
        payload = buf.read(n_data)
        if len(payload) < n_data:
            raise MidiParseError("truncated channel event", body_start + buf.tell())
        if kind == 0x90 and payload[1] > 0:
            close(channel, payload[0])  # restruck note ends the previous one
            open_notes[(channel, payload[0])] = _RawNote(tick, 0, payload[0], payload[1])
        elif kind == 0x80 or (kind == 0x90 and payload[1] == 0):
            close(channel, payload[0])
    for key in sorted(open_notes):
        close(*key)
    notes.sort(key=lambda n: (n.start, n.pitch))
    return notes, name, time_sigs, body_start + length


def _to_grid(pulses: int, division: int) -> float:
    value = pulses * TICKS_PER_BEAT / division
    return int(value) if float(value).is_integer() else value


def _chords_from_notes(notes: list[_RawNote], division: int) -> tuple[ChordEvent, ...]:
    by_onset: dict[int, list[_RawNote]] = {}
    for note in notes:
        by_onset.setdefault(note.start, []).append(note)
    chords = []
    for onset, group in sorted(by_onset.items()):
        group.sort(key=lambda n: n.pitch)
        root = group[0].pitch
        intervals = tuple(n.pitch - root for n in group)
        quality = _INTERVALS_TO_QUALITY.get(intervals)
        if quality is None:
            raise ValidationError(
                f"chord track note stack {intervals} at pulse {onset} matches no known quality"
            )
        chords.append(
            ChordEvent(
                start=_to_grid(onset, division),
                duration=_to_grid(group[0].duration, division),
                root=root % 12,
                quality=quality,
            )
        )
    return tuple(chords)


def _labels_from_notes(notes: list[_RawNote], division: int) -> list[tuple[int, int]]:
    spans = []
    for note in notes:
        start = _to_grid(note.start, division)
        end = _to_grid(note.start + note.duration, division)
        spans.append((round(start), round(end)))
    return spans


def parse_midi(data: bytes, quantize: bool = True) -> Clip:
    """Decode MIDI bytes into a Clip.

    Named tracks follow the corpus convention; a single unnamed note track
    is taken as the melody. Timing is converted to the sixteenth grid and,
    unless ``quantize`` is false, snapped to integer ticks.
    """
    if len(data) < 14 or data[:4] != b"MThd":
        raise MidiParseError("not a Standard MIDI File (missing MThd)", 0)
    header_len, fmt, n_tracks, division = struct.unpack(">IHHH", data[4:14])
    if header_len != 6:
        raise MidiParseError(f"unexpected MThd length {header_len}", 4)
    if fmt not in (0, 1):
        raise MidiParseError(f"unsupported MIDI format {fmt}", 8)
    if division & 0x8000:
        raise MidiParseError("SMPTE time division not supported", 12)
    if division == 0:
        raise MidiParseError("zero time division", 12)

    offset = 14
    tracks: list[tuple[list[_RawNote], str | None]] = []
    for _ in range(n_tracks):
        if offset >= len(data):
            raise MidiParseError("file ends before declared track count", offset)
        notes, name, time_sigs, offset = _parse_track(data, offset)
        for sig in time_sigs:
            if sig != (4, 4):
                raise ValidationError(f"time signature {sig[0]}/{sig[1]} not supported; only 4/4")
        tracks.append((notes, name))

    melody_notes: list[_RawNote] | None = None
    chord_notes: list[_RawNote] = []
    motif_spans: list[tuple[int, int]] = []
    variant_spans: list[tuple[int, int, int]] = []
    unnamed: list[list[_RawNote]] = []

    for notes, name in tracks:
        if name == MELODY_TRACK:
            melody_notes = notes
        elif name == CHORD_TRACK:
            chord_notes = notes
        elif name == MOTIF_TRACK:
            motif_spans.extend(_labels_from_notes(notes, division))
        elif name is not None and name.startswith(VARIANT_TRACK_PREFIX):
            vtype = int(name[len(VARIANT_TRACK_PREFIX) :])
            variant_spans.extend((vtype, s, e) for s, e in _labels_from_notes(notes, division))
        elif notes:
            unnamed.append(notes)

    if melody_notes is None:
        if len(unnamed) == 1:
            melody_notes = unnamed[0]
        elif len(unnamed) > 1:
            raise ValidationError(
                f"{len(unnamed)} unnamed note tracks; cannot tell which is the melody"
            )
        else:
            melody_notes = []

    melody = monophonic(
        NoteEvent(
            start=_to_grid(n.start, division),
            duration=_to_grid(n.duration, division),
            pitch=n.pitch,
            velocity=n.velocity,
        )
        for n in melody_notes
    )
    chords = _chords_from_notes(chord_notes, division)

    clip = Clip(melody=melody, chords=chords)
    if quantize:
        clip = quantize_clip(clip)

    motif_labels = tuple(
        MotifLabel(start=s, end=e, note_count=len(clip.notes_in(s, e)))
        for s, e in sorted(motif_spans)
    )
    variant_labels = tuple(
        VariantLabel(type=t, start=s, end=e)
        for t, s, e in sorted(variant_spans, key=lambda v: (v[1], v[0]))
    )
    return clip.with_labels(motif_labels, variant_labels)


class _TrackWriter:
    def __init__(self, name: str | None = None):
        self.events: list[tuple[int, int, bytes]] = []  # (pulse, order, payload)
        if name is not None:
            self.meta(0, 0x03, name.encode("latin-1"))

    def meta(self, pulse: int, kind: int, payload: bytes) -> None:
        self.events.append((pulse, 0, bytes([0xFF, kind]) + _write_varlen(len(payload)) + payload))

    def note(self, pulse_on: int, pulse_off: int, pitch: int, velocity: int, channel: int = 0) -> None:
        self.events.append((pulse_on, 1, bytes([0x90 | channel, pitch, velocity])))
        self.events.append((pulse_off, 0, bytes([0x80 | channel, pitch, 0])))

    def render(self) -> bytes:
        body = bytearray()
        tick = 0
        for pulse, _, payload in sorted(self.events, key=lambda e: (e[0], e[1])):
            body += _write_varlen(pulse - tick)
            body += payload
            tick = pulse
        body += _write_varlen(0) + bytes([0xFF, 0x2F, 0x00])
        return b"MTrk" + struct.pack(">I", len(body)) + bytes(body)


def write_midi(clip: Clip, tempo_us: int = DEFAULT_TEMPO_US) -> bytes:
    """Encode a quantized clip as a format-1 MIDI file."""
    if not clip.is_quantized():
        raise ValidationError("write_midi requires a quantized clip")
    pulses_per_tick = WRITE_DIVISION // TICKS_PER_BEAT

    def pulses(tick: float) -> int:
        return int(tick) * pulses_per_tick

    meta = _TrackWriter()
    meta.meta(0, 0x58, bytes([4, 2, 24, 8]))
    meta.meta(0, 0x51, struct.pack(">I", tempo_us)[1:])
    tracks = [meta]

    melody = _TrackWriter(MELODY_TRACK)
    for note in clip.melody:
        melody.note(pulses(note.start), pulses(note.end), note.pitch, note.velocity)
    tracks.append(melody)

    if clip.chords:
        chord = _TrackWriter(CHORD_TRACK)
        for ev in clip.chords:
            for interval in CHORD_QUALITIES[ev.quality]:
                chord.note(
                    pulses(ev.start),
                    pulses(ev.end),
                    CHORD_BASE_PITCH + ev.root + interval,
                    CHORD_VELOCITY,
                    channel=1,
                )
        tracks.append(chord)

    if clip.motif_labels:
        track = _TrackWriter(MOTIF_TRACK)
        for label in clip.motif_labels:
            track.note(pulses(label.start), pulses(label.end), LABEL_NOTE_PITCH, LABEL_NOTE_VELOCITY)
        tracks.append(track)

    by_type: dict[int, list[VariantLabel]] = {}
    for label in clip.variant_labels:
        by_type.setdefault(label.type, []).append(label)
    for vtype in sorted(by_type):
        track = _TrackWriter(f"{VARIANT_TRACK_PREFIX}{vtype}")
        for label in by_type[vtype]:
            track.note(pulses(label.start), pulses(label.end), LABEL_NOTE_PITCH, LABEL_NOTE_VELOCITY)
        tracks.append(track)

    header = b"MThd" + struct.pack(">IHHH", 6, 1, len(tracks), WRITE_DIVISION)
    return header + b"".join(t.render() for t in tracks)
