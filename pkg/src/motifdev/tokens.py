"""Event tokenization: bar/position/pitch/duration tokens plus label tokens.

A clip becomes a flat token stream. Motif regions are wrapped in
motif_start/motif_end tokens; variant regions additionally get a type
token immediately before motif_start. Encoding and decoding are exact
inverses on quantized clips whose labels are content-aligned (label start
at the first covered note's onset, label end at the last covered note's
end).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .core import (
    CHORD_QUALITIES,
    TICKS_PER_BAR,
    ChordEvent,
    Clip,
    DecodeError,
    EncodeError,
    MotifLabel,
    NoteEvent,
    ValidationError,
    VariantLabel,
    monophonic,
)

PAD = "pad"
BOS = "bos"
EOS = "eos"
BAR = "bar"
POSITION = "position"
PITCH = "pitch"
DURATION = "duration"
CHORD = "chord"
MOTIF_START = "motif_start"
MOTIF_END = "motif_end"
TYPE = "type"

MAX_POSITION = TICKS_PER_BAR
MAX_DURATION = 2 * TICKS_PER_BAR
DEFAULT_MAX_LEN = 1024

VOCAB_VERSION = 1


@dataclass(frozen=True)
class Token:
    """One vocabulary symbol; ``value`` disambiguates parameterized kinds."""

    kind: str
    value: int | tuple[int, str] | None = None

    def __post_init__(self):
        if self.kind == POSITION and not 1 <= self.value <= MAX_POSITION:
            raise ValidationError(f"position {self.value} outside [1, {MAX_POSITION}]")
        if self.kind == PITCH and not 0 <= self.value <= 127:
            raise ValidationError(f"pitch {self.value} outside [0, 127]")
        if self.kind == DURATION and not 1 <= self.value <= MAX_DURATION:
            raise ValidationError(f"duration {self.value} outside [1, {MAX_DURATION}]")
        if self.kind == TYPE and not 1 <= self.value <= 5:
            raise ValidationError(f"variant type {self.value} outside [1, 5]")

    def __repr__(self):  # Position(3), Pitch(60), Bar, ...
        name = self.kind.title().replace("_", "")
        if self.value is None:
            return name
        if isinstance(self.value, tuple):
            return f"{name}{self.value!r}"
        return f"{name}({self.value})"


def bar() -> Token:
    return Token(BAR)


def position(p: int) -> Token:
    return Token(POSITION, p)


def pitch(p: int) -> Token:
    return Token(PITCH, p)


def duration(d: int) -> Token:
    return Token(DURATION, d)


def chord(root: int, quality: str) -> Token:
    return Token(CHORD, (root, quality))


def type_token(j: int) -> Token:
    return Token(TYPE, j)


BOS_TOKEN = Token(BOS)
EOS_TOKEN = Token(EOS)
PAD_TOKEN = Token(PAD)
MOTIF_START_TOKEN = Token(MOTIF_START)
MOTIF_END_TOKEN = Token(MOTIF_END)


class Vocabulary:
    """Bijective token <-> integer index mapping, serializable as text."""

    def __init__(self, include_chords: bool = True):
        self.include_chords = include_chords
        tokens: list[Token] = [PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, Token(BAR)]
        tokens += [position(p) for p in range(1, MAX_POSITION + 1)]
        tokens += [pitch(p) for p in range(128)]
        tokens += [duration(d) for d in range(1, MAX_DURATION + 1)]
        tokens += [MOTIF_START_TOKEN, MOTIF_END_TOKEN]
        tokens += [type_token(j) for j in range(1, 6)]
        if include_chords:
            for quality in CHORD_QUALITIES:
                tokens += [chord(root, quality) for root in range(12)]
        self._tokens = tokens
        self._index = {tok: i for i, tok in enumerate(tokens)}
        if len(self._index) != len(tokens):
            raise ValidationError("vocabulary contains duplicate tokens")

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: Token) -> bool:
        return token in self._index

    def index(self, token: Token) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise EncodeError(f"token {token!r} not in vocabulary") from None

    def token(self, index: int) -> Token:
        if not 0 <= index < len(self._tokens):
            raise DecodeError(f"index {index} outside vocabulary", index)
        return self._tokens[index]

    def encode_ids(self, tokens: Iterable[Token]) -> list[int]:
        return [self.index(t) for t in tokens]

    def decode_ids(self, ids: Iterable[int]) -> list[Token]:
        return [self.token(i) for i in ids]

    @property
    def pad_id(self) -> int:
        return self._index[PAD_TOKEN]

    @property
    def bos_id(self) -> int:
        return self._index[BOS_TOKEN]

    @property
    def eos_id(self) -> int:
        return self._index[EOS_TOKEN]

    def save(self, path) -> None:
        lines = [f"version\t{VOCAB_VERSION}\tchords={int(self.include_chords)}"]
        for i, tok in enumerate(self._tokens):
            if isinstance(tok.value, tuple):
                arg = f"{tok.value[0]}:{tok.value[1]}"
            elif tok.value is None:
                arg = ""
            else:
                arg = str(tok.value)
            lines.append(f"{i}\t{tok.kind}\t{arg}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
        header = lines[0].split("\t")
        if header[0] != "version" or int(header[1]) != VOCAB_VERSION:
            raise ValidationError(f"unsupported vocabulary header: {lines[0]!r}")
        include_chords = header[2] == "chords=1"
        vocab = cls(include_chords=include_chords)
        if len(lines) - 1 != len(vocab):
            raise ValidationError(
                f"vocabulary file has {len(lines) - 1} entries, expected {len(vocab)}"
            )
        for line in lines[1:]:
            idx_s, kind, arg = line.split("\t")
            tok = _token_from_parts(kind, arg)
            if vocab.index(tok) != int(idx_s):
                raise ValidationError(f"vocabulary entry mismatch at index {idx_s}")
        return vocab


def _token_from_parts(kind: str, arg: str) -> Token:
    if not arg:
        return Token(kind)
    if kind == CHORD:
        root, quality = arg.split(":")
        return chord(int(root), quality)
    return Token(kind, int(arg))


@dataclass(frozen=True)
class TokenSeq:
    """An ordered token stream with a length bound."""

    tokens: tuple[Token, ...]
    max_len: int | None = DEFAULT_MAX_LEN

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.max_len is not None and len(self.tokens) > self.max_len:
            raise ValidationError(
                f"sequence length {len(self.tokens)} exceeds max {self.max_len}"
            )

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]


@dataclass(frozen=True)
class _Region:
    vtype: int  # 0 = motif, 1..5 = variant
    start: int  # tick
    end: int  # tick


def _regions_of(clip: Clip) -> list[_Region]:
    regions = [_Region(0, m.start, m.end) for m in clip.motif_labels]
    regions += [_Region(v.type, v.start, v.end) for v in clip.variant_labels]
    regions.sort(key=lambda r: (r.start, r.end))
    for a, b in zip(regions, regions[1:]):
        if b.start < a.end:
            raise EncodeError(
                f"label regions [{a.start},{a.end}) and [{b.start},{b.end}) overlap; "
                "token regions cannot nest"
            )
    return regions


def encode(
    clip: Clip,
    include_chords: bool = True,
    max_len: int | None = DEFAULT_MAX_LEN,
) -> TokenSeq:
    """Tokenize a quantized clip, wrapping label regions in label tokens."""
    if not clip.is_quantized():
        raise EncodeError("encode requires a quantized clip")
    for note in clip.melody:
        if note.duration > MAX_DURATION:
            raise EncodeError(
                f"note at tick {note.start} lasts {note.duration} ticks; "
                f"max representable duration is {MAX_DURATION}"
            )

    # (tick, chord-before-note flag, payload tokens)
    events: list[tuple[int, int, list[Token]]] = []
    for note in clip.melody:
        pos = int(note.start) % TICKS_PER_BAR + 1
        events.append((int(note.start), 1, [position(pos), pitch(note.pitch), duration(int(note.duration))]))
    if include_chords:
        for ev in clip.chords:
            if ev.duration > MAX_DURATION:
                raise EncodeError(
                    f"chord at tick {ev.start} lasts {ev.duration} ticks; "
                    f"max representable duration is {MAX_DURATION}"
                )
            pos = int(ev.start) % TICKS_PER_BAR + 1
            events.append(
                (int(ev.start), 0, [position(pos), chord(ev.root, ev.quality), duration(int(ev.duration))])
            )
    events.sort(key=lambda e: (e[0], e[1]))

    regions = _regions_of(clip)
    out: list[Token] = [BOS_TOKEN]
    current_bar = -1
    open_region: _Region | None = None
    pending = list(regions)

    def close_region() -> None:
        nonlocal open_region
        out.append(MOTIF_END_TOKEN)
        open_region = None

    for tick, _, payload in events:
        if open_region is not None and tick >= open_region.end:
            close_region()
        if open_region is None and pending and pending[0].end <= tick:
            r = pending[0]
            raise EncodeError(f"label region [{r.start},{r.end}) covers no events")
        while current_bar < tick // TICKS_PER_BAR:
            current_bar += 1
            out.append(Token(BAR))
        if open_region is None and pending and pending[0].start <= tick < pending[0].end:
            region = pending.pop(0)
            if region.vtype > 0:
                out.append(type_token(region.vtype))
            out.append(MOTIF_START_TOKEN)
            open_region = region
        out.extend(payload)
    if open_region is not None:
        close_region()
    if pending:
        r = pending[0]
        raise EncodeError(f"label region [{r.start},{r.end}) covers no events")
    out.append(EOS_TOKEN)
    return TokenSeq(tuple(out), max_len=max_len)


def decode(seq: Sequence[Token], truncate_overlaps: bool = False) -> Clip:
    """Rebuild a clip from tokens.

    Inverse of :func:`encode` for content-aligned labels; velocities are
    not token-encoded, so decoded notes carry the default velocity. With
    ``truncate_overlaps`` (generation output) overlapping note tails are
    shortened instead of raising.
    """
    tokens = list(seq)
    if not tokens or tokens[0] != BOS_TOKEN:
        raise DecodeError("sequence must start with bos", 0)
    if tokens[-1] != EOS_TOKEN:
        raise DecodeError("sequence must end with eos", len(tokens) - 1)

    notes: list[NoteEvent] = []
    chords: list[ChordEvent] = []
    regions: list[tuple[int, list[int]]] = []  # (vtype, onsets), resolved after repair

    bar_idx = -1
    cursor: int | None = None
    pending_pitch: int | None = None
    pending_chord: tuple[int, str] | None = None
    pending_type: int | None = None
    region_type: int | None = None  # None = outside, 0 = motif, 1..5 variant
    region_onsets: list[int] = []

    def close_region(i: int) -> None:
        nonlocal region_type
        if not region_onsets:
            raise DecodeError("label region contains no notes", i)
        regions.append((region_type, list(region_onsets)))
        region_type = None
        region_onsets.clear()

    for i, tok in enumerate(tokens[1:-1], start=1):
        if pending_pitch is not None and tok.kind != DURATION:
            raise DecodeError("pitch token not followed by duration", i)
        if pending_chord is not None and tok.kind != DURATION:
            raise DecodeError("chord token not followed by duration", i)
        if pending_type is not None and tok.kind != MOTIF_START:
            raise DecodeError("type token not followed by motif_start", i)
        if tok.kind == BAR:
            bar_idx += 1
            cursor = None
        elif tok.kind == POSITION:
            if bar_idx < 0:
                raise DecodeError("position before any bar token", i)
            cursor = bar_idx * TICKS_PER_BAR + tok.value - 1
        elif tok.kind == PITCH:
            if cursor is None:
                raise DecodeError("pitch without a preceding position", i)
            pending_pitch = tok.value
        elif tok.kind == DURATION:
            if pending_pitch is not None:
                note = NoteEvent(start=cursor, duration=tok.value, pitch=pending_pitch)
                notes.append(note)
                if region_type is not None:
                    region_onsets.append(int(note.start))
                pending_pitch = None
            elif pending_chord is not None:
                root, quality = pending_chord
                chords.append(ChordEvent(start=cursor, duration=tok.value, root=root, quality=quality))
                pending_chord = None
            else:
                raise DecodeError("duration without a preceding pitch or chord", i)
        elif tok.kind == CHORD:
            if cursor is None:
                raise DecodeError("chord without a preceding position", i)
            pending_chord = tok.value
        elif tok.kind == TYPE:
            if region_type is not None:
                raise DecodeError("type token inside an open region", i)
            pending_type = tok.value
        elif tok.kind == MOTIF_START:
            if region_type is not None:
                raise DecodeError("nested motif_start", i)
            region_type = pending_type if pending_type is not None else 0
            pending_type = None
        elif tok.kind == MOTIF_END:
            if region_type is None:
                raise DecodeError("motif_end without open region", i)
            close_region(i)
        elif tok.kind in (BOS, EOS, PAD):
            raise DecodeError(f"unexpected {tok.kind} token mid-sequence", i)
        else:
            raise DecodeError(f"unknown token kind {tok.kind!r}", i)

    last = len(tokens) - 1
    if pending_pitch is not None:
        raise DecodeError("pitch token not followed by duration", last)
    if pending_chord is not None:
        raise DecodeError("chord token not followed by duration", last)
    if pending_type is not None:
        raise DecodeError("type token not followed by motif_start", last)
    if region_type is not None:
        raise DecodeError("motif_start never closed by motif_end", last)

    if truncate_overlaps:
        melody = monophonic(notes, drop_collisions=True)
    else:
        try:
            melody = monophonic(notes)
        except ValidationError as exc:
            raise DecodeError(f"decoded melody is not monophonic: {exc}") from exc

    # resolve label bounds against the repaired melody
    motif_labels: list[MotifLabel] = []
    variant_labels: list[VariantLabel] = []
    for vtype, onsets in regions:
        covered = [n for n in melody if onsets[0] <= n.start <= onsets[-1]]
        if not covered:
            raise DecodeError("label region lost all notes")
        start = int(covered[0].start)
        end = int(covered[-1].end)
        if vtype == 0:
            if len(covered) < 2:
                raise DecodeError("motif region covers fewer than 2 notes")
            motif_labels.append(MotifLabel(start, end, note_count=len(covered)))
        else:
            variant_labels.append(VariantLabel(vtype, start, end))
    motif_labels.sort(key=lambda m: m.start)
    variant_labels.sort(key=lambda v: (v.start, v.type))
    return Clip(
        melody=melody,
        chords=tuple(sorted(chords)),
        motif_labels=tuple(motif_labels),
        variant_labels=tuple(variant_labels),
    )


def labels_are_content_aligned(clip: Clip) -> bool:
    """True when every label starts at its first note's onset and ends at
    its last note's end, the precondition for exact token round trips."""
    spans = [(m.start, m.end, 2) for m in clip.motif_labels]
    spans += [(v.start, v.end, 1) for v in clip.variant_labels]
    for start, end, min_notes in spans:
        covered = clip.notes_in(start, end)
        if len(covered) < min_notes:
            return False
        if covered[0].start != start or covered[-1].end != end:
            return False
    return True


def split_at_bars(seq: TokenSeq, max_len: int) -> list[TokenSeq]:
    """Split a long sequence into bos/eos-framed pieces at bar boundaries.

    Never splits inside a label region. Raises if a single bar-aligned
    piece cannot fit the budget.
    """
    tokens = list(seq.tokens)
    if len(tokens) <= max_len:
        return [TokenSeq(tuple(tokens), max_len=max_len)]
    body = tokens[1:-1]

    # bar-start indices in body that are outside regions
    cut_points: list[int] = []
    depth = 0
    for i, tok in enumerate(body):
        if tok.kind == MOTIF_START:
            depth += 1
        elif tok.kind == MOTIF_END:
            depth -= 1
        elif tok.kind == BAR and depth == 0:
            # a Type token directly before a bar belongs to the next piece
            cut_points.append(i)

    pieces: list[TokenSeq] = []
    start = 0
    budget = max_len - 2  # room for bos/eos
    while start < len(body):
        if len(body) - start <= budget:
            end = len(body)
        else:
            candidates = [c for c in cut_points if start < c <= start + budget]
            if not candidates:
                raise EncodeError(
                    f"cannot split: no bar boundary within {budget} tokens of index {start}"
                )
            end = candidates[-1]
        pieces.append(TokenSeq((BOS_TOKEN, *body[start:end], EOS_TOKEN), max_len=max_len))
        start = end
    return pieces


def region_fragments(seq: Sequence[Token]) -> list[tuple[int, list[Token]]]:
    """Extract (variant type, inner event tokens) for every label region.

    Type 0 is the motif. Label tokens themselves are stripped; everything
    between motif_start and motif_end is kept verbatim.
    """
    fragments: list[tuple[int, list[Token]]] = []
    pending_type = 0
    current: list[Token] | None = None
    for tok in seq:
        if tok.kind == TYPE:
            pending_type = tok.value
        elif tok.kind == MOTIF_START:
            current = []
        elif tok.kind == MOTIF_END:
            fragments.append((pending_type, current or []))
            pending_type = 0
            current = None
        elif current is not None:
            current.append(tok)
    return fragments


def clip_fragment(clip: Clip, start: int, end: int) -> list[Token]:
    """Tokenize the events of one tick span as a bare fragment.

    Positions are bar-relative as in the full encoding; bar tokens appear
    only at interior bar boundaries.
    """
    out: list[Token] = []
    current_bar = int(start) // TICKS_PER_BAR
    for note in clip.notes_in(start, end):
        while int(note.start) // TICKS_PER_BAR > current_bar:
            current_bar += 1
            out.append(Token(BAR))
        pos = int(note.start) % TICKS_PER_BAR + 1
        out += [position(pos), pitch(note.pitch), duration(int(note.duration))]
    return out
