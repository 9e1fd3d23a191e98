"""Region scanning and the two per-token masks driving the phrase decoder.

The region mask is 1 from motif_start through motif_end of every label
region (label tokens included) and 0 elsewhere; it gates cross- vs
self-attention. The motif/variant mask packs (region type, offset) into
one integer per token: type * 2 * motif_len + offset + 1 inside a region,
0 outside. The +1 keeps zero unambiguous for ordinary tokens, and the
type stride keeps values from different region types disjoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..core import ValidationError
from ..tokens import MOTIF_END, MOTIF_START, TYPE, Token

N_SPANS = 6  # motif plus five variant types


class MaskError(ValidationError):
    """A sequence or region violates a mask precondition."""


@dataclass(frozen=True)
class Region:
    """One label region as token indices; half-open [start, stop)."""

    vtype: int  # 0 motif, 1..5 variant
    start: int
    stop: int

    @property
    def length(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class EncoderLayout:
    """Token index ranges of the six concatenated encoder spans.

    Span 0 is the motif; spans 1..5 the per-type variants. Each span runs
    motif_start..motif_end inclusive (type tokens sit just outside).
    """

    spans: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.spans) != N_SPANS:
            raise MaskError(f"layout needs {N_SPANS} spans, got {len(self.spans)}")
        prev_stop = -1
        for j, (start, stop) in enumerate(self.spans):
            if stop <= start:
                raise MaskError(f"span {j} is empty or inverted: [{start},{stop})")
            if start <= prev_stop:
                raise MaskError(f"span {j} overlaps or reorders span {j - 1}")
            prev_stop = stop

    def span_length(self, j: int) -> int:
        start, stop = self.spans[j]
        return stop - start


def scan_regions(tokens: Sequence[Token]) -> list[Region]:
    """Locate label regions, validating well-formedness.

    Every motif_start must close with motif_end, type tokens must sit
    immediately before motif_start, and regions cannot nest.
    """
    regions: list[Region] = []
    open_start: int | None = None
    open_type = 0
    pending_type: int | None = None
    for i, tok in enumerate(tokens):
        if pending_type is not None and tok.kind != MOTIF_START:
            raise MaskError(f"type token at index {pending_type} not followed by motif_start")
        if tok.kind == TYPE:
            if open_start is not None:
                raise MaskError(f"type token inside open region at index {i}")
            pending_type = i
        elif tok.kind == MOTIF_START:
            if open_start is not None:
                raise MaskError(f"nested motif_start at index {i}")
            open_start = i
            open_type = tokens[pending_type].value if pending_type is not None else 0
            pending_type = None
        elif tok.kind == MOTIF_END:
            if open_start is None:
                raise MaskError(f"motif_end without open region at index {i}")
            regions.append(Region(vtype=open_type, start=open_start, stop=i + 1))
            open_start = None
    if open_start is not None:
        raise MaskError(f"motif_start at index {open_start} never closed")
    if pending_type is not None:
        raise MaskError(f"dangling type token at index {pending_type}")
    return regions


def build_region_mask(tokens: Sequence[Token]) -> list[int]:
    """Per-token gate bits: 1 inside label regions, 0 elsewhere."""
    mask = [0] * len(tokens)
    for region in scan_regions(tokens):
        for i in range(region.start, region.stop):
            mask[i] = 1
    return mask


def build_mv_mask(tokens: Sequence[Token], motif_len: int) -> list[int]:
    """Per-token (type, offset) codes; see module docstring for the packing.

    Every region must be shorter than 2 * motif_len tokens so offsets of
    different types cannot collide.
    """
    if motif_len < 1:
        raise MaskError(f"motif token length must be >= 1, got {motif_len}")
    limit = 2 * motif_len
    mask = [0] * len(tokens)
    for region in scan_regions(tokens):
        if region.length > limit - 1:
            raise MaskError(
                f"region of type {region.vtype} at token {region.start} has "
                f"{region.length} tokens; limit is {limit - 1} for motif length {motif_len}"
            )
        for k, i in enumerate(range(region.start, region.stop)):
            mask[i] = region.vtype * limit + k + 1
    return mask


def decode_mv_value(value: int, motif_len: int) -> tuple[int, int] | None:
    """Invert the mask packing to (region type, offset); None outside."""
    if value == 0:
        return None
    return divmod(value - 1, 2 * motif_len)


def layout_of_spans(span_lengths: Sequence[int], type_token_before: Sequence[bool]) -> EncoderLayout:
    """Build a layout from wrapped span lengths laid out back to back.

    ``type_token_before[j]`` marks spans preceded by a type token, which
    occupies an index outside the span itself.
    """
    spans = []
    cursor = 0
    for length, has_type in zip(span_lengths, type_token_before):
        if has_type:
            cursor += 1
        spans.append((cursor, cursor + length))
        cursor += length
    return EncoderLayout(spans=tuple(spans))


def build_encoder_input(
    motif_events: Sequence[Token],
    variant_events: dict[int, Sequence[Token]],
) -> tuple[list[Token], EncoderLayout, int]:
    """Concatenate the motif and the five typed variants into one encoder
    sequence with span bookkeeping.

    Span 0 wraps the motif in motif_start/motif_end; spans 1..5 add the
    type token just before each wrapped variant (empty when a type has no
    material). Returns (tokens, layout, motif span length).
    """
    from ..tokens import MOTIF_END_TOKEN, MOTIF_START_TOKEN, type_token

    tokens: list[Token] = [MOTIF_START_TOKEN, *motif_events, MOTIF_END_TOKEN]
    lengths = [len(motif_events) + 2]
    flags = [False]
    for j in range(1, N_SPANS):
        events = list(variant_events.get(j, ()))
        tokens += [type_token(j), MOTIF_START_TOKEN, *events, MOTIF_END_TOKEN]
        lengths.append(len(events) + 2)
        flags.append(True)
    layout = layout_of_spans(lengths, flags)
    return tokens, layout, lengths[0]
