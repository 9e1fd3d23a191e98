"""Sinusoidal positional encodings and variant-aligned position lookup.

Inside a label region, the decoder's cross-attention queries reuse the
encoder positions of the matching span: the token at offset rho of a
type-j region reads the encoding of the rho-th token of encoder span j.
Ordinary tokens, and region tokens that run past their span, use their
own index (the latter are flagged: generation outlived the variant).
"""

from __future__ import annotations

import math
from typing import Sequence

import torch

from ..tokens import Token
from .masks import EncoderLayout, build_mv_mask, decode_mv_value


def sinusoid_table(max_len: int, d_model: int, dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """The standard sin/cos interleaved position table, [max_len, d_model]."""
    table = torch.zeros(max_len, d_model, dtype=torch.float64)
    pos = torch.arange(max_len, dtype=torch.float64).unsqueeze(1)
    div = torch.exp(
        torch.arange(0, d_model, 2, dtype=torch.float64) * (-math.log(10000.0) / d_model)
    )
    table[:, 0::2] = torch.sin(pos * div)
    table[:, 1::2] = torch.cos(pos * div)
    return table.to(dtype)


def aligned_position_ids(
    tokens: Sequence[Token],
    motif_len: int,
    layout: EncoderLayout,
) -> tuple[list[int], list[bool]]:
    """Cross-attention position index for every decoder token.

    Returns (positions, overran) where ``overran[i]`` is True when token i
    sat deeper into its region than the encoder span is long and fell back
    to its own index.
    """
    mv = build_mv_mask(tokens, motif_len)
    positions: list[int] = []
    overran: list[bool] = []
    for i, value in enumerate(mv):
        decoded = decode_mv_value(value, motif_len)
        if decoded is None:
            positions.append(i)
            overran.append(False)
            continue
        vtype, offset = decoded
        start, stop = layout.spans[vtype]
        if offset < stop - start:
            positions.append(start + offset)
            overran.append(False)
        else:
            positions.append(i)
            overran.append(True)
    return positions, overran


def aligned_encoding(
    table: torch.Tensor,
    index: int,
    region_start: int,
    region_type: int,
    layout: EncoderLayout,
) -> tuple[torch.Tensor, bool]:
    """Positional vector for decoder index ``index`` inside one region.

    ``region_start`` is the decoder index of the region's motif_start
    token. Returns (vector, fell_back).
    """
    if index < region_start:
        raise ValueError(f"index {index} precedes region start {region_start}")
    rho = index - region_start
    start, stop = layout.spans[region_type]
    if rho < stop - start:
        return table[start + rho], False
    return table[index], True


def incremental_position(
    index: int,
    region: tuple[int, int] | None,
    layout: EncoderLayout,
) -> tuple[int, bool]:
    """Single-step form of :func:`aligned_position_ids` for generation.

    ``region`` is (type, motif_start index) of the currently open region,
    or None outside one.
    """
    if region is None:
        return index, False
    vtype, region_start = region
    rho = index - region_start
    start, stop = layout.spans[vtype]
    if rho < stop - start:
        return start + rho, False
    return index, True
