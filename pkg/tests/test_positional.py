import math

import pytest
import torch

from motifdev.model.masks import EncoderLayout, build_encoder_input, layout_of_spans
from motifdev.model.positional import (
    aligned_encoding,
    aligned_position_ids,
    incremental_position,
    sinusoid_table,
)
from motifdev.tokens import MOTIF_END_TOKEN, MOTIF_START_TOKEN, Token, duration, pitch, position, type_token


def _layout(lengths=(4, 4, 4, 4, 4, 4)):
    return layout_of_spans(list(lengths), [False] + [True] * 5)


def test_sinusoid_table_values():
    table = sinusoid_table(32, 8, torch.float64)
    assert table.shape == (32, 8)
    assert table[0, 0] == 0.0
    assert table[0, 1] == 1.0
    assert table[5, 0] == pytest.approx(math.sin(5.0))
    assert table[5, 1] == pytest.approx(math.cos(5.0))
    assert table[7, 2] == pytest.approx(math.sin(7 / 10000 ** (2 / 8)))


def test_aligned_encoding_region_start():
    # span 2 sits at encoder positions 12..15; offset 0 reads position 12
    table = sinusoid_table(64, 8, torch.float64)
    layout = EncoderLayout(spans=((0, 4), (5, 9), (12, 16), (17, 18), (19, 20), (21, 22)))
    vec, fell_back = aligned_encoding(table, index=30, region_start=30, region_type=2, layout=layout)
    assert not fell_back
    assert torch.equal(vec, table[12])


def test_aligned_encoding_offset_into_span():
    # decoder index 50 in a type-2 region opened at 48 reads span position 14
    table = sinusoid_table(64, 8, torch.float64)
    layout = EncoderLayout(spans=((0, 4), (5, 9), (12, 16), (17, 18), (19, 20), (21, 22)))
    vec, fell_back = aligned_encoding(table, index=50, region_start=48, region_type=2, layout=layout)
    assert not fell_back
    assert torch.equal(vec, table[14])


def test_aligned_encoding_falls_back_past_span():
    table = sinusoid_table(64, 8, torch.float64)
    layout = EncoderLayout(spans=((0, 4), (5, 9), (12, 16), (17, 18), (19, 20), (21, 22)))
    vec, fell_back = aligned_encoding(table, index=53, region_start=48, region_type=2, layout=layout)
    assert fell_back
    assert torch.equal(vec, table[53])


def test_ordinary_tokens_use_own_index():
    tokens = [Token("bos"), Token("bar"), position(1), pitch(60), duration(2)]
    ids, overran = aligned_position_ids(tokens, motif_len=6, layout=_layout())
    assert ids == list(range(len(tokens)))
    assert not any(overran)


def test_region_tokens_use_span_positions():
    motif = [position(1), pitch(60), duration(2)]
    enc_tokens, layout, motif_len = build_encoder_input(motif, {2: motif})
    dec = [Token("bos"), Token("bar"), type_token(2), MOTIF_START_TOKEN, *motif, MOTIF_END_TOKEN]
    ids, overran = aligned_position_ids(dec, motif_len, layout)
    span_start = layout.spans[2][0]
    assert ids[:3] == [0, 1, 2]  # bos, bar, type are ordinary
    assert ids[3:] == [span_start + k for k in range(5)]
    assert not any(overran)


def test_region_longer_than_span_flags_overrun():
    motif = [position(1), pitch(60), duration(2)]
    enc_tokens, layout, motif_len = build_encoder_input(motif, {})  # span 1 empty: length 2
    dec = [Token("bos"), type_token(1), MOTIF_START_TOKEN, *motif, MOTIF_END_TOKEN]
    ids, overran = aligned_position_ids(dec, motif_len, layout)
    region_ids = ids[2:]
    span = layout.spans[1]
    assert region_ids[0] == span[0] and region_ids[1] == span[0] + 1
    assert overran[4:] == [True, True, True]
    assert ids[4:] == [4, 5, 6]  # fallback to own index


def test_incremental_matches_batch(rng):
    motif = [position(i + 1) for i in range(3)]
    enc_tokens, layout, motif_len = build_encoder_input(motif, {1: motif, 4: motif + motif})
    for _ in range(50):
        dec = [Token("bos"), Token("bar")]
        vtype = rng.choice([0, 1, 4])
        head = [type_token(vtype)] if vtype else []
        body = [position(1), pitch(60), duration(1), position(2), pitch(62), duration(1)]
        dec += head + [MOTIF_START_TOKEN, *body, MOTIF_END_TOKEN] + [Token("bar")]
        ids, overran = aligned_position_ids(dec, motif_len, layout)
        region = None
        for i, tok in enumerate(dec):
            if tok.kind == "type":
                pending = tok.value
            elif tok.kind == "motif_start":
                region = (pending if dec[i - 1].kind == "type" else 0, i)
            pos, over = incremental_position(i, region, layout)
            assert pos == ids[i], (i, tok)
            assert over == overran[i]
            if tok.kind == "motif_end":
                region = None
