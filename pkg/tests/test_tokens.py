import random

import pytest

from conftest import random_labeled_clip
from motifdev.core import Clip, DecodeError, EncodeError, MotifLabel, NoteEvent, VariantLabel
from motifdev.tokens import (
    BOS_TOKEN,
    EOS_TOKEN,
    MOTIF_END_TOKEN,
    MOTIF_START_TOKEN,
    Token,
    TokenSeq,
    Vocabulary,
    clip_fragment,
    decode,
    duration,
    encode,
    labels_are_content_aligned,
    pitch,
    position,
    region_fragments,
    split_at_bars,
    type_token,
)


def one_note_clip(**labels) -> Clip:
    return Clip(melody=(NoteEvent(0, 4, 60),), **labels)


def test_encode_single_note():
    seq = encode(one_note_clip())
    assert list(seq) == [BOS_TOKEN, Token("bar"), position(1), pitch(60), duration(4), EOS_TOKEN]


def test_encode_motif_label_wraps_region():
    clip = Clip(
        melody=(NoteEvent(0, 4, 60), NoteEvent(4, 4, 62)),
        motif_labels=(MotifLabel(0, 8, note_count=2),),
    )
    seq = encode(clip)
    assert list(seq) == [
        BOS_TOKEN,
        Token("bar"),
        MOTIF_START_TOKEN,
        position(1), pitch(60), duration(4),
        position(5), pitch(62), duration(4),
        MOTIF_END_TOKEN,
        EOS_TOKEN,
    ]


def test_encode_variant_region_gets_type_then_start():
    clip = Clip(
        melody=(NoteEvent(0, 4, 60), NoteEvent(4, 4, 62)),
        variant_labels=(VariantLabel(2, 0, 8),),
    )
    tokens = list(encode(clip))
    i = tokens.index(type_token(2))
    assert tokens[i + 1] == MOTIF_START_TOKEN
    assert tokens[-2] == MOTIF_END_TOKEN


def test_encode_rejects_overlong_duration():
    with pytest.raises(EncodeError, match="max representable"):
        encode(Clip(melody=(NoteEvent(0, 40, 60),)))


def test_encode_rejects_overlapping_labels():
    clip = Clip(
        melody=tuple(NoteEvent(i * 4, 4, 60) for i in range(8)),
        motif_labels=(MotifLabel(0, 16, note_count=4),),
        variant_labels=(VariantLabel(1, 8, 24),),
    )
    with pytest.raises(EncodeError, match="overlap"):
        encode(clip)


def test_decode_round_trips_single_note():
    clip = one_note_clip()
    assert decode(encode(clip)) == clip


def test_decode_missing_motif_end_errors():
    seq = [BOS_TOKEN, Token("bar"), MOTIF_START_TOKEN, position(1), pitch(60), duration(4), EOS_TOKEN]
    with pytest.raises(DecodeError, match="never closed"):
        decode(seq)


def test_decode_pitch_without_duration_errors():
    seq = [BOS_TOKEN, Token("bar"), position(1), pitch(60), pitch(62), EOS_TOKEN]
    with pytest.raises(DecodeError, match="not followed by duration") as err:
        decode(seq)
    assert err.value.index == 4


def test_decode_type_must_precede_motif_start():
    seq = [BOS_TOKEN, Token("bar"), type_token(1), position(1), pitch(60), duration(4), EOS_TOKEN]
    with pytest.raises(DecodeError, match="type token"):
        decode(seq)


def test_round_trip_random_labeled_clips():
    rng = random.Random(11)
    for _ in range(100):
        clip = random_labeled_clip(rng, n_variants=3, with_chords=rng.random() < 0.4)
        assert labels_are_content_aligned(clip)
        assert decode(encode(clip, max_len=None)) == clip


def test_vocabulary_bijection_and_serialization(tmp_path):
    for include_chords in (True, False):
        vocab = Vocabulary(include_chords=include_chords)
        for i in range(len(vocab)):
            assert vocab.index(vocab.token(i)) == i
        path = tmp_path / f"vocab_{include_chords}.txt"
        vocab.save(path)
        loaded = Vocabulary.load(path)
        assert len(loaded) == len(vocab)
        assert loaded.include_chords == include_chords


def test_token_seq_length_bound():
    with pytest.raises(Exception, match="exceeds max"):
        TokenSeq(tuple(Token("bar") for _ in range(10)), max_len=5)


def test_split_at_bars_keeps_regions_whole():
    rng = random.Random(5)
    clip = random_labeled_clip(rng, bars=12, n_variants=3)
    seq = encode(clip, max_len=None)
    pieces = split_at_bars(seq, max_len=64)
    assert all(len(p) <= 64 for p in pieces)
    # piece boundaries: every piece well-formed (decode does full checking)
    for piece in pieces:
        decode(piece, truncate_overlaps=True)
    # content is preserved in order
    inner = [t for p in pieces for t in list(p)[1:-1]]
    assert inner == list(seq)[1:-1]


def test_region_fragments_extracts_inner_tokens():
    clip = Clip(
        melody=(NoteEvent(0, 4, 60), NoteEvent(4, 4, 62), NoteEvent(16, 4, 64), NoteEvent(20, 4, 66)),
        motif_labels=(MotifLabel(0, 8, note_count=2),),
        variant_labels=(VariantLabel(2, 16, 24),),
    )
    frags = region_fragments(encode(clip).tokens)
    assert [t for t, _ in frags] == [0, 2]
    assert frags[0][1] == [position(1), pitch(60), duration(4), position(5), pitch(62), duration(4)]


def test_clip_fragment_matches_region_fragment():
    clip = Clip(
        melody=(NoteEvent(0, 4, 60), NoteEvent(4, 4, 62)),
        motif_labels=(MotifLabel(0, 8, note_count=2),),
    )
    frags = region_fragments(encode(clip).tokens)
    assert clip_fragment(clip, 0, 8) == frags[0][1]
