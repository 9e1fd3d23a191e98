"""Motif-to-melody model: masks, aligned positions, transformers, training."""

from .config import DESK_CONFIG, FULL_CONFIG, PRESETS, ModelConfig
from .generation import (
    BranchModels,
    SamplingConfig,
    VariantSet,
    generate_phrase,
    generate_variant,
    generate_variants,
)
from .masks import (
    EncoderLayout,
    MaskError,
    Region,
    build_encoder_input,
    build_mv_mask,
    build_region_mask,
    decode_mv_value,
    scan_regions,
)
from .positional import aligned_encoding, aligned_position_ids, sinusoid_table
from .training import (
    Pair,
    PhraseSample,
    TraceEntry,
    branch_token_accuracy,
    make_pair,
    make_phrase_sample,
    phrase_token_accuracy,
    train_branch,
    train_phrase,
)
from .transformer import (
    Encoder,
    GatedDecoder,
    PhraseModel,
    Seq2SeqModel,
    gated_attention_step,
)
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "BranchModels",
    "DESK_CONFIG",
    "Encoder",
    "EncoderLayout",
    "FULL_CONFIG",
    "GatedDecoder",
    "MaskError",
    "ModelConfig",
    "PRESETS",
    "Pair",
    "PhraseModel",
    "PhraseSample",
    "Region",
    "SamplingConfig",
    "Seq2SeqModel",
    "TraceEntry",
    "VariantSet",
    "aligned_encoding",
    "aligned_position_ids",
    "branch_token_accuracy",
    "build_encoder_input",
    "build_mv_mask",
    "build_region_mask",
    "decode_mv_value",
    "gated_attention_step",
    "generate_phrase",
    "generate_variant",
    "generate_variants",
    "load_checkpoint",
    "make_pair",
    "make_phrase_sample",
    "phrase_token_accuracy",
    "save_checkpoint",
    "scan_regions",
    "sinusoid_table",
    "train_branch",
    "train_phrase",
]
