"""Versioned model checkpoints: a config header plus parameter tensors."""

from __future__ import annotations

from dataclasses import asdict

import torch

from ..core import ValidationError
from ..tokens import Vocabulary
from .config import ModelConfig
from .transformer import PhraseModel, Seq2SeqModel

CHECKPOINT_VERSION = 1


def save_checkpoint(path, model, kind: str, variant_type: int | None = None) -> None:
    if kind not in ("branch", "phrase"):
        raise ValidationError(f"checkpoint kind must be branch or phrase, got {kind!r}")
    payload = {
        "version": CHECKPOINT_VERSION,
        "kind": kind,
        "variant_type": variant_type,
        "config": asdict(model.cfg),
        "vocab_size": model.vocab_size,
        "state_dict": model.state_dict(),
    }
    torch.save(payload, path)


def load_checkpoint(path, expect_kind: str | None = None):
    """Rebuild a model from disk; returns (model, kind, variant_type)."""
    payload = torch.load(path, map_location="cpu", weights_only=False)
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValidationError(f"unsupported checkpoint version {payload.get('version')}")
    kind = payload["kind"]
    if expect_kind is not None and kind != expect_kind:
        raise ValidationError(f"checkpoint at {path} is a {kind} model, expected {expect_kind}")
    cfg = ModelConfig(**payload["config"])
    cls = Seq2SeqModel if kind == "branch" else PhraseModel
    model = cls(payload["vocab_size"], cfg)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, kind, payload.get("variant_type")


def check_vocab(model_vocab_size: int, vocab: Vocabulary) -> None:
    if model_vocab_size != len(vocab):
        raise ValidationError(
            f"checkpoint vocabulary size {model_vocab_size} != loaded vocabulary {len(vocab)}"
        )
