"""Teacher-forced training loops for branch and phrase models.

Training is single-threaded and deterministic under a fixed seed; the
loss traces written here feed the plain-text loss log and the loss-curve
figure on the CLI report path.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import torch
import torch.nn.functional as F

from ..core import ValidationError
from ..tokens import Token, Vocabulary
from .config import ModelConfig
from .masks import EncoderLayout, build_region_mask
from .positional import aligned_position_ids
from .transformer import PhraseModel, Seq2SeqModel


@dataclass(frozen=True)
class Pair:
    """One motif -> variant training example (bare event token ids)."""

    src: tuple[int, ...]
    tgt: tuple[int, ...]


@dataclass(frozen=True)
class PhraseSample:
    """One phrase training example with precomputed decoder-side masks."""

    enc_ids: tuple[int, ...]
    dec_input: tuple[int, ...]  # bos + target[:-1]
    dec_target: tuple[int, ...]  # target[1:] ending in eos
    region: tuple[int, ...]
    aligned: tuple[int, ...]


@dataclass
class TraceEntry:
    epoch: int
    nll: float
    accuracy: float | None = None


def make_pair(vocab: Vocabulary, motif: list[Token], variant: list[Token]) -> Pair:
    return Pair(src=tuple(vocab.encode_ids(motif)), tgt=tuple(vocab.encode_ids(variant)))


def make_phrase_sample(
    vocab: Vocabulary,
    target_tokens: list[Token],
    enc_tokens: list[Token],
    layout: EncoderLayout,
    motif_len: int,
) -> PhraseSample:
    """Shift the target right and derive masks on the decoder-input side."""
    target_ids = vocab.encode_ids(target_tokens)
    input_tokens = target_tokens[:-1]  # ends before eos; starts at bos
    region = build_region_mask(input_tokens)
    aligned, _ = aligned_position_ids(input_tokens, motif_len, layout)
    return PhraseSample(
        enc_ids=tuple(vocab.encode_ids(enc_tokens)),
        dec_input=tuple(target_ids[:-1]),
        dec_target=tuple(target_ids[1:]),
        region=tuple(region),
        aligned=tuple(aligned),
    )


def _pad_batch(rows: list[tuple[int, ...]], pad: int) -> torch.Tensor:
    width = max(len(r) for r in rows)
    return torch.tensor([list(r) + [pad] * (width - len(r)) for r in rows], dtype=torch.long)


def _branch_batch(pairs: list[Pair], vocab: Vocabulary):
    src = _pad_batch([p.src for p in pairs], vocab.pad_id)
    dec_in = _pad_batch([(vocab.bos_id, *p.tgt) for p in pairs], vocab.pad_id)
    dec_tgt = _pad_batch([(*p.tgt, vocab.eos_id) for p in pairs], vocab.pad_id)
    src_pad = src.eq(vocab.pad_id)
    return src, dec_in, dec_tgt, src_pad


def _batch_nll(logits: torch.Tensor, target: torch.Tensor, pad_id: int) -> torch.Tensor:
    return F.cross_entropy(
        logits.reshape(-1, logits.shape[-1]), target.reshape(-1), ignore_index=pad_id
    )


def branch_token_accuracy(model: Seq2SeqModel, pairs: list[Pair], vocab: Vocabulary) -> float:
    """Teacher-forced argmax accuracy over non-pad target tokens."""
    model.eval()
    correct = total = 0
    with torch.no_grad():
        for start in range(0, len(pairs), 64):
            chunk = pairs[start : start + 64]
            src, dec_in, dec_tgt, src_pad = _branch_batch(chunk, vocab)
            pred = model(src, dec_in, src_pad).argmax(dim=-1)
            keep = dec_tgt.ne(vocab.pad_id)
            correct += int((pred.eq(dec_tgt) & keep).sum())
            total += int(keep.sum())
    return correct / total if total else 0.0


def train_branch(
    pairs: list[Pair],
    config: ModelConfig,
    vocab: Vocabulary,
    stop_at_accuracy: float | None = None,
    eval_pairs: list[Pair] | None = None,
    log=None,
) -> tuple[Seq2SeqModel, list[TraceEntry]]:
    """Fit one variant branch by next-token negative log-likelihood.

    ``stop_at_accuracy`` short-circuits once held-in accuracy reaches the
    bar, keeping overfit runs fast. The trace carries per-epoch mean NLL
    and, when early stopping is armed, the measured accuracy.
    """
    if not pairs:
        raise ValidationError("cannot train a branch on an empty pair corpus")
    longest = max(max(len(p.src), len(p.tgt) + 1) for p in pairs)
    if longest > config.max_len:
        raise ValidationError(
            f"pair of {longest} tokens exceeds model max length {config.max_len}"
        )
    torch.manual_seed(config.seed)
    model = Seq2SeqModel(len(vocab), config)
    opt = torch.optim.Adam(model.parameters(), lr=config.lr, betas=config.betas)
    order = list(range(len(pairs)))
    shuffler = random.Random(config.seed)
    trace: list[TraceEntry] = []

    for epoch in range(1, config.epochs + 1):
        model.train()
        shuffler.shuffle(order)
        total_nll = 0.0
        n_batches = 0
        for start in range(0, len(order), config.batch):
            chunk = [pairs[i] for i in order[start : start + config.batch]]
            src, dec_in, dec_tgt, src_pad = _branch_batch(chunk, vocab)
            logits = model(src, dec_in, src_pad)
            loss = _batch_nll(logits, dec_tgt, vocab.pad_id)
            opt.zero_grad()
            loss.backward()
            opt.step()
            total_nll += loss.item()
            n_batches += 1
        entry = TraceEntry(epoch=epoch, nll=total_nll / n_batches)
        if stop_at_accuracy is not None:
            held = eval_pairs if eval_pairs is not None else pairs
            entry.accuracy = branch_token_accuracy(model, held, vocab)
        trace.append(entry)
        if log:
            log(entry)
        if entry.accuracy is not None and entry.accuracy >= stop_at_accuracy:
            break
    return model, trace


def _phrase_batch(samples: list[PhraseSample], vocab: Vocabulary):
    src = _pad_batch([s.enc_ids for s in samples], vocab.pad_id)
    dec_in = _pad_batch([s.dec_input for s in samples], vocab.pad_id)
    dec_tgt = _pad_batch([s.dec_target for s in samples], vocab.pad_id)
    region = _pad_batch([s.region for s in samples], 0)
    width = dec_in.shape[1]
    aligned_rows = []
    for s in samples:
        row = list(s.aligned) + list(range(len(s.aligned), width))  # pads use own index
        aligned_rows.append(row[:width])
    aligned = torch.tensor(aligned_rows, dtype=torch.long)
    return src, dec_in, dec_tgt, region, aligned, src.eq(vocab.pad_id)


def phrase_token_accuracy(model: PhraseModel, samples: list[PhraseSample], vocab: Vocabulary) -> float:
    model.eval()
    correct = total = 0
    with torch.no_grad():
        for start in range(0, len(samples), 16):
            chunk = samples[start : start + 16]
            src, dec_in, dec_tgt, region, aligned, src_pad = _phrase_batch(chunk, vocab)
            pred = model(src, dec_in, region, aligned, src_pad).argmax(dim=-1)
            keep = dec_tgt.ne(vocab.pad_id)
            correct += int((pred.eq(dec_tgt) & keep).sum())
            total += int(keep.sum())
    return correct / total if total else 0.0


def train_phrase(
    samples: list[PhraseSample],
    config: ModelConfig,
    vocab: Vocabulary,
    stop_at_accuracy: float | None = None,
    log=None,
) -> tuple[PhraseModel, list[TraceEntry]]:
    """Fit the phrase model on labeled sequences with oracle variant spans."""
    if not samples:
        raise ValidationError("cannot train the phrase model on an empty corpus")
    longest = max(max(len(s.enc_ids), len(s.dec_input)) for s in samples)
    if longest > config.max_len:
        raise ValidationError(
            f"sample of {longest} tokens exceeds model max length {config.max_len}"
        )
    torch.manual_seed(config.seed)
    model = PhraseModel(len(vocab), config)
    opt = torch.optim.Adam(model.parameters(), lr=config.lr, betas=config.betas)
    order = list(range(len(samples)))
    shuffler = random.Random(config.seed)
    trace: list[TraceEntry] = []

    for epoch in range(1, config.epochs + 1):
        model.train()
        shuffler.shuffle(order)
        total_nll = 0.0
        n_batches = 0
        for start in range(0, len(order), config.batch):
            chunk = [samples[i] for i in order[start : start + config.batch]]
            src, dec_in, dec_tgt, region, aligned, src_pad = _phrase_batch(chunk, vocab)
            logits = model(src, dec_in, region, aligned, src_pad)
            loss = _batch_nll(logits, dec_tgt, vocab.pad_id)
            opt.zero_grad()
            loss.backward()
            opt.step()
            total_nll += loss.item()
            n_batches += 1
        entry = TraceEntry(epoch=epoch, nll=total_nll / n_batches)
        if stop_at_accuracy is not None:
            entry.accuracy = phrase_token_accuracy(model, samples, vocab)
        trace.append(entry)
        if log:
            log(entry)
        if entry.accuracy is not None and entry.accuracy >= stop_at_accuracy:
            break
    return model, trace
