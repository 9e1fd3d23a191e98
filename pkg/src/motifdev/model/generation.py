"""Autoregressive sampling for variant branches and the phrase model.

Sampling is grammar-constrained: at every step only tokens that keep the
sequence well formed (and decodable) are allowed, which is what lets
desk-scale models honor the validity contract. Temperature 0 is greedy
argmax; any temperature with a fixed seed is bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

from ..core import TICKS_PER_BAR, ValidationError
from ..tokens import (
    BAR,
    BOS_TOKEN,
    DURATION,
    EOS_TOKEN,
    MOTIF_END,
    MOTIF_START,
    PITCH,
    POSITION,
    TYPE,
    Token,
    TokenSeq,
    Vocabulary,
)
from .masks import EncoderLayout, build_encoder_input
from .transformer import PhraseModel, Seq2SeqModel

NOTE_COST = 3  # position + pitch + duration
MIN_REGION_NOTES = 2
MOTIF_SPAN_TICKS = 2 * TICKS_PER_BAR  # motif labels may span at most two bars


@dataclass(frozen=True)
class SamplingConfig:
    temperature: float = 0.0
    seed: int = 0
    max_bars: int = 16
    min_bars: int = 1
    max_len: int = 1024


@dataclass
class VariantSet:
    """Branch outputs concatenated into one encoder input."""

    tokens: TokenSeq
    layout: EncoderLayout
    motif_len: int
    truncated_types: tuple[int, ...] = ()


class _IdGroups:
    """Vocabulary id lookups the grammars share."""

    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab
        self.eos = vocab.eos_id
        self.bar = vocab.index(Token(BAR))
        self.motif_start = vocab.index(Token(MOTIF_START))
        self.motif_end = vocab.index(Token(MOTIF_END))
        self.positions = {p: vocab.index(Token(POSITION, p)) for p in range(1, TICKS_PER_BAR + 1)}
        self.pitches = [vocab.index(Token(PITCH, p)) for p in range(128)]
        self.durations = [vocab.index(Token(DURATION, d)) for d in range(1, 2 * TICKS_PER_BAR + 1)]
        self.types = {j: vocab.index(Token(TYPE, j)) for j in range(1, 6)}


class FragmentGrammar:
    """Legal-token machine for bare event fragments (branch outputs)."""

    def __init__(self, ids: _IdGroups, max_tokens: int):
        self.ids = ids
        self.max_tokens = max_tokens
        self.count = 0
        self.expect = "event"  # event | pitch | duration
        self.last_pos = 0
        self.n_notes = 0

    def legal(self) -> list[int]:
        ids = self.ids
        if self.expect == "pitch":
            return list(ids.pitches)
        if self.expect == "duration":
            return list(ids.durations)
        legal: list[int] = []
        if self.count + NOTE_COST <= self.max_tokens:
            legal += [i for p, i in ids.positions.items() if p > self.last_pos]
        if self.count + 1 + NOTE_COST <= self.max_tokens:
            legal.append(ids.bar)
        if self.n_notes >= 1 or not legal:
            legal.append(ids.eos)
        return legal

    def update(self, token: Token) -> None:
        self.count += 1
        if token.kind == POSITION:
            self.last_pos = token.value
            self.expect = "pitch"
        elif token.kind == PITCH:
            self.expect = "duration"
        elif token.kind == DURATION:
            self.expect = "event"
            self.n_notes += 1
        elif token.kind == BAR:
            self.last_pos = 0


class PhraseGrammar:
    """Legal-token machine for full labeled phrase sequences.

    Keeps regions closable (two notes minimum, budget for the closing
    motif_end) and the whole sequence decodable within max_len.
    """

    def __init__(self, ids: _IdGroups, motif_len: int, sampling: SamplingConfig):
        self.ids = ids
        self.region_budget = 2 * motif_len - 1
        self.cfg = sampling
        self.length = 1  # bos already in place
        self.bars = 0
        self.last_pos = 0
        self.expect = "event"
        self.pending_type = False
        self.region_tokens = 0  # 0 = outside a region
        self.region_notes = 0
        self.in_region = False
        self.region_is_motif = False
        self.region_first_onset: int | None = None

    def _room(self, cost: int) -> bool:
        # closing costs: motif_end if a region is open, then eos
        closing = (1 if self.in_region else 0) + 1
        return self.length + cost + closing <= self.cfg.max_len

    def _region_room(self, cost: int, notes_after: int) -> bool:
        missing = max(0, MIN_REGION_NOTES - notes_after)
        return self.region_tokens + cost + missing * NOTE_COST + 1 <= self.region_budget

    def _onset(self, pos: int) -> int:
        return (self.bars - 1) * TICKS_PER_BAR + pos - 1

    def _motif_span_cap(self) -> int | None:
        """Last tick a motif-region note may reach (labels max two bars)."""
        if not (self.in_region and self.region_is_motif and self.region_first_onset is not None):
            return None
        return self.region_first_onset + MOTIF_SPAN_TICKS

    def legal(self) -> list[int]:
        ids = self.ids
        if self.expect == "pitch":
            return list(ids.pitches)
        if self.expect == "duration":
            # a note may not ring past the final bar, nor stretch a motif
            # region past its two-bar label limit
            onset = self._onset(self.last_pos)
            limit = self.cfg.max_bars * TICKS_PER_BAR
            span_cap = self._motif_span_cap()
            if span_cap is not None:
                limit = min(limit, span_cap)
            cap = min(len(ids.durations), limit - onset)
            return list(ids.durations[:cap])
        if self.pending_type:
            return [ids.motif_start]

        legal: list[int] = []
        if self.bars == 0:
            return [ids.bar]

        max_pos = TICKS_PER_BAR
        can_note = self._room(NOTE_COST)
        if self.in_region:
            can_note = can_note and self._region_room(NOTE_COST, self.region_notes + 1)
            # the first region note must leave slots for the second, so the
            # region stays closable even when no further bar is allowed
            missing_after = MIN_REGION_NOTES - self.region_notes - 1
            if missing_after > 0:
                max_pos = TICKS_PER_BAR - missing_after
            span_cap = self._motif_span_cap()
            if span_cap is not None:
                # a 1-tick note must still fit under the two-bar label limit
                max_pos = min(max_pos, span_cap - (self.bars - 1) * TICKS_PER_BAR)
        if can_note:
            legal += [i for p, i in ids.positions.items() if self.last_pos < p <= max_pos]

        can_bar = self.bars < self.cfg.max_bars and self._room(1 + NOTE_COST)
        if self.in_region:
            can_bar = can_bar and self._region_room(1, self.region_notes)
            span_cap = self._motif_span_cap()
            if span_cap is not None:
                can_bar = can_bar and self.bars * TICKS_PER_BAR + 1 <= span_cap
        if can_bar:
            legal.append(ids.bar)

        if self.in_region:
            if self.region_notes >= MIN_REGION_NOTES:
                legal.append(ids.motif_end)
        else:
            # opening a region demands room for its two minimum notes in the
            # current bar plus the closing motif_end
            min_region = 1 + MIN_REGION_NOTES * NOTE_COST + 1
            opener_ok = (
                self.region_budget >= min_region
                and self.last_pos <= TICKS_PER_BAR - MIN_REGION_NOTES
                and self._room(min_region)
            )
            if opener_ok:
                legal.append(ids.motif_start)
                if self._room(min_region + 1):
                    legal += list(ids.types.values())
            if self.bars >= self.cfg.min_bars or not legal:
                legal.append(ids.eos)
        if not legal:
            legal.append(ids.eos)
        return legal

    def update(self, token: Token) -> None:
        self.length += 1
        if self.in_region:
            self.region_tokens += 1
        if token.kind == POSITION:
            self.last_pos = token.value
            self.expect = "pitch"
            if self.in_region and self.region_first_onset is None:
                self.region_first_onset = self._onset(token.value)
        elif token.kind == PITCH:
            self.expect = "duration"
        elif token.kind == DURATION:
            self.expect = "event"
            if self.in_region:
                self.region_notes += 1
        elif token.kind == BAR:
            self.bars += 1
            self.last_pos = 0
        elif token.kind == TYPE:
            self.pending_type = True
        elif token.kind == MOTIF_START:
            self.in_region = True
            self.region_is_motif = not self.pending_type
            self.pending_type = False
            self.region_tokens = 1
            self.region_notes = 0
            self.region_first_onset = None
        elif token.kind == MOTIF_END:
            self.in_region = False
            self.region_is_motif = False
            self.region_tokens = 0
            self.region_notes = 0
            self.region_first_onset = None


def _pick(logits: torch.Tensor, legal: list[int], temperature: float, gen: torch.Generator) -> int:
    scores = logits[legal]
    if temperature <= 0:
        return legal[int(torch.argmax(scores).item())]
    probs = torch.softmax(scores.to(torch.float64) / temperature, dim=-1)
    choice = torch.multinomial(probs, 1, generator=gen)
    return legal[int(choice.item())]


def generate_variant(
    model: Seq2SeqModel,
    motif_events: list[Token],
    vocab: Vocabulary,
    max_tokens: int,
    sampling: SamplingConfig,
) -> tuple[list[Token], bool]:
    """Sample one variant fragment from a branch. Returns (events, truncated).

    ``truncated`` is set when the budget forced the stop before the model
    chose eos itself.
    """
    model.eval()
    ids = _IdGroups(vocab)
    grammar = FragmentGrammar(ids, max_tokens)
    gen = torch.Generator().manual_seed(sampling.seed)
    src = torch.tensor([vocab.encode_ids(motif_events)], dtype=torch.long)
    out_ids = [vocab.bos_id]
    events: list[Token] = []
    truncated = False
    with torch.no_grad():
        enc = model.encoder(src)
        while True:
            tgt = torch.tensor([out_ids], dtype=torch.long)
            logits = model.head(model.decoder(tgt, enc))[0, -1]
            legal = grammar.legal()
            choice = _pick(logits, legal, sampling.temperature, gen)
            if choice == vocab.eos_id:
                truncated = legal == [ids.eos]  # budget left no other option
                break
            token = vocab.token(choice)
            events.append(token)
            grammar.update(token)
            out_ids.append(choice)
    return events, truncated


@dataclass
class BranchModels:
    """The five typed variant branches plus their shared pieces."""

    models: dict[int, Seq2SeqModel]
    vocab: Vocabulary

    def __post_init__(self):
        missing = [j for j in range(1, 6) if j not in self.models]
        if missing:
            raise ValidationError(f"branch models missing for types {missing}")


def generate_variants(
    motif_events: list[Token],
    branches: BranchModels,
    sampling: SamplingConfig,
) -> VariantSet:
    """Run every branch on the motif and concatenate the results into the
    encoder input with span bookkeeping."""
    motif_len = len(motif_events) + 2
    cap = 2 * motif_len - 1
    variants: dict[int, list[Token]] = {}
    truncated: list[int] = []
    for j in range(1, 6):
        events, was_truncated = generate_variant(
            branches.models[j], motif_events, branches.vocab, cap, sampling
        )
        variants[j] = events
        if was_truncated:
            truncated.append(j)
    tokens, layout, span0_len = build_encoder_input(motif_events, variants)
    return VariantSet(
        tokens=TokenSeq(tuple(tokens), max_len=None),
        layout=layout,
        motif_len=span0_len,
        truncated_types=tuple(truncated),
    )


def generate_phrase(
    variant_set: VariantSet,
    model: PhraseModel,
    vocab: Vocabulary,
    sampling: SamplingConfig,
) -> TokenSeq:
    """Sample a full labeled phrase conditioned on the variant set.

    The decoder enters region mode when it emits a motif_start (cross
    attention with span-aligned positions) and leaves it at motif_end.
    """
    model.eval()
    if len(variant_set.tokens) > model.cfg.max_len:
        raise ValidationError(
            f"encoder input of {len(variant_set.tokens)} tokens exceeds model "
            f"max length {model.cfg.max_len}"
        )
    ids = _IdGroups(vocab)
    max_len = min(sampling.max_len, model.cfg.max_len)
    grammar = PhraseGrammar(ids, variant_set.motif_len, SamplingConfig(
        temperature=sampling.temperature,
        seed=sampling.seed,
        max_bars=sampling.max_bars,
        min_bars=sampling.min_bars,
        max_len=max_len,
    ))
    gen = torch.Generator().manual_seed(sampling.seed)

    src = torch.tensor([vocab.encode_ids(variant_set.tokens)], dtype=torch.long)
    inp_ids = [vocab.bos_id]
    region_bits = [0]
    aligned = [0]
    spans = variant_set.layout.spans
    open_region: tuple[int, int] | None = None  # (type, motif_start input index)
    pending_type = 0
    out_tokens: list[Token] = []

    with torch.no_grad():
        enc = model.encoder(src)
        while True:
            tgt = torch.tensor([inp_ids], dtype=torch.long)
            region = torch.tensor([region_bits], dtype=torch.long)
            pos = torch.tensor([aligned], dtype=torch.long)
            logits = model.head(model.decoder(tgt, region, pos, enc))[0, -1]
            choice = _pick(logits, grammar.legal(), sampling.temperature, gen)
            if choice == vocab.eos_id:
                break
            token = vocab.token(choice)
            out_tokens.append(token)
            grammar.update(token)

            idx = len(inp_ids)  # input index this token will occupy
            if token.kind == TYPE:
                pending_type = token.value
                bit, pos_idx = 0, idx
            elif token.kind == MOTIF_START:
                open_region = (pending_type, idx)
                pending_type = 0
                bit, pos_idx = 1, _aligned_index(idx, open_region, spans)
            elif token.kind == MOTIF_END:
                bit, pos_idx = 1, _aligned_index(idx, open_region, spans)
                open_region = None
            elif open_region is not None:
                bit, pos_idx = 1, _aligned_index(idx, open_region, spans)
            else:
                bit, pos_idx = 0, idx
            inp_ids.append(choice)
            region_bits.append(bit)
            aligned.append(min(pos_idx, max_len - 1))

    return TokenSeq((BOS_TOKEN, *out_tokens, EOS_TOKEN), max_len=max_len)


def _aligned_index(idx: int, open_region: tuple[int, int], spans) -> int:
    vtype, start_idx = open_region
    rho = idx - start_idx
    span_start, span_stop = spans[vtype]
    if rho < span_stop - span_start:
        return span_start + rho
    return idx  # ran past the variant's length; standard position
