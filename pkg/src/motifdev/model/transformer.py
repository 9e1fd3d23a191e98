"""Encoder-decoder transformers built from explicit attention blocks.

Two decoder flavors share the same bricks: the variant branches use the
standard self-then-cross layer, while the phrase model uses a gated
parallel layer in which a per-token region bit selects, exactly, either
the cross-attention branch (queries carry variant-aligned positions) or
the causal self-attention branch (queries carry ordinary positions).
"""

from __future__ import annotations

import math

import torch
import torch.nn.functional as F
from torch import nn

from .config import ModelConfig
from .positional import sinusoid_table

NEG_INF = float("-inf")


def torch_dtype(name: str) -> torch.dtype:
    return torch.float64 if name == "float64" else torch.float32


def causal_mask(size: int, device=None) -> torch.Tensor:
    """Boolean [size, size] mask, True above the diagonal (disallowed)."""
    return torch.triu(torch.ones(size, size, dtype=torch.bool, device=device), diagonal=1)


class MultiHeadAttention(nn.Module):
    def __init__(self, d_model: int, heads: int, dtype: torch.dtype = torch.float32, dropout: float = 0.0):
        super().__init__()
        self.heads = heads
        self.d_head = d_model // heads
        self.q_proj = nn.Linear(d_model, d_model, dtype=dtype)
        self.k_proj = nn.Linear(d_model, d_model, dtype=dtype)
        self.v_proj = nn.Linear(d_model, d_model, dtype=dtype)
        self.out_proj = nn.Linear(d_model, d_model, dtype=dtype)
        self.attn_dropout = nn.Dropout(dropout)

    def forward(
        self,
        query: torch.Tensor,
        key: torch.Tensor,
        value: torch.Tensor,
        attn_mask: torch.Tensor | None = None,
        key_padding_mask: torch.Tensor | None = None,
    ) -> torch.Tensor:
        b, t_q, d = query.shape
        t_k = key.shape[1]
        q = self.q_proj(query).view(b, t_q, self.heads, self.d_head).transpose(1, 2)
        k = self.k_proj(key).view(b, t_k, self.heads, self.d_head).transpose(1, 2)
        v = self.v_proj(value).view(b, t_k, self.heads, self.d_head).transpose(1, 2)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.d_head)
        if attn_mask is not None:
            scores = scores.masked_fill(attn_mask, NEG_INF)
        if key_padding_mask is not None:
            scores = scores.masked_fill(key_padding_mask[:, None, None, :], NEG_INF)
        attn = self.attn_dropout(torch.softmax(scores, dim=-1))
        out = (attn @ v).transpose(1, 2).reshape(b, t_q, d)
        return self.out_proj(out)


class FeedForward(nn.Module):
    def __init__(self, d_model: int, d_ff: int, dtype: torch.dtype = torch.float32, dropout: float = 0.0):
        super().__init__()
        self.lift = nn.Linear(d_model, d_ff, dtype=dtype)
        self.lower = nn.Linear(d_ff, d_model, dtype=dtype)
        self.mid_dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.lower(self.mid_dropout(F.relu(self.lift(x))))


class EncoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig, dtype: torch.dtype):
        super().__init__()
        self.attn = MultiHeadAttention(cfg.d_model, cfg.heads, dtype, cfg.dropout)
        self.ffn = FeedForward(cfg.d_model, cfg.d_ff, dtype, cfg.dropout)
        self.norm1 = nn.LayerNorm(cfg.d_model, dtype=dtype)
        self.norm2 = nn.LayerNorm(cfg.d_model, dtype=dtype)

    def forward(self, x: torch.Tensor, pad_mask: torch.Tensor | None) -> torch.Tensor:
        x = self.norm1(x + self.attn(x, x, x, key_padding_mask=pad_mask))
        return self.norm2(x + self.ffn(x))


class Encoder(nn.Module):
    def __init__(self, vocab_size: int, cfg: ModelConfig, dtype: torch.dtype):
        super().__init__()
        self.d_model = cfg.d_model
        self.embed = nn.Embedding(vocab_size, cfg.d_model, dtype=dtype)
        self.register_buffer("pe", sinusoid_table(cfg.max_len, cfg.d_model, dtype))
        self.layers = nn.ModuleList(EncoderLayer(cfg, dtype) for _ in range(cfg.layers_enc))

    def forward(self, ids: torch.Tensor, pad_mask: torch.Tensor | None = None) -> torch.Tensor:
        x = self.embed(ids) + self.pe[: ids.shape[1]]
        for layer in self.layers:
            x = layer(x, pad_mask)
        return x


def gated_attention_step(
    emb: torch.Tensor,
    region_mask: torch.Tensor,
    pe_self: torch.Tensor,
    pe_cross: torch.Tensor,
    enc_out: torch.Tensor,
    self_attn: MultiHeadAttention,
    cross_attn: MultiHeadAttention,
    attn_mask: torch.Tensor | None = None,
    enc_pad_mask: torch.Tensor | None = None,
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """One gated parallel attention computation.

    The self branch sees ``emb + pe_self`` (ordinary positions), the cross
    branch ``emb + pe_cross`` (variant-aligned positions). A region bit of
    1 passes the cross branch through untouched; 0 passes the self branch.
    Returns (gated output, self input, cross input).
    """
    x_self = emb + pe_self
    x_cross = emb + pe_cross
    s = self_attn(x_self, x_self, x_self, attn_mask=attn_mask)
    c = cross_attn(x_cross, enc_out, enc_out, key_padding_mask=enc_pad_mask)
    r = region_mask.to(emb.dtype).unsqueeze(-1)
    return r * c + (1.0 - r) * s, x_self, x_cross


class GatedDecoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig, dtype: torch.dtype):
        super().__init__()
        self.self_attn = MultiHeadAttention(cfg.d_model, cfg.heads, dtype, cfg.dropout)
        self.cross_attn = MultiHeadAttention(cfg.d_model, cfg.heads, dtype, cfg.dropout)
        self.ffn = FeedForward(cfg.d_model, cfg.d_ff, dtype, cfg.dropout)
        self.norm1 = nn.LayerNorm(cfg.d_model, dtype=dtype)
        self.norm2 = nn.LayerNorm(cfg.d_model, dtype=dtype)

    def forward(
        self,
        x: torch.Tensor,
        region_mask: torch.Tensor,
        pe_self: torch.Tensor,
        pe_cross: torch.Tensor,
        enc_out: torch.Tensor,
        attn_mask: torch.Tensor | None,
        enc_pad_mask: torch.Tensor | None,
    ) -> torch.Tensor:
        gated, x_self, x_cross = gated_attention_step(
            x, region_mask, pe_self, pe_cross, enc_out,
            self.self_attn, self.cross_attn, attn_mask, enc_pad_mask,
        )
        r = region_mask.to(x.dtype).unsqueeze(-1)
        residual = r * x_cross + (1.0 - r) * x_self
        h = self.norm1(residual + gated)
        return self.norm2(h + self.ffn(h))


class GatedDecoder(nn.Module):
    """Decoder whose first layer injects the two positional streams; the
    deeper layers run the same gate on a single stream (zero extra PE)."""

    def __init__(self, vocab_size: int, cfg: ModelConfig, dtype: torch.dtype):
        super().__init__()
        self.d_model = cfg.d_model
        self.embed = nn.Embedding(vocab_size, cfg.d_model, dtype=dtype)
        self.register_buffer("pe", sinusoid_table(cfg.max_len, cfg.d_model, dtype))
        self.layers = nn.ModuleList(GatedDecoderLayer(cfg, dtype) for _ in range(cfg.layers_dec))

    def forward(
        self,
        ids: torch.Tensor,
        region_mask: torch.Tensor,
        aligned_pos: torch.Tensor,
        enc_out: torch.Tensor,
        enc_pad_mask: torch.Tensor | None = None,
    ) -> torch.Tensor:
        b, t = ids.shape
        emb = self.embed(ids)
        std_pos = torch.arange(t, device=ids.device).expand(b, t)
        pe_self = self.pe[std_pos]
        pe_cross = self.pe[aligned_pos]
        zero = torch.zeros_like(pe_self)
        mask = causal_mask(t, device=ids.device)
        x = emb
        for i, layer in enumerate(self.layers):
            if i == 0:
                x = layer(x, region_mask, pe_self, pe_cross, enc_out, mask, enc_pad_mask)
            else:
                x = layer(x, region_mask, zero, zero, enc_out, mask, enc_pad_mask)
        return x


class StandardDecoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig, dtype: torch.dtype):
        super().__init__()
        self.self_attn = MultiHeadAttention(cfg.d_model, cfg.heads, dtype, cfg.dropout)
        self.cross_attn = MultiHeadAttention(cfg.d_model, cfg.heads, dtype, cfg.dropout)
        self.ffn = FeedForward(cfg.d_model, cfg.d_ff, dtype, cfg.dropout)
        self.norm1 = nn.LayerNorm(cfg.d_model, dtype=dtype)
        self.norm2 = nn.LayerNorm(cfg.d_model, dtype=dtype)
        self.norm3 = nn.LayerNorm(cfg.d_model, dtype=dtype)

    def forward(
        self,
        x: torch.Tensor,
        enc_out: torch.Tensor,
        attn_mask: torch.Tensor | None,
        enc_pad_mask: torch.Tensor | None,
    ) -> torch.Tensor:
        x = self.norm1(x + self.self_attn(x, x, x, attn_mask=attn_mask))
        x = self.norm2(x + self.cross_attn(x, enc_out, enc_out, key_padding_mask=enc_pad_mask))
        return self.norm3(x + self.ffn(x))


class StandardDecoder(nn.Module):
    def __init__(self, vocab_size: int, cfg: ModelConfig, dtype: torch.dtype):
        super().__init__()
        self.d_model = cfg.d_model
        self.embed = nn.Embedding(vocab_size, cfg.d_model, dtype=dtype)
        self.register_buffer("pe", sinusoid_table(cfg.max_len, cfg.d_model, dtype))
        self.layers = nn.ModuleList(StandardDecoderLayer(cfg, dtype) for _ in range(cfg.layers_dec))

    def forward(
        self,
        ids: torch.Tensor,
        enc_out: torch.Tensor,
        enc_pad_mask: torch.Tensor | None = None,
    ) -> torch.Tensor:
        t = ids.shape[1]
        x = self.embed(ids) + self.pe[:t]
        mask = causal_mask(t, device=ids.device)
        for layer in self.layers:
            x = layer(x, enc_out, mask, enc_pad_mask)
        return x


class Seq2SeqModel(nn.Module):
    """Variant branch: plain encoder-decoder over the shared vocabulary."""

    def __init__(self, vocab_size: int, cfg: ModelConfig):
        super().__init__()
        dtype = torch_dtype(cfg.dtype)
        self.cfg = cfg
        self.vocab_size = vocab_size
        self.encoder = Encoder(vocab_size, cfg, dtype)
        self.decoder = StandardDecoder(vocab_size, cfg, dtype)
        self.head = nn.Linear(cfg.d_model, vocab_size, dtype=dtype)

    def forward(
        self,
        src_ids: torch.Tensor,
        tgt_ids: torch.Tensor,
        src_pad_mask: torch.Tensor | None = None,
    ) -> torch.Tensor:
        enc = self.encoder(src_ids, src_pad_mask)
        dec = self.decoder(tgt_ids, enc, src_pad_mask)
        return self.head(dec)


class PhraseModel(nn.Module):
    """Phrase generator: encoder over the concatenated motif/variant spans,
    gated decoder over the labeled phrase sequence."""

    def __init__(self, vocab_size: int, cfg: ModelConfig):
        super().__init__()
        dtype = torch_dtype(cfg.dtype)
        self.cfg = cfg
        self.vocab_size = vocab_size
        self.encoder = Encoder(vocab_size, cfg, dtype)
        self.decoder = GatedDecoder(vocab_size, cfg, dtype)
        self.head = nn.Linear(cfg.d_model, vocab_size, dtype=dtype)

    def forward(
        self,
        src_ids: torch.Tensor,
        tgt_ids: torch.Tensor,
        region_mask: torch.Tensor,
        aligned_pos: torch.Tensor,
        src_pad_mask: torch.Tensor | None = None,
    ) -> torch.Tensor:
        enc = self.encoder(src_ids, src_pad_mask)
        dec = self.decoder(tgt_ids, region_mask, aligned_pos, enc, src_pad_mask)
        return self.head(dec)
