"""Objective corpus metrics over labeled clips.

Variant proportion: the share of each variant type among all variants in
the corpus. Variant distance: the mean gap in beats between consecutive
region starts (motif and variants pooled per clip), averaged over all
consecutive pairs in the corpus.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import TICKS_PER_BEAT, Clip, MetricsError

N_TYPES = 5


@dataclass(frozen=True)
class CorpusStats:
    """Aggregated label statistics for one corpus."""

    counts: tuple[int, int, int, int, int]
    n_clips: int
    pair_count: int
    vp: tuple[float, float, float, float, float]
    vd: float | None

    def as_dict(self) -> dict:
        return {
            "clips": self.n_clips,
            "variant_counts": dict(zip(range(1, N_TYPES + 1), self.counts)),
            "variant_proportion": list(self.vp),
            "variant_distance_beats": self.vd,
            "consecutive_pairs": self.pair_count,
        }


def variant_counts(corpus: Iterable[Clip]) -> tuple[int, ...]:
    counts = [0] * N_TYPES
    for clip in corpus:
        for label in clip.variant_labels:
            counts[label.type - 1] += 1
    return tuple(counts)


def proportions_from_counts(counts: Sequence[int]) -> tuple[float, ...]:
    """Normalize per-type variant counts to fractions of the total."""
    if len(counts) != N_TYPES:
        raise MetricsError(f"expected {N_TYPES} counts, got {len(counts)}")
    total = sum(counts)
    if total == 0:
        raise MetricsError("variant proportion is undefined: corpus has no variants")
    return tuple(c / total for c in counts)


def variant_proportion(corpus: Sequence[Clip]) -> tuple[float, ...]:
    """Fraction of each variant type among all variant labels."""
    return proportions_from_counts(variant_counts(corpus))


def _region_starts(clip: Clip) -> list[int]:
    starts = [m.start for m in clip.motif_labels]
    starts += [v.start for v in clip.variant_labels]
    return sorted(starts)


def variant_distance(corpus: Sequence[Clip]) -> float:
    """Mean start-to-start gap in beats over all consecutive region pairs.

    Clips with fewer than two regions contribute nothing; a corpus with no
    contributing clip has no defined distance.
    """
    total_ticks = 0
    pairs = 0
    for clip in corpus:
        starts = _region_starts(clip)
        for a, b in zip(starts, starts[1:]):
            total_ticks += b - a
            pairs += 1
    if pairs == 0:
        raise MetricsError(
            "variant distance is undefined: no clip has two or more labeled regions"
        )
    return total_ticks / pairs / TICKS_PER_BEAT


def corpus_stats(corpus: Sequence[Clip]) -> CorpusStats:
    """Compute all metrics, leaving ones that are undefined as None/zero."""
    counts = variant_counts(corpus)
    vp = proportions_from_counts(counts) if sum(counts) else (0.0,) * N_TYPES
    pairs = sum(max(0, len(_region_starts(c)) - 1) for c in corpus)
    try:
        vd = variant_distance(corpus)
    except MetricsError:
        vd = None
    return CorpusStats(counts=counts, n_clips=len(corpus), pair_count=pairs, vp=vp, vd=vd)


def format_stats_table(stats: CorpusStats, name: str = "corpus") -> str:
    """Aligned plain-text table: one row, VP_1..VP_5 then VD."""
    headers = [f"VP_{i}" for i in range(1, N_TYPES + 1)] + ["VD"]
    values = [f"{p:.2f}" for p in stats.vp]
    values.append(f"{stats.vd:.2f}" if stats.vd is not None else "n/a")
    name_w = max(len(name), len("corpus"))
    widths = [max(len(h), len(v), 6) for h, v in zip(headers, values)]
    head = " ".join(["corpus".ljust(name_w)] + [h.rjust(w) for h, w in zip(headers, widths)])
    row = " ".join([name.ljust(name_w)] + [v.rjust(w) for v, w in zip(values, widths)])
    return head + "\n" + row + "\n"
