"""Corpus building: tokenize labeled clips, extract training material, split.

Splitting happens at the clip level with a seed-determined shuffle, so a
clip's phrase sample and motif-variant pairs always land in the same
split and reruns are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
import random

from .core import Clip, ValidationError
from .model.masks import build_encoder_input
from .tokens import Vocabulary, encode, region_fragments, split_at_bars

DEFAULT_SPLIT = (8.5, 1.0, 0.5)
SPLIT_NAMES = ("train", "valid", "test")


@dataclass(frozen=True)
class DatasetPaths:
    root: Path

    @property
    def vocab(self) -> Path:
        return self.root / "vocab.txt"

    def phrases(self, split: str) -> Path:
        return self.root / f"phrases_{split}.jsonl"

    def pairs(self, vtype: int, split: str) -> Path:
        return self.root / f"pairs_type{vtype}_{split}.jsonl"

    @property
    def manifest(self) -> Path:
        return self.root / "manifest.json"


def normalize_split(ratios) -> tuple[float, float, float]:
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ValidationError(f"split needs three positive ratios, got {ratios}")
    total = sum(ratios)
    return tuple(r / total for r in ratios)


def assign_splits(names: list[str], ratios, seed: int) -> dict[str, str]:
    """Deterministically partition item names into train/valid/test."""
    fractions = normalize_split(ratios)
    shuffled = sorted(names)
    random.Random(seed).shuffle(shuffled)
    n = len(shuffled)
    n_train = round(n * fractions[0])
    n_valid = round(n * fractions[1])
    n_valid = min(n_valid, n - n_train)
    assignment = {}
    for i, name in enumerate(shuffled):
        if i < n_train:
            assignment[name] = "train"
        elif i < n_train + n_valid:
            assignment[name] = "valid"
        else:
            assignment[name] = "test"
    return assignment


def clip_pairs(clip: Clip, vocab: Vocabulary, include_chords: bool = False):
    """Extract (type, motif ids, variant ids) triples from one labeled clip.

    Every variant pairs with the clip's first motif region; clips without
    a motif yield nothing.
    """
    seq = encode(clip, include_chords=include_chords, max_len=None)
    fragments = region_fragments(seq.tokens)
    motifs = [events for vtype, events in fragments if vtype == 0]
    if not motifs:
        return []
    motif_ids = vocab.encode_ids(motifs[0])
    out = []
    for vtype, events in fragments:
        if vtype == 0:
            continue
        out.append((vtype, motif_ids, vocab.encode_ids(events)))
    return out


def clip_phrase_record(
    clip: Clip,
    vocab: Vocabulary,
    include_chords: bool = False,
    max_len: int = 1024,
) -> list[dict]:
    """Phrase-model training records for one clip.

    The encoder side concatenates oracle fragments (the clip's motif and
    the first variant of each type); the decoder target is the full
    labeled sequence, split at bar boundaries when it exceeds max_len.
    """
    if not clip.motif_labels:
        return []
    seq = encode(clip, include_chords=include_chords, max_len=None)
    fragments = region_fragments(seq.tokens)
    motif_events = next(events for vtype, events in fragments if vtype == 0)
    variants: dict[int, list] = {}
    for vtype, events in fragments:
        if vtype > 0 and vtype not in variants:
            variants[vtype] = events
    enc_tokens, layout, motif_len = build_encoder_input(motif_events, variants)
    records = []
    for piece in split_at_bars(seq, max_len):
        records.append(
            {
                "target": vocab.encode_ids(piece.tokens),
                "encoder": vocab.encode_ids(enc_tokens),
                "spans": [list(s) for s in layout.spans],
                "motif_len": motif_len,
            }
        )
    return records


def write_jsonl(path: Path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, separators=(",", ":")) + "\n")


def read_jsonl(path: Path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def build_dataset(
    clips: dict[str, Clip],
    out_dir: Path,
    seed: int,
    split_ratios=DEFAULT_SPLIT,
    include_chords: bool = False,
    max_len: int = 1024,
) -> dict:
    """Tokenize a named clip corpus into pair and phrase files per split."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = DatasetPaths(out_dir)
    vocab = Vocabulary(include_chords=True)
    vocab.save(paths.vocab)

    assignment = assign_splits(list(clips), split_ratios, seed)
    pair_rows: dict[tuple[int, str], list[dict]] = {}
    phrase_rows: dict[str, list[dict]] = {s: [] for s in SPLIT_NAMES}
    counts = {"clips": len(clips), "pairs_by_type": {str(j): 0 for j in range(1, 6)}, "phrases": 0}

    for name in sorted(clips):
        clip = clips[name]
        split = assignment[name]
        for vtype, motif_ids, variant_ids in clip_pairs(clip, vocab, include_chords):
            key = (vtype, split)
            pair_rows.setdefault(key, []).append(
                {"source": name, "motif": motif_ids, "variant": variant_ids}
            )
            counts["pairs_by_type"][str(vtype)] += 1
        for record in clip_phrase_record(clip, vocab, include_chords, max_len):
            record["source"] = name
            phrase_rows[split].append(record)
            counts["phrases"] += 1

    for (vtype, split), rows in sorted(pair_rows.items()):
        write_jsonl(paths.pairs(vtype, split), rows)
    for split, rows in phrase_rows.items():
        if rows:
            write_jsonl(paths.phrases(split), rows)

    manifest = {
        "seed": seed,
        "split_ratios": list(split_ratios),
        "include_chords": include_chords,
        "max_len": max_len,
        "assignment": assignment,
        "counts": counts,
    }
    with open(paths.manifest, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest
