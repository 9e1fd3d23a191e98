"""Command-line pipeline: synth-corpus, label, build-dataset, train, motif,
melody, and eval.

Configuration comes from an optional JSON file plus flags; flags win.
Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import dataset as dataset_mod
from . import metrics as metrics_mod
from . import reporting
from .core import MetricsError, MotifdevError, ValidationError
from .emotion import (
    VAPoint,
    external_provider,
    lexicon_provider,
    load_lexicon,
    text_to_va,
)
from .labeling import label_clip, motif_criteria_violations
from .midi import parse_midi, write_midi
from .model import (
    BranchModels,
    PRESETS,
    SamplingConfig,
    generate_phrase,
    generate_variants,
    load_checkpoint,
    make_phrase_sample,
    save_checkpoint,
    train_branch,
    train_phrase,
)
from .model.checkpoint import check_vocab
from .model.masks import EncoderLayout
from .model.training import Pair, PhraseSample
from .synth import generate_corpus
from .textmotif import parse_key, synthesize_motif
from .tokens import Vocabulary, clip_fragment, decode

USAGE_EXIT = 1
DATA_EXIT = 2

CONFIG_KEYS = {
    "seed": 0,
    "key": "C4",
    "provider": "lexicon",
    "preset": "desk",
    "split": [8.5, 1.0, 0.5],
    "step_ticks": 16,
    "include_chords": False,
    "invert_valence_mode": False,
    "temperature": 0.0,
    "bars": 16,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we use 1
        self.print_usage(sys.stderr)
        raise UsageError(message)


class UsageError(Exception):
    def __init__(self, message):
        self.message = message
        super().__init__(message)


@dataclass
class Settings:
    """Merged configuration: file values overridden by present flags."""

    values: dict

    @classmethod
    def merge(cls, args: argparse.Namespace) -> "Settings":
        values = dict(CONFIG_KEYS)
        config_path = getattr(args, "config", None)
        if config_path:
            with open(config_path, encoding="utf-8") as fh:
                loaded = json.load(fh)
            unknown = set(loaded) - set(CONFIG_KEYS)
            if unknown:
                raise ValidationError(f"unknown config keys: {sorted(unknown)}")
            values.update(loaded)
        for key in CONFIG_KEYS:
            flag = getattr(args, key, None)
            if flag is not None:
                values[key] = flag
        return cls(values)

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None


def _read_clips(in_dir: Path) -> dict:
    files = sorted(Path(in_dir).glob("*.mid")) + sorted(Path(in_dir).glob("*.midi"))
    if not files:
        raise ValidationError(f"no .mid files found in {in_dir}")
    clips = {}
    for path in files:
        clips[path.stem] = parse_midi(path.read_bytes())
    return clips


def _parse_va(text: str) -> VAPoint:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValidationError(f"--va expects 'valence,arousal', got {text!r}")
    return VAPoint(float(parts[0]), float(parts[1]))


def _resolve_va(args, settings: Settings) -> VAPoint:
    if getattr(args, "va", None):
        return _parse_va(args.va)
    if not getattr(args, "text", None):
        raise ValidationError("either --va or --text is required")
    name = settings.provider
    if name == "bypass":
        raise ValidationError("provider 'bypass' needs --va")
    if name == "lexicon":
        table = load_lexicon(args.lexicon) if getattr(args, "lexicon", None) else None
        provider = lexicon_provider(table)
    elif name == "external":
        if not getattr(args, "external_cmd", None):
            raise ValidationError("provider 'external' needs --external-cmd")
        provider = external_provider(args.external_cmd)
    else:
        raise ValidationError(f"unknown VA provider {name!r}")
    return text_to_va(args.text, provider)


def cmd_synth_corpus(args) -> int:
    settings = Settings.merge(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    clips = generate_corpus(
        seed=settings.seed,
        n_clips=args.clips,
        n_variants=args.variants,
        filler=not args.no_filler,
    )
    for i, clip in enumerate(clips):
        (out_dir / f"clip_{i:04d}.mid").write_bytes(write_midi(clip))
    print(f"wrote {len(clips)} clips to {out_dir}")
    return 0


def cmd_label(args) -> int:
    settings = Settings.merge(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    clips = _read_clips(args.in_dir)
    per_clip = {}
    warnings = {}
    for name, clip in sorted(clips.items()):
        if not clip.motif_labels:
            raise ValidationError(f"clip {name!r} has no motif label to expand")
        labeled = label_clip(clip, step=settings.step_ticks)
        (out_dir / f"{name}.mid").write_bytes(write_midi(labeled))
        counts = {}
        for v in labeled.variant_labels:
            counts[v.type] = counts.get(v.type, 0) + 1
        per_clip[name] = counts
        problems = []
        for motif in labeled.motif_labels:
            problems += motif_criteria_violations(labeled, motif, labeled.variant_labels)
        if problems:
            warnings[name] = problems
    report = reporting.write_label_report(per_clip, out_dir / "labels.json", warnings)
    print(f"labeled {len(clips)} clips; report at {report}")
    return 0


def cmd_build_dataset(args) -> int:
    settings = Settings.merge(args)
    clips = _read_clips(args.in_dir)
    manifest = dataset_mod.build_dataset(
        clips,
        Path(args.out),
        seed=settings.seed,
        split_ratios=tuple(settings.split),
        include_chords=settings.include_chords,
        max_len=args.max_len,
    )
    counts = manifest["counts"]
    print(
        f"dataset at {args.out}: {counts['clips']} clips, "
        f"{counts['phrases']} phrase samples, pairs by type {counts['pairs_by_type']}"
    )
    return 0


def cmd_motif(args) -> int:
    settings = Settings.merge(args)
    va = _resolve_va(args, settings)
    key = parse_key(settings.key)
    clip, features, spec = synthesize_motif(
        va, key, settings.seed, invert_valence_mode=settings.invert_valence_mode
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(write_midi(clip))
    print(
        f"motif at {out}: mode={features.mode} nd={features.nd:.2f} "
        f"nad={features.nad:.2f} notes={spec.non}"
    )
    return 0


def _load_models(checkpoint_dir: Path):
    checkpoint_dir = Path(checkpoint_dir)
    vocab = Vocabulary.load(checkpoint_dir / "vocab.txt")
    branches = {}
    for j in range(1, 6):
        model, _, vtype = load_checkpoint(checkpoint_dir / f"branch_{j}.pt", "branch")
        check_vocab(model.vocab_size, vocab)
        if vtype != j:
            raise ValidationError(f"branch_{j}.pt trained for type {vtype}")
        branches[j] = model
    phrase, _, _ = load_checkpoint(checkpoint_dir / "phrase.pt", "phrase")
    check_vocab(phrase.vocab_size, vocab)
    return BranchModels(models=branches, vocab=vocab), phrase


def cmd_melody(args) -> int:
    settings = Settings.merge(args)
    if args.motif_midi:
        clip = parse_midi(Path(args.motif_midi).read_bytes())
        if clip.motif_labels:
            label = clip.motif_labels[0]
            motif_events = clip_fragment(clip, label.start, label.end)
        else:
            motif_events = clip_fragment(clip, 0, int(clip.end_tick))
    else:
        va = _resolve_va(args, settings)
        key = parse_key(settings.key)
        clip, _, _ = synthesize_motif(
            va, key, settings.seed, invert_valence_mode=settings.invert_valence_mode
        )
        label = clip.motif_labels[0]
        motif_events = clip_fragment(clip, label.start, label.end)
    if not motif_events:
        raise ValidationError("motif has no notes")

    branches, phrase_model = _load_models(args.checkpoints)
    sampling = SamplingConfig(
        temperature=settings.temperature,
        seed=settings.seed,
        max_bars=settings.bars,
        min_bars=settings.bars,
        max_len=phrase_model.cfg.max_len,
    )
    variant_set = generate_variants(motif_events, branches, sampling)
    seq = generate_phrase(variant_set, phrase_model, branches.vocab, sampling)
    melody = decode(seq, truncate_overlaps=True)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(write_midi(melody))
    print(
        f"melody at {out}: {len(melody.melody)} notes, {melody.n_bars} bars, "
        f"{len(melody.variant_labels)} variant regions"
    )
    return 0


def _load_pairs(path: Path) -> list[Pair]:
    return [
        Pair(src=tuple(r["motif"]), tgt=tuple(r["variant"]))
        for r in dataset_mod.read_jsonl(path)
    ]


def _load_phrases(path: Path, vocab: Vocabulary) -> list[PhraseSample]:
    samples = []
    for row in dataset_mod.read_jsonl(path):
        target = row["target"]
        layout = EncoderLayout(spans=tuple(tuple(s) for s in row["spans"]))
        tokens = vocab.decode_ids(target)
        samples.append(
            make_phrase_sample(vocab, tokens, vocab.decode_ids(row["encoder"]), layout, row["motif_len"])
        )
    return samples


def cmd_train(args) -> int:
    settings = Settings.merge(args)
    data = dataset_mod.DatasetPaths(Path(args.dataset))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    vocab = Vocabulary.load(data.vocab)
    vocab.save(out_dir / "vocab.txt")

    branch_list = [int(b) for b in args.branches.split(",")] if args.branches else list(range(1, 6))
    branch_pairs: dict[int, list[Pair]] = {}
    for j in branch_list:
        path = data.pairs(j, "train")
        if not path.exists():
            raise ValidationError(f"no training pairs for type {j} at {path}")
        branch_pairs[j] = _load_pairs(path)
    samples: list[PhraseSample] = []
    if not args.skip_phrase:
        phrase_path = data.phrases("train")
        if not phrase_path.exists():
            raise ValidationError(f"no phrase samples at {phrase_path}")
        samples = _load_phrases(phrase_path, vocab)

    config = PRESETS[settings.preset].with_overrides(seed=settings.seed)
    if args.epochs:
        config = config.with_overrides(epochs=args.epochs)
    if args.max_len:
        config = config.with_overrides(max_len=args.max_len)
    else:
        # grow the position table to fit the data; 32-aligned for stable
        # reruns as a corpus grows slowly
        longest = max(
            [max(len(p.src), len(p.tgt) + 1) for ps in branch_pairs.values() for p in ps]
            + [max(len(s.enc_ids), len(s.dec_input)) for s in samples],
            default=0,
        )
        if longest > config.max_len:
            fitted = (longest + 31) // 32 * 32
            config = config.with_overrides(max_len=fitted)

    traces = {}
    for j in branch_list:
        pairs = branch_pairs[j]
        model, trace = train_branch(
            pairs, config, vocab, stop_at_accuracy=args.stop_accuracy
        )
        save_checkpoint(out_dir / f"branch_{j}.pt", model, "branch", variant_type=j)
        traces[f"branch_{j}"] = trace
        print(f"branch {j}: {len(pairs)} pairs, final nll {trace[-1].nll:.4f}")

    if not args.skip_phrase:
        model, trace = train_phrase(
            samples, config, vocab, stop_at_accuracy=args.stop_accuracy
        )
        save_checkpoint(out_dir / "phrase.pt", model, "phrase")
        traces["phrase"] = trace
        print(f"phrase: {len(samples)} samples, final nll {trace[-1].nll:.4f}")

    reporting.write_loss_log(traces, out_dir / "loss_log.txt")
    reporting.write_loss_figure(traces, out_dir / "loss_curve.png")
    return 0


def cmd_eval(args) -> int:
    clips = _read_clips(args.in_dir)
    stats = metrics_mod.corpus_stats(list(clips.values()))
    if sum(stats.counts) == 0:
        raise MetricsError("corpus has no variant labels; nothing to evaluate")
    reference = None
    if args.reference:
        fields = [float(x) for x in args.reference.split(",")]
        if len(fields) not in (5, 6):
            raise ValidationError("--reference expects 5 proportions plus optional distance")
        reference = {"name": "reference", "vp": fields[:5]}
        if len(fields) == 6:
            reference["vd"] = fields[5]
    paths = reporting.write_eval_report(
        stats, Path(args.out), name=args.name, reference=reference
    )
    sys.stdout.write(metrics_mod.format_stats_table(stats, name=args.name))
    print(f"report at {paths['json']}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="motifdev", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("synth-corpus", help="generate a synthetic labeled corpus")
    common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--clips", type=int, default=200)
    p.add_argument("--variants", type=int, default=3)
    p.add_argument("--no-filler", action="store_true")
    p.set_defaults(func=cmd_synth_corpus)

    p = sub.add_parser("label", help="auto-label variants in motif-labeled MIDI files")
    common(p)
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--step-ticks", dest="step_ticks", type=int, default=None)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("build-dataset", help="tokenize a labeled corpus into splits")
    common(p)
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", type=lambda s: [float(x) for x in s.split(",")], default=None)
    p.add_argument("--include-chords", dest="include_chords", action="store_const", const=True, default=None)
    p.add_argument("--max-len", type=int, default=1024)
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("motif", help="text or VA to a one-bar motif MIDI")
    common(p)
    p.add_argument("--text")
    p.add_argument("--va")
    p.add_argument("--key", default=None)
    p.add_argument("--provider", default=None, choices=["lexicon", "bypass", "external"])
    p.add_argument("--lexicon", help="TSV word/valence/arousal table")
    p.add_argument("--external-cmd", help="command printing 'valence arousal'")
    p.add_argument("--invert-valence-mode", dest="invert_valence_mode", action="store_const", const=True, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_motif)

    p = sub.add_parser("melody", help="motif MIDI or text to a full phrase MIDI")
    common(p)
    p.add_argument("--motif-midi")
    p.add_argument("--text")
    p.add_argument("--va")
    p.add_argument("--key", default=None)
    p.add_argument("--provider", default=None, choices=["lexicon", "bypass", "external"])
    p.add_argument("--lexicon")
    p.add_argument("--external-cmd")
    p.add_argument("--invert-valence-mode", dest="invert_valence_mode", action="store_const", const=True, default=None)
    p.add_argument("--checkpoints", required=True)
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--bars", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_melody)

    p = sub.add_parser("train", help="train branch and phrase models on a dataset")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--preset", default=None, choices=list(PRESETS))
    p.add_argument("--epochs", type=int)
    p.add_argument("--max-len", type=int)
    p.add_argument("--branches", help="comma-separated subset, e.g. 1,2")
    p.add_argument("--skip-phrase", action="store_true")
    p.add_argument("--stop-accuracy", type=float)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="variant metrics over a labeled corpus")
    common(p)
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--name", default="corpus")
    p.add_argument("--reference", help="5 proportions plus optional distance, comma-separated")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc.message}", file=sys.stderr)
        return USAGE_EXIT
    except (MotifdevError, FileNotFoundError, NotADirectoryError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
