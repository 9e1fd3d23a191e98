"""motifdev: motif development for symbolic music.

Parse and quantize MIDI clips, label motif variants with a sliding-window
classifier, synthesize one-bar motifs from text emotion, develop motifs
into full phrases with a masked encoder-decoder, and score corpora with
variant-proportion/distance metrics.
"""

from .core import (
    ChordEvent,
    Clip,
    DecodeError,
    EncodeError,
    MetricsError,
    MidiParseError,
    MotifLabel,
    MotifdevError,
    NoteEvent,
    ValidationError,
    VariantLabel,
    quantize_clip,
    validate_clip,
)
from .emotion import VAPoint, bypass_provider, external_provider, lexicon_provider, text_to_va
from .labeling import (
    MatchRatios,
    WindowView,
    detect_repetitions,
    label_clip,
    label_variants,
    match_ratios,
    motif_criteria_violations,
    pitch_trend,
)
from .metrics import CorpusStats, corpus_stats, variant_distance, variant_proportion
from .midi import parse_midi, write_midi
from .textmotif import (
    MusicalFeatures,
    MotifSpec,
    features_to_motif,
    parse_key,
    synthesize_motif,
    va_to_features,
)
from .tokens import Token, TokenSeq, Vocabulary, decode, encode

__version__ = "0.1.0"

__all__ = [
    "ChordEvent",
    "Clip",
    "CorpusStats",
    "DecodeError",
    "EncodeError",
    "MatchRatios",
    "MetricsError",
    "MidiParseError",
    "MotifLabel",
    "MotifSpec",
    "MotifdevError",
    "MusicalFeatures",
    "NoteEvent",
    "Token",
    "TokenSeq",
    "VAPoint",
    "ValidationError",
    "VariantLabel",
    "Vocabulary",
    "WindowView",
    "bypass_provider",
    "corpus_stats",
    "decode",
    "detect_repetitions",
    "encode",
    "external_provider",
    "features_to_motif",
    "label_clip",
    "label_variants",
    "lexicon_provider",
    "match_ratios",
    "motif_criteria_violations",
    "parse_key",
    "parse_midi",
    "pitch_trend",
    "quantize_clip",
    "synthesize_motif",
    "text_to_va",
    "va_to_features",
    "validate_clip",
    "variant_distance",
    "variant_proportion",
    "write_midi",
 ]
