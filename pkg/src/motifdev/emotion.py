"""Text to valence/arousal providers.

Valence follows the mapping convention used throughout this toolkit:
LOW valence is the positive pole (valence <= 5 selects the major mode),
so "happy" sits near (2.5, 7.5) and "sad" near (7.5, 2.5). Both axes run
on a 1..9 scale with 5 as the neutral midpoint.

Providers are pluggable: ``bypass`` accepts explicit values, ``lexicon``
averages a word table, and ``external`` shells out to any command that
prints two numbers.
"""

from __future__ import annotations

import re
import shlex
import subprocess
from dataclasses import dataclass
from typing import Callable

from .core import MotifdevError, ValidationError

VALENCE_MIN, VALENCE_MAX = 1.0, 9.0
AROUSAL_MAX = 9.0

NEUTRAL = (5.0, 5.0)


class ProviderError(MotifdevError):
    """A VA provider failed; carries the provider name."""

    def __init__(self, provider: str, message: str):
        self.provider = provider
        super().__init__(f"provider {provider!r}: {message}")


@dataclass(frozen=True)
class VAPoint:
    """A point in valence/arousal space."""

    valence: float
    arousal: float

    def __post_init__(self):
        if not VALENCE_MIN <= self.valence <= VALENCE_MAX:
            raise ValidationError(
                f"valence {self.valence} outside [{VALENCE_MIN}, {VALENCE_MAX}]"
            )
        if not 0 < self.arousal <= AROUSAL_MAX:
            raise ValidationError(f"arousal {self.arousal} outside (0, {AROUSAL_MAX}]")


# Small built-in word table; enough for smoke use, replaceable via TSV.
DEFAULT_LEXICON: dict[str, tuple[float, float]] = {
    "happy": (2.5, 7.5),
    "joyful": (2.0, 8.0),
    "cheerful": (2.5, 7.0),
    "excited": (3.0, 8.5),
    "energetic": (3.5, 8.5),
    "bright": (3.0, 6.5),
    "sweet": (3.0, 5.5),
    "romantic": (3.5, 5.0),
    "tender": (3.5, 4.0),
    "calm": (4.0, 2.5),
    "peaceful": (4.0, 2.0),
    "gentle": (4.0, 3.0),
    "dreamy": (4.5, 3.5),
    "sad": (7.5, 2.5),
    "melancholy": (7.0, 3.0),
    "lonely": (7.5, 3.0),
    "gloomy": (8.0, 2.5),
    "dark": (7.5, 4.0),
    "angry": (8.0, 8.0),
    "tense": (7.0, 7.5),
    "anxious": (7.0, 7.0),
    "furious": (8.5, 8.5),
}

_WORD_RE = re.compile(r"[a-z']+")


def load_lexicon(path) -> dict[str, tuple[float, float]]:
    """Read a word<TAB>valence<TAB>arousal table."""
    table: dict[str, tuple[float, float]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValidationError(f"lexicon line {line_no} is not word<TAB>v<TAB>a")
            table[parts[0].lower()] = (float(parts[1]), float(parts[2]))
    return table


def lexicon_provider(table: dict[str, tuple[float, float]] | None = None) -> Callable[[str], VAPoint]:
    """Average the VA of every matched word; neutral (5,5) when none match."""
    words = table if table is not None else DEFAULT_LEXICON

    def provide(text: str) -> VAPoint:
        hits = [words[w] for w in _WORD_RE.findall(text.lower()) if w in words]
        if not hits:
            return VAPoint(*NEUTRAL)
        v = sum(h[0] for h in hits) / len(hits)
        a = sum(h[1] for h in hits) / len(hits)
        return VAPoint(v, a)

    return provide


def bypass_provider(valence: float, arousal: float) -> Callable[[str], VAPoint]:
    """Ignore the text entirely and return fixed VA values."""
    point = VAPoint(valence, arousal)
    return lambda text: point


def external_provider(command: str, timeout: float = 30.0) -> Callable[[str], VAPoint]:
    """Adapter for an external emotion model: run a command with the text
    as its final argument and parse "valence arousal" from stdout."""

    def provide(text: str) -> VAPoint:
        argv = shlex.split(command) + [text]
        try:
            result = subprocess.run(
                argv, capture_output=True, text=True, timeout=timeout, check=True
            )
        except (OSError, subprocess.SubprocessError) as exc:
            raise ProviderError("external", str(exc)) from exc
        fields = result.stdout.split()
        if len(fields) < 2:
            raise ProviderError("external", f"expected 'valence arousal', got {result.stdout!r}")
        try:
            return VAPoint(float(fields[0]), float(fields[1]))
        except (ValueError, ValidationError) as exc:
            raise ProviderError("external", str(exc)) from exc

    return provide


def text_to_va(text: str, provider: Callable[[str], VAPoint] | None = None) -> VAPoint:
    """Map text to a VA point through the configured provider."""
    if not text or not text.strip():
        raise ValidationError("text must be non-empty")
    provide = provider if provider is not None else lexicon_provider()
    try:
        return provide(text)
    except (ValidationError, ProviderError):
        raise
    except Exception as exc:  # surface unexpected provider bugs with a name
        name = getattr(provide, "__name__", provide.__class__.__name__)
        raise ProviderError(name, str(exc)) from exc
