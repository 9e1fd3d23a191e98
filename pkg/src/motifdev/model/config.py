"""Model hyperparameters and the two standard presets."""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..core import ValidationError


@dataclass(frozen=True)
class ModelConfig:
    layers_enc: int = 2
    layers_dec: int = 2
    heads: int = 2
    d_model: int = 64
    d_ff: int = 128
    max_len: int = 256
    lr: float = 1e-3
    betas: tuple[float, float] = (0.9, 0.99)
    batch: int = 16
    epochs: int = 200
    seed: int = 0
    dtype: str = "float32"
    dropout: float = 0.1

    def __post_init__(self):
        if self.d_model % self.heads:
            raise ValidationError(
                f"d_model {self.d_model} not divisible by heads {self.heads}"
            )
        if self.dtype not in ("float32", "float64"):
            raise ValidationError(f"dtype must be float32 or float64, got {self.dtype}")

    def with_overrides(self, **kwargs) -> "ModelConfig":
        return replace(self, **kwargs)


# Small enough to train on a laptop CPU in minutes.
DESK_CONFIG = ModelConfig()

# The published full-scale setting; provided for completeness, far beyond
# desk-scale budgets.
FULL_CONFIG = ModelConfig(
    layers_enc=6,
    layers_dec=6,
    heads=8,
    d_model=256,
    d_ff=2048,
    max_len=1024,
    lr=2e-4,
    betas=(0.9, 0.99),
    batch=4,
    epochs=1000,
)

PRESETS = {"desk": DESK_CONFIG, "full": FULL_CONFIG}
