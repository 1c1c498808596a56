from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass

from ..channel import AWGN, RAYLEIGH2
from ..validation import ParameterError, check_count

AUX_CHANNELS = ("zero", "delta", "square")


@dataclass(frozen=True)
class NetConfig:
    """Window classifier hyperparameters.

    ``hidden_units`` is per direction, so each bidirectional layer emits
    ``2 * hidden_units`` features. ``aux_channel`` chooses the second input
    channel: ``"zero"`` (constant 0), ``"delta"`` (first difference) or
    ``"square"`` (squared sample).
    """

    window_length: int = 32
    input_channels: int = 2
    hidden_units: int = 64
    attention_heads: int = 4
    attention_dim: int = 128
    dropout_p: float = 0.2
    classes: int = 2
    aux_channel: str = "zero"

    def __post_init__(self):
        check_count("window_length", self.window_length, minimum=1)
        check_count("hidden_units", self.hidden_units, minimum=1)
        check_count("attention_heads", self.attention_heads, minimum=1)
        check_count("attention_dim", self.attention_dim, minimum=1)
        if self.input_channels != 2:
            raise ParameterError("input_channels is fixed at 2 (sample + auxiliary channel)")
        if self.classes != 2:
            raise ParameterError("the window classifier is binary (classes=2)")
        if self.attention_dim % self.attention_heads:
            raise ParameterError(
                f"attention_dim={self.attention_dim} not divisible by heads={self.attention_heads}"
            )
        if not (0.0 <= self.dropout_p < 1.0):
            raise ParameterError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if self.aux_channel not in AUX_CHANNELS:
            raise ParameterError(f"aux_channel must be one of {AUX_CHANNELS}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "NetConfig":
        return cls(**d)

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class TrainingConfig:
    dataset_size: int = 200_000
    batch_size: int = 128
    learning_rate: float = 1e-3
    validation_fraction: float = 0.2
    max_epochs: int = 50
    patience: int = 5
    train_snr_range_db: tuple[float, float] | None = None
    channel_kind: str = AWGN
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        check_count("dataset_size", self.dataset_size, minimum=2)
        check_count("batch_size", self.batch_size, minimum=1)
        check_count("max_epochs", self.max_epochs, minimum=1)
        check_count("patience", self.patience, minimum=1)
        if not 0.0 < self.validation_fraction < 1.0:
            raise ParameterError("validation_fraction must be in (0, 1)")
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise ParameterError("learning_rate must be positive")
        if self.channel_kind not in (AWGN, RAYLEIGH2):
            raise ParameterError(f"unknown channel kind {self.channel_kind!r}")
        if self.train_snr_range_db is None:
            rng = (12.0, 14.0) if self.channel_kind == AWGN else (14.0, 16.0)
            object.__setattr__(self, "train_snr_range_db", rng)
        lo, hi = (float(v) for v in self.train_snr_range_db)
        if lo > hi:
            raise ParameterError(f"training SNR range ({lo}, {hi}) has lo > hi")
        object.__setattr__(self, "train_snr_range_db", (lo, hi))
