"""Model architecture configuration."""

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple

from config.constants import (
    LAYER_NORM_EPS,
    LONG_SILENCE_THRESHOLD,
    PHONE_ASPECTS,
    SSL_DROPOUT_RATE,
    UTTERANCE_ASPECTS,
    WORD_ASPECTS,
)
from util.validation import ConfigError

BLOCK_TYPES = ("mamba", "transformer")


@dataclass
class HMambaConfig:
    """Hyperparameters of the hierarchy. Defaults follow the published setup."""

    d: int = 128
    n_phone_blocks: int = 3
    n_word_blocks: int = 1
    n_utt_blocks: int = 1
    block_type: str = "mamba"

    # selective SSM internals
    d_state: int = 16
    expand: int = 2
    dt_rank: Optional[int] = None
    conv_kernel: int = 4

    # FFN hidden width multipliers; the Transformer baseline follows ffn_mult unless set
    ffn_mult: int = 4
    transformer_ffn_mult: Optional[int] = None
    n_heads: int = 4

    word_conv_channels: int = 256
    word_conv_kernel: int = 3
    head_hidden: int = 32
    tau: float = 1.0
    max_len: int = 256
    ln_eps: float = LAYER_NORM_EPS
    ssl_dropout: float = SSL_DROPOUT_RATE
    long_sil_threshold: float = LONG_SILENCE_THRESHOLD

    use_phone_embedding: bool = True
    use_abs_embedding: bool = True
    use_rel_embedding: bool = True

    # filled from the data at build time
    input_dim: int = 0
    n_classes: int = 0
    n_canonical: int = 0

    phone_aspects: Tuple[str, ...] = field(default=PHONE_ASPECTS)
    word_aspects: Tuple[str, ...] = field(default=WORD_ASPECTS)
    utterance_aspects: Tuple[str, ...] = field(default=UTTERANCE_ASPECTS)

    @property
    def d_inner(self) -> int:
        return self.expand * self.d

    @property
    def resolved_dt_rank(self) -> int:
        return self.dt_rank if self.dt_rank else math.ceil(self.d / 16)

    @property
    def resolved_transformer_ffn_mult(self) -> int:
        return self.transformer_ffn_mult if self.transformer_ffn_mult is not None else self.ffn_mult

    def validate(self) -> None:
        """Raise ConfigError on inconsistent settings."""
        problems = []
        if self.block_type not in BLOCK_TYPES:
            problems.append(f"block_type must be one of {BLOCK_TYPES}")
        for name in ("d", "d_state", "expand", "conv_kernel", "ffn_mult",
                     "n_heads", "word_conv_channels",
                     "word_conv_kernel", "head_hidden", "max_len"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be >= 1")
        for name in ("n_phone_blocks", "n_word_blocks", "n_utt_blocks"):
            if getattr(self, name) < 0:
                problems.append(f"{name} must be >= 0")
        if self.transformer_ffn_mult is not None and (
                not isinstance(self.transformer_ffn_mult, int) or self.transformer_ffn_mult < 1):
            problems.append("transformer_ffn_mult must be an integer >= 1")
        if self.block_type == "transformer" and self.d % self.n_heads:
            problems.append("d must be divisible by n_heads")
        if self.tau <= 0:
            problems.append("tau must be > 0")
        if not 0 <= self.ssl_dropout < 1:
            problems.append("ssl_dropout must be in [0, 1)")
        if len(self.phone_aspects) != 1 or len(self.word_aspects) != 3 \
                or len(self.utterance_aspects) != 5:
            problems.append("aspect counts must be phone=1, word=3, utterance=5")
        if problems:
            raise ConfigError("model config: " + "; ".join(problems))

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        for key in ("phone_aspects", "word_aspects", "utterance_aspects"):
            payload[key] = list(payload[key])
        return payload

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "HMambaConfig":
        known = {k: v for k, v in payload.items() if k in cls.__dataclass_fields__}
        for key in ("phone_aspects", "word_aspects", "utterance_aspects"):
            if key in known:
                known[key] = tuple(known[key])
        return cls(**known)
