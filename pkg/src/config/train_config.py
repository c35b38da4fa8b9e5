"""Training and loss configuration."""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from util.validation import ConfigError


@dataclass
class LossConfig:
    """Weights of the joint objective: assessment MSE plus beta times the decoupled cross-entropy."""

    omega_phone: float = 1.0
    omega_word: float = 1.0
    omega_utterance: float = 1.0
    alpha: float = 0.7
    beta: float = 0.003
    mu_m: Optional[float] = None
    mu_h: Optional[float] = None
    dexent_enabled: bool = True

    @property
    def omega(self) -> Dict[str, float]:
        return {
            "phone": self.omega_phone,
            "word": self.omega_word,
            "utterance": self.omega_utterance,
        }

    @property
    def mis_weight(self) -> float:
        """(mu_h / mu_m) ** alpha, or 1 when deXent is disabled."""
        if not self.dexent_enabled:
            return 1.0
        if not self.mu_m or not self.mu_h:
            raise ConfigError("deXent needs mu_m > 0 and mu_h > 0")
        return (self.mu_h / self.mu_m) ** self.alpha

    def validate(self) -> None:
        problems = []
        if self.beta < 0:
            problems.append("beta must be >= 0")
        if min(self.omega.values()) < 0:
            problems.append("omega weights must be >= 0")
        if self.dexent_enabled and self.mu_m is not None and self.mu_m <= 0:
            problems.append("mu_m must be > 0 when deXent is active")
        if self.dexent_enabled and self.mu_h is not None and self.mu_h <= 0:
            problems.append("mu_h must be > 0 when deXent is active")
        if problems:
            raise ConfigError("loss config: " + "; ".join(problems))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TrainConfig:
    """Optimization protocol."""

    epochs: int = 20
    batch_size: int = 32
    lr_main: float = 2e-3
    lr_utt_head: float = 9e-5
    warmup_frac: float = 0.4
    hold_frac: float = 0.4
    adam_betas: Tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    seeds: List[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    dev_fraction_buckets: int = 10
    write_curves: bool = False
    max_steps: Optional[int] = None

    def validate(self) -> None:
        problems = []
        if self.epochs < 1:
            problems.append("epochs must be >= 1")
        if self.batch_size < 1:
            problems.append("batch_size must be >= 1")
        if self.lr_main <= 0 or self.lr_utt_head <= 0:
            problems.append("learning rates must be > 0")
        if self.warmup_frac < 0 or self.hold_frac < 0 \
                or self.warmup_frac + self.hold_frac > 1:
            problems.append("warmup_frac + hold_frac must be <= 1 (both >= 0)")
        if self.dev_fraction_buckets == 1 or self.dev_fraction_buckets < 0:
            problems.append("dev_fraction_buckets must be 0 (no dev split) or >= 2")
        if self.max_steps is not None and self.max_steps < 1:
            problems.append("max_steps must be >= 1")
        if not self.seeds:
            problems.append("at least one seed is required")
        if problems:
            raise ConfigError("train config: " + "; ".join(problems))

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload["adam_betas"] = list(self.adam_betas)
        return payload

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "TrainConfig":
        known = {k: v for k, v in payload.items() if k in cls.__dataclass_fields__}
        if "adam_betas" in known:
            known["adam_betas"] = tuple(known["adam_betas"])
        return cls(**known)
