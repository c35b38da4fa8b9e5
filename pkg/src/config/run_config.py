"""Key-value run configuration with command-line overrides."""

import json
import os
from dataclasses import dataclass, field, fields
from typing import Any, Dict, Iterable, List, Optional

from config.constants import FORMAT_VERSION
from config.model_config import HMambaConfig
from config.train_config import LossConfig, TrainConfig
from util.validation import ConfigError

SECTIONS = ("model", "train", "loss", "features")
FEATURE_KEYS = ("exclude",)


def parse_value(text: str) -> Any:
    """Parse a JSON literal, falling back to the raw string."""
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_assignment(line: str, origin: str) -> tuple:
    """
    Split `section.key = value` into its parts.

    Parameters:
        line (str): One assignment
        origin (str): Where the line came from, used in error messages

    Returns:
        tuple: (dotted key, parsed value)
    """

    if "=" not in line:
        raise ConfigError(f"{origin}: expected 'key = value', got {line!r}")
    key, value = line.split("=", 1)
    key = key.strip()
    if "." not in key:
        raise ConfigError(f"{origin}: key {key!r} needs a section ({', '.join(s + '.' for s in SECTIONS)})")
    return key, parse_value(value)


def read_config_file(path: str) -> Dict[str, Any]:
    """Read a flat key-value config file; '#' starts a comment."""
    if not os.path.isfile(path):
        raise ConfigError(f"Config file does not exist: {path}")
    assignments = {}
    with open(path, "r", encoding="utf-8") as file:
        for line_number, raw in enumerate(file, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, value = parse_assignment(line, f"{path}:{line_number}")
            assignments[key] = value
    return assignments


def _as_list(value: Any) -> List[str]:
    if value is None or value == "":
        return []
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    if isinstance(value, (list, tuple)):
        return [str(part) for part in value]
    raise ConfigError(f"features.exclude must be a list or comma-separated string, got {value!r}")


@dataclass
class RunConfig:
    """Effective configuration of one command: model, training, loss and feature choices."""

    model: HMambaConfig = field(default_factory=HMambaConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    features_exclude: List[str] = field(default_factory=list)

    @classmethod
    def load(
        cls, path: Optional[str] = None, overrides: Optional[Iterable[str]] = None
    ) -> "RunConfig":
        """
        Build a config from defaults, an optional file, then `key=value` overrides.

        Parameters:
            path (str, optional): Key-value config file
            overrides (Iterable[str], optional): `--set` assignments; these win

        Returns:
            RunConfig: Validated configuration
        """

        assignments = read_config_file(path) if path else {}
        for item in overrides or []:
            key, value = parse_assignment(item, "--set")
            assignments[key] = value

        config = cls()
        config.apply(assignments)
        config.validate()
        return config

    def apply(self, assignments: Dict[str, Any]) -> None:
        """Apply dotted assignments; unknown keys raise ConfigError."""
        unknown = []
        for key, value in assignments.items():
            section, _, name = key.partition(".")
            if section == "features" and name in FEATURE_KEYS:
                self.features_exclude = _as_list(value)
                continue
            target = {"model": self.model, "train": self.train, "loss": self.loss}.get(section)
            if target is None or name not in {f.name for f in fields(target)}:
                unknown.append(key)
                continue
            setattr(target, name, _coerce(getattr(target, name), value, key))
        if unknown:
            raise ConfigError(f"Unknown config key(s): {', '.join(sorted(unknown))}")

    def validate(self) -> None:
        self.model.validate()
        self.train.validate()
        self.loss.validate()

    def to_dict(self) -> Dict[str, Any]:
        """Reproducibility stamp embedded into every artifact."""
        return {
            "format_version": FORMAT_VERSION,
            "model": self.model.to_dict(),
            "train": self.train.to_dict(),
            "loss": self.loss.to_dict(),
            "features": {"exclude": list(self.features_exclude)},
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "RunConfig":
        loss_payload = payload.get("loss", {})
        loss = LossConfig(**{
            k: v for k, v in loss_payload.items() if k in LossConfig.__dataclass_fields__
        })
        return cls(
            model=HMambaConfig.from_dict(payload.get("model", {})),
            train=TrainConfig.from_dict(payload.get("train", {})),
            loss=loss,
            features_exclude=list(payload.get("features", {}).get("exclude", [])),
        )


def _coerce(current: Any, value: Any, key: str) -> Any:
    """Match the type of the default where that is unambiguous."""
    if isinstance(current, bool):
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{key} expects true/false, got {value!r}")
    if isinstance(current, int):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"{key} expects an integer, got {value!r}")
        return int(value)
    if isinstance(current, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} expects a number, got {value!r}")
        return float(value)
    if isinstance(current, tuple):
        if not isinstance(value, list):
            raise ConfigError(f"{key} expects a list, got {value!r}")
        return tuple(value)
    if isinstance(current, list):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return [value]
        if isinstance(value, str):
            return [parse_value(part) for part in value.split(",") if part.strip()]
        if not isinstance(value, list):
            raise ConfigError(f"{key} expects a list, got {value!r}")
        return value
    return value
