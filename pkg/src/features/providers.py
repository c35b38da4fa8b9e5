"""Per-phone feature providers and the precomputed feature file."""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

import numpy as np

from config.constants import FEATURE_PROVIDERS, SYNTHETIC_PREFIX
from util.file_util import iter_jsonl, write_jsonl
from util.log_util import get_logger
from util.validation import AlignmentError, ValidationError

logger = get_logger("features.providers")

KNOWN_PROVIDERS = tuple(name for name, _, _ in FEATURE_PROVIDERS)


@dataclass
class FeatureProvider:
    """
    One named block of per-phone features.

    `blocks` maps utt_id to an [N x dim] array; is_ssl marks blocks that get
    dropout during training.
    """

    name: str
    dim: int
    is_ssl: bool = False
    blocks: Dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"provider {self.name} must have dim > 0, got {self.dim}")
        if self.name not in KNOWN_PROVIDERS and not self.name.startswith(SYNTHETIC_PREFIX):
            raise ValidationError(
                f"unknown provider {self.name!r}; expected one of {KNOWN_PROVIDERS} "
                f"or a {SYNTHETIC_PREFIX}* name"
            )

    def spec(self) -> Dict:
        return {"name": self.name, "dim": self.dim, "is_ssl": self.is_ssl}

    def block(self, utt_id: str, n_rows: int) -> np.ndarray:
        """The [N x dim] block of one utterance, checked against the expected row count."""
        if utt_id not in self.blocks:
            raise AlignmentError(f"provider {self.name} has no features for {utt_id}")
        values = self.blocks[utt_id]
        if values.shape != (n_rows, self.dim):
            raise AlignmentError(
                f"provider {self.name} supplies {values.shape[0]} rows of width "
                f"{values.shape[1] if values.ndim > 1 else '?'} for {utt_id}; "
                f"expected {n_rows} rows of width {self.dim}"
            )
        return values


def default_manifest(names: Iterable[str]) -> List[str]:
    """Known providers in their declared order, then the rest by name."""
    names = list(names)
    known = [n for n in KNOWN_PROVIDERS if n in names]
    return known + sorted(n for n in names if n not in KNOWN_PROVIDERS)


class FeatureStore:
    """Providers backed by one feature JSONL file."""

    def __init__(self, providers: List[FeatureProvider]):
        self.providers = providers

    @property
    def manifest(self) -> List[str]:
        return [p.name for p in self.providers]

    @property
    def width(self) -> int:
        return int(np.sum([p.dim for p in self.providers]))

    def select(self, exclude: Optional[Iterable[str]] = None) -> List[FeatureProvider]:
        """Providers minus the excluded names; unknown exclusions are rejected."""
        exclude = set(exclude or [])
        unknown = exclude - set(self.manifest)
        if unknown:
            raise ValidationError(f"cannot exclude unknown provider(s): {sorted(unknown)}")
        kept = [p for p in self.providers if p.name not in exclude]
        if not kept:
            raise ValidationError("every feature provider was excluded")
        return kept

    @classmethod
    def load(cls, path: str) -> "FeatureStore":
        """
        Read a feature file: one line per utterance with its provider manifest and rows.

        Parameters:
            path (str): Feature JSONL file

        Returns:
            FeatureStore: Providers holding every utterance's blocks
        """

        store = cls.from_rows(iter_jsonl(path), path)
        logger.info("Loaded features for %d utterances from %s", len(store.providers[0].blocks), path)
        return store

    @classmethod
    def from_rows(cls, rows: Iterable[Dict], path: str = "<features>") -> "FeatureStore":
        """Providers from parsed feature lines (see load)."""
        providers: Optional[List[FeatureProvider]] = None
        for line_number, row in enumerate(rows, start=1):
            specs = row.get("providers")
            utt_id = row.get("utt_id")
            if not specs or utt_id is None:
                raise ValidationError(f"{path}:{line_number}: needs utt_id and providers")
            if providers is None:
                providers = [
                    FeatureProvider(s["name"], int(s["dim"]), bool(s["is_ssl"])) for s in specs
                ]
            elif [p.spec() for p in providers] != [
                {"name": s["name"], "dim": int(s["dim"]), "is_ssl": bool(s["is_ssl"])} for s in specs
            ]:
                raise ValidationError(f"{path}:{line_number}: provider manifest differs from line 1")

            matrix = np.asarray(row.get("rows"), dtype=np.float64)
            width = int(np.sum([p.dim for p in providers]))
            if matrix.ndim != 2 or matrix.shape[1] != width:
                raise AlignmentError(
                    f"{path}:{line_number}: {utt_id} rows have shape {matrix.shape}, "
                    f"manifest width is {width}"
                )
            start = 0
            for provider in providers:
                provider.blocks[utt_id] = matrix[:, start:start + provider.dim]
                start += provider.dim

        if providers is None:
            raise ValidationError(f"{path}: no feature rows")
        return cls(providers)


def feature_line(utt_id: str, providers: List[FeatureProvider], decimals: int = 6) -> Dict:
    """One feature-file line for an utterance."""
    matrix = np.concatenate([p.blocks[utt_id] for p in providers], axis=1)
    return {
        "utt_id": utt_id,
        "providers": [p.spec() for p in providers],
        "rows": np.round(matrix, decimals).tolist(),
    }


def save_features(path: str, utt_ids: List[str], providers: List[FeatureProvider]) -> None:
    write_jsonl(path, (feature_line(utt_id, providers) for utt_id in utt_ids))
