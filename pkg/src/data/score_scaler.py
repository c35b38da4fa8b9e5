"""Linear maps between declared raw score ranges and [0, 1]."""

from dataclasses import replace
from typing import Dict, List, Optional

from config.constants import GRANULARITIES
from data.corpus_manager import UtteranceRecord
from util.validation import ValidationError


class ScoreScaler:
    """Per (granularity, aspect) [min, max] ranges keyed as "word.stress"."""

    def __init__(self, ranges: Dict[str, List[float]]):
        self.ranges = {key: (float(low), float(high)) for key, (low, high) in ranges.items()}
        for key, (low, high) in self.ranges.items():
            if not high > low:
                raise ValidationError(f"score range for {key} must have max > min, got [{low}, {high}]")

    def _range(self, key: str):
        if key not in self.ranges:
            raise ValidationError(f"no declared score range covers {key}")
        return self.ranges[key]

    def normalize(self, key: str, value: Optional[float]) -> Optional[float]:
        if value is None:
            return None
        low, high = self._range(key)
        return (value - low) / (high - low)

    def denormalize(self, key: str, value: Optional[float]) -> Optional[float]:
        if value is None:
            return None
        low, high = self._range(key)
        return value * (high - low) + low

    def check_covers(self) -> None:
        """Every aspect of every granularity must have a range."""
        missing = [
            f"{granularity}.{aspect}"
            for granularity, aspects in GRANULARITIES.items()
            for aspect in aspects
            if f"{granularity}.{aspect}" not in self.ranges
        ]
        if missing:
            raise ValidationError(f"score ranges missing for: {', '.join(missing)}")

    def to_dict(self) -> Dict[str, List[float]]:
        return {key: [low, high] for key, (low, high) in self.ranges.items()}


def _map_record(record: UtteranceRecord, convert) -> UtteranceRecord:
    return replace(
        record,
        phone_scores=[convert("phone.accuracy", s) for s in record.phone_scores],
        word_scores=[
            {aspect: convert(f"word.{aspect}", value) for aspect, value in scores.items()}
            for scores in record.word_scores
        ],
        utterance_scores={
            aspect: convert(f"utterance.{aspect}", value)
            for aspect, value in record.utterance_scores.items()
        },
    )


def normalize_scores(record: UtteranceRecord, scaler: ScoreScaler) -> UtteranceRecord:
    """Copy of the record with every score mapped onto [0, 1]."""
    return _map_record(record, scaler.normalize)


def denormalize_scores(record: UtteranceRecord, scaler: ScoreScaler) -> UtteranceRecord:
    """Inverse of normalize_scores."""
    return _map_record(record, scaler.denormalize)
