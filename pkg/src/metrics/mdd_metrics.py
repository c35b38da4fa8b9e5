"""Mispronunciation detection scores and phone error rate."""

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config.constants import DELETION
from util.log_util import get_logger
from util.validation import DimensionError

logger = get_logger("metrics.mdd")


@dataclass
class DetectionCounts:
    """Positional TP/FP/FN of error detection; add counts to pool utterances."""

    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "DetectionCounts") -> "DetectionCounts":
        return DetectionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    def scores(self) -> "DetectionScores":
        flags = []
        if self.tp + self.fp == 0:
            flags.append("precision_undefined")
        if self.tp + self.fn == 0:
            flags.append("recall_undefined")
        precision = self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0
        recall = self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0
        for flag in flags:
            logger.warning("Detection metrics: %s (zero denominator), reported as 0", flag)
        return DetectionScores(precision, recall, harmonic_mean(precision, recall), self, flags)


@dataclass
class DetectionScores:
    precision: float
    recall: float
    f1: float
    counts: DetectionCounts = field(default_factory=DetectionCounts)
    flags: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.counts.tp,
            "fp": self.counts.fp,
            "fn": self.counts.fn,
            "flags": list(self.flags),
        }


@dataclass
class ErrorRateResult:
    """Edit distance against a reference of a given length."""

    distance: int
    reference_length: int

    def __add__(self, other: "ErrorRateResult") -> "ErrorRateResult":
        return ErrorRateResult(
            self.distance + other.distance, self.reference_length + other.reference_length
        )

    @property
    def defined(self) -> bool:
        return self.reference_length > 0

    @property
    def score(self) -> float:
        if not self.defined:
            logger.warning("PER is undefined for an empty reference")
            return float("nan")
        return self.distance / self.reference_length


def harmonic_mean(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def _masked(mask: Optional[Sequence[bool]], n: int) -> np.ndarray:
    if mask is None:
        return np.ones(n, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (n,):
        raise DimensionError(f"mask has {mask.size} entries for {n} positions")
    return mask


def detection_counts(
    diagnosis: Sequence, canonical: Sequence, realized: Sequence, mask: Optional[Sequence[bool]] = None
) -> DetectionCounts:
    """Count TP/FP/FN for one aligned utterance."""
    n = len(canonical)
    if len(diagnosis) != n or len(realized) != n:
        raise DimensionError(
            f"detection: diagnosis {len(diagnosis)}, canonical {n}, realized {len(realized)}"
        )
    keep = _masked(mask, n)
    counts = DetectionCounts()
    for t in np.flatnonzero(keep):
        truth = realized[t] != canonical[t]
        flagged = diagnosis[t] != canonical[t]
        counts.tp += int(truth and flagged)
        counts.fp += int(flagged and not truth)
        counts.fn += int(truth and not flagged)
    return counts


def mdd_detection_metrics(
    diagnosis: Sequence, canonical: Sequence, realized: Sequence, mask: Optional[Sequence[bool]] = None
) -> DetectionScores:
    """
    Precision, recall and F1 of mispronunciation detection.

    A position is a true error when realized differs from canonical and a
    predicted error when the diagnosis differs from canonical; the diagnosed
    phone itself need not match the realized one.

    Parameters:
        diagnosis (Sequence): Recognized phones
        canonical (Sequence): Prompt phones
        realized (Sequence): Annotated phones
        mask (Sequence[bool], optional): Positions to score (silences excluded)

    Returns:
        DetectionScores: Scores, counts, and flags for zero denominators
    """

    return detection_counts(diagnosis, canonical, realized, mask).scores()


def edit_distance(reference: Sequence, hypothesis: Sequence) -> int:
    """Levenshtein distance with unit substitution, insertion and deletion costs."""
    m, n = len(reference), len(hypothesis)
    d = np.zeros((m + 1, n + 1), dtype=np.int64)
    d[:, 0] = np.arange(m + 1)
    d[0, :] = np.arange(n + 1)
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            cost = 0 if reference[i - 1] == hypothesis[j - 1] else 1
            d[i, j] = min(d[i - 1, j] + 1, d[i, j - 1] + 1, d[i - 1, j - 1] + cost)
    return int(d[m, n])


def per_counts(
    diagnosis: Sequence, realized: Sequence, mask: Optional[Sequence[bool]] = None, deletion=DELETION
) -> ErrorRateResult:
    """Edit distance and reference length after dropping masked positions and deletion tokens."""
    n = len(realized)
    if len(diagnosis) != n:
        raise DimensionError(f"per: diagnosis has {len(diagnosis)} positions, realized {n}")
    keep = _masked(mask, n)
    hypothesis = [p for t, p in enumerate(diagnosis) if keep[t] and p != deletion]
    reference = [p for t, p in enumerate(realized) if keep[t] and p != deletion]
    return ErrorRateResult(edit_distance(reference, hypothesis), len(reference))


def per(
    diagnosis: Sequence, realized: Sequence, mask: Optional[Sequence[bool]] = None, deletion=DELETION
) -> float:
    """
    Phone error rate of one utterance.

    Parameters:
        diagnosis (Sequence): Recognized phones
        realized (Sequence): Annotated phones; `deletion` marks deleted phones
        mask (Sequence[bool], optional): Positions to keep
        deletion: Token removed from both sequences before alignment

    Returns:
        float: Edit distance / reference length; NaN (flagged in the log) for an empty reference
    """

    return per_counts(diagnosis, realized, mask, deletion).score


def corpus_per(items: Iterable[Tuple[Sequence, Sequence, Optional[Sequence[bool]]]]) -> ErrorRateResult:
    """Pooled edits over pooled reference length for (diagnosis, realized, mask) triples."""
    total = ErrorRateResult(0, 0)
    for diagnosis, realized, mask in items:
        total = total + per_counts(diagnosis, realized, mask)
    return total
