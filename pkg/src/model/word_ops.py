"""Propagate word scores to phones for training and average them back for evaluation."""

from typing import Tuple

import numpy as np

from config.constants import WORD_ASPECTS
from data.corpus_manager import UtteranceRecord
from util.validation import DimensionError, StructureError


def broadcast_word_targets(record: UtteranceRecord) -> Tuple[np.ndarray, np.ndarray]:
    """
    Give each phone the three scores of its word.

    Parameters:
        record (UtteranceRecord): Utterance with words and word scores

    Returns:
        tuple: ([N x 3] targets, NaN where unused; [N x 3] bool mask, False at
        silences and missing labels)
    """

    n = len(record)
    targets = np.full((n, len(WORD_ASPECTS)), np.nan)
    mask = np.zeros((n, len(WORD_ASPECTS)), dtype=bool)
    word_of = record.word_index()
    for t in record.scored_positions:
        w = word_of[t]
        if w is None:
            raise StructureError(f"{record.utt_id}: scored phone at position {t} has no word")
        for k, aspect in enumerate(WORD_ASPECTS):
            value = record.word_scores[w].get(aspect)
            if value is not None:
                targets[t, k] = value
                mask[t, k] = True
    return targets, mask


def aggregate_word_predictions(per_phone, record: UtteranceRecord) -> np.ndarray:
    """
    Mean of each word's per-phone predictions, per aspect.

    Parameters:
        per_phone (array-like): [N x 3] per-position predictions
        record (UtteranceRecord): Supplies the word partition

    Returns:
        np.ndarray: [W x 3] per-word predictions
    """

    values = np.asarray(getattr(per_phone, "values", per_phone), dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != len(record):
        raise DimensionError(
            f"{record.utt_id}: per-phone predictions {values.shape} do not match {len(record)} positions"
        )
    out = np.empty((len(record.words), values.shape[1]))
    for w, positions in enumerate(record.words):
        if not positions:
            raise StructureError(f"{record.utt_id}: word {w} is empty")
        out[w] = values[positions].mean(axis=0)
    return out
