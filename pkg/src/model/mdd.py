"""Mispronunciation diagnosis as free phone recognition."""

from typing import Tuple

import numpy as np

from config.constants import SILENCE
from data.corpus_manager import UtteranceRecord
from data.phone_inventory import PhoneInventory
from util.validation import DimensionError


def diagnose(
    mdd_logits, record: UtteranceRecord, inventory: PhoneInventory
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Recognized phone per position and whether it differs from the canonical phone.

    Parameters:
        mdd_logits (array-like): [N x C] class scores
        record (UtteranceRecord): Canonical phones
        inventory (PhoneInventory): Class ids

    Returns:
        tuple: ([N] class ids, ties to the lowest id; [N] error flags, False at silences)
    """

    logits = np.asarray(getattr(mdd_logits, "values", mdd_logits), dtype=np.float64)
    if logits.ndim != 2 or logits.shape != (len(record), inventory.n_classes):
        raise DimensionError(
            f"{record.utt_id}: logits {logits.shape} do not match "
            f"{len(record)} positions x {inventory.n_classes} classes"
        )
    diagnosis = np.argmax(logits, axis=1)
    error_states = np.array([
        phone != SILENCE and int(diagnosis[t]) != inventory.class_id(phone)
        for t, phone in enumerate(record.phones)
    ], dtype=bool)
    return diagnosis, error_states
