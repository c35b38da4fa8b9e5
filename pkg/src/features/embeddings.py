"""Phonological embeddings: phone identity, absolute position and relative position."""

from typing import List

import numpy as np

from blocks.layers import Module
from config.constants import EMBEDDING_INIT_STD, LONG_SILENCE_THRESHOLD, RELATIVE_TOKENS, SILENCE
from config.model_config import HMambaConfig
from data.corpus_manager import UtteranceRecord
from data.phone_inventory import PhoneInventory
from numerics import ops
from numerics.tensor import DiffTensor
from util.validation import CapacityError, StructureError

RELATIVE_IDS = {token: i for i, token in enumerate(RELATIVE_TOKENS)}


class PhonologicalEmbeddings(Module):
    """Lookup tables E_phn [V x d], E_abs [max_len x d] and E_rel [6 x d]; each can be switched off."""

    def __init__(self, config: HMambaConfig, n_canonical: int, rng: np.random.Generator):
        super().__init__()
        self.max_len = config.max_len
        d = config.d
        if config.use_phone_embedding:
            self.add_parameter("phone", rng.normal(0.0, EMBEDDING_INIT_STD, (n_canonical, d)))
        if config.use_abs_embedding:
            self.add_parameter("absolute", rng.normal(0.0, EMBEDDING_INIT_STD, (config.max_len, d)))
        if config.use_rel_embedding:
            self.add_parameter("relative", rng.normal(0.0, EMBEDDING_INIT_STD, (len(RELATIVE_TOKENS), d)))

    def has(self, table: str) -> bool:
        return table in self._params

    def macs(self, seq_len: int) -> int:
        return 0


def relative_tokens(
    record: UtteranceRecord, long_sil_threshold: float = LONG_SILENCE_THRESHOLD
) -> List[str]:
    """
    Within-word position token of every phone; silences get LS or SS by duration.

    Parameters:
        record (UtteranceRecord): Utterance with word grouping and silence durations
        long_sil_threshold (float): Durations strictly above this are long silences

    Returns:
        List[str]: One of B, I, E, S (phones) or LS, SS (silences) per position
    """

    tokens: List[str] = [""] * len(record)
    for positions in record.words:
        if len(positions) == 1:
            tokens[positions[0]] = "S"
            continue
        for i, t in enumerate(positions):
            tokens[t] = "B" if i == 0 else "E" if i == len(positions) - 1 else "I"

    for t, phone in enumerate(record.phones):
        if phone == SILENCE:
            duration = record.sil_durations[t]
            if duration is None:
                raise StructureError(f"{record.utt_id}: silence at position {t} has no duration")
            tokens[t] = "LS" if duration > long_sil_threshold else "SS"
        elif not tokens[t]:
            raise StructureError(
                f"{record.utt_id}: phone {phone} at position {t} is not covered by any word"
            )
    return tokens


def phone_level_input(
    x: DiffTensor,
    record: UtteranceRecord,
    tables: PhonologicalEmbeddings,
    inventory: PhoneInventory,
    long_sil_threshold: float = LONG_SILENCE_THRESHOLD,
) -> DiffTensor:
    """
    H0 = X + E_phn + E_abs + E_rel, skipping switched-off tables.

    Parameters:
        x (DiffTensor): [N x d] projected acoustic features
        record (UtteranceRecord): Supplies phones, words and silence durations
        tables (PhonologicalEmbeddings): Embedding tables
        inventory (PhoneInventory): Canonical phone ids

    Returns:
        DiffTensor: [N x d]
    """

    n = len(record)
    if n > tables.max_len:
        raise CapacityError(
            f"{record.utt_id}: {n} positions exceed the absolute embedding capacity {tables.max_len}"
        )
    out = x
    if tables.has("phone"):
        out = ops.add(out, ops.gather_rows(tables.phone, inventory.encode_canonical(record.phones)))
    if tables.has("absolute"):
        out = ops.add(out, ops.gather_rows(tables.absolute, np.arange(n)))
    if tables.has("relative"):
        ids = [RELATIVE_IDS[token] for token in relative_tokens(record, long_sil_threshold)]
        out = ops.add(out, ops.gather_rows(tables.relative, ids))
    return out
