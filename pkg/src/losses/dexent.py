"""Decoupled cross-entropy for mispronunciation diagnosis and the joint objective."""

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from config.constants import PROBABILITY_FLOOR
from config.train_config import LossConfig
from data.corpus_manager import UtteranceRecord
from data.phone_inventory import PhoneInventory
from numerics import ops
from numerics.nn_ops import softmax
from numerics.tensor import DiffTensor, as_tensor
from util.log_util import get_logger
from util.validation import DimensionError, FrequencyEstimateError, NumericError

logger = get_logger("losses.dexent")

REDUCTIONS = ("sum", "mean")


@dataclass
class DexentTerms:
    """Hit and mispronunciation sums with the weight that combines them."""

    hit: DiffTensor
    mis: DiffTensor
    weight: float
    n_hit: int
    n_mis: int

    @property
    def total(self) -> DiffTensor:
        return ops.add(self.hit, ops.scale(self.mis, self.weight))


def estimate_frequencies(records: Iterable[UtteranceRecord]) -> Tuple[float, float]:
    """
    Share of mispronounced and correctly pronounced positions.

    Parameters:
        records (Iterable[UtteranceRecord]): Training utterances; silences are skipped

    Returns:
        tuple: (mu_m, mu_h) with mu_h = 1 - mu_m

    Raises:
        FrequencyEstimateError: No scored position or no mispronunciation
    """

    total = mispronounced = 0
    for record in records:
        for t in record.scored_positions:
            total += 1
            mispronounced += record.realized[t] != record.phones[t]
    if total == 0:
        raise FrequencyEstimateError("no scored positions to estimate frequencies from")
    if mispronounced == 0:
        raise FrequencyEstimateError(
            f"no mispronunciations among {total} positions; the deXent weight is undefined"
        )
    mu_m = mispronounced / total
    return mu_m, 1.0 - mu_m


def mdd_targets(
    record: UtteranceRecord, inventory: PhoneInventory
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Class targets of one utterance.

    Returns:
        tuple: ([N] realized class ids, [N] canonical class ids, [N] mask); silence
        positions hold id 0 and are masked out
    """

    n = len(record)
    realized = np.zeros(n, dtype=np.int64)
    canonical = np.zeros(n, dtype=np.int64)
    mask = np.zeros(n, dtype=bool)
    for t in record.scored_positions:
        realized[t] = inventory.class_id(record.realized[t])
        canonical[t] = inventory.class_id(record.phones[t])
        mask[t] = True
    return realized, canonical, mask


def negative_log_likelihood(logits, targets: Sequence[int]) -> DiffTensor:
    """-log softmax(logits)[t, targets[t]] per row, floored at PROBABILITY_FLOOR."""
    probs = ops.clamp_min(softmax(as_tensor(logits), axis=1), PROBABILITY_FLOOR)
    return ops.neg(ops.pick(ops.log(probs), targets))


def dexent_terms(
    logits,
    realized: Sequence[int],
    canonical: Sequence[int],
    mask: Sequence[bool],
    weight: float,
) -> DexentTerms:
    """
    Split the cross-entropy sum into correct-pronunciation and mispronunciation parts.

    Parameters:
        logits (DiffTensor): [N x C]
        realized (Sequence[int]): [N] annotated class ids (targets)
        canonical (Sequence[int]): [N] class ids of the canonical phones
        mask (Sequence[bool]): [N] scored positions
        weight (float): Multiplier of the mispronunciation part

    Returns:
        DexentTerms: Unreduced sums and counts
    """

    logits = as_tensor(logits)
    realized = np.asarray(realized, dtype=np.int64)
    canonical = np.asarray(canonical, dtype=np.int64)
    mask = np.asarray(mask, dtype=bool)
    n = logits.shape[0]
    if logits.ndim != 2 or realized.shape != (n,) or canonical.shape != (n,) or mask.shape != (n,):
        raise DimensionError(
            f"dexent: logits {logits.shape}, realized {realized.shape}, "
            f"canonical {canonical.shape}, mask {mask.shape}"
        )

    hit_mask = mask & (realized == canonical)
    mis_mask = mask & (realized != canonical)
    nll = negative_log_likelihood(logits, realized)
    hit = ops.sum(ops.mul(nll, hit_mask.astype(np.float64)))
    mis = ops.sum(ops.mul(nll, mis_mask.astype(np.float64)))
    return DexentTerms(hit, mis, float(weight), int(hit_mask.sum()), int(mis_mask.sum()))


def dexent_loss(
    logits,
    realized: Sequence[int],
    canonical: Sequence[int],
    mask: Sequence[bool],
    cfg: LossConfig,
    reduction: str = "sum",
) -> DiffTensor:
    """
    L_hit + (mu_h / mu_m) ** alpha * L_mis.

    Parameters:
        logits (DiffTensor): [N x C]
        realized (Sequence[int]): [N] annotated class ids
        canonical (Sequence[int]): [N] canonical class ids
        mask (Sequence[bool]): [N] scored positions
        cfg (LossConfig): alpha, mu_m, mu_h; a disabled deXent uses weight 1
        reduction (str): "sum", or "mean" to divide by the scored position count

    Returns:
        DiffTensor: Scalar loss
    """

    if reduction not in REDUCTIONS:
        raise DimensionError(f"reduction must be one of {REDUCTIONS}, got {reduction!r}")
    terms = dexent_terms(logits, realized, canonical, mask, cfg.mis_weight)
    total = terms.total
    if reduction == "mean":
        total = ops.scale(total, 1.0 / max(terms.n_hit + terms.n_mis, 1))
    if not np.isfinite(total.item()):
        raise NumericError("dexent loss is not finite")
    return total


def total_loss(apa, mdd, beta: float) -> DiffTensor:
    """L = L_APA + beta * L_MDD."""
    return ops.add(as_tensor(apa), ops.scale(as_tensor(mdd), beta))
