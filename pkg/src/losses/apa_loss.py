"""Masked multi-granularity MSE for pronunciation assessment."""

from typing import Dict, Mapping

import numpy as np

from numerics import ops
from numerics.tensor import DiffTensor, as_tensor
from util.log_util import get_logger
from util.validation import DimensionError

logger = get_logger("losses.apa")


def granularity_loss(pred, targets: np.ndarray, mask: np.ndarray, name: str = "") -> DiffTensor:
    """
    Mean over aspects of the masked per-aspect MSE.

    Parameters:
        pred (DiffTensor): [n x M] (or [n] for a single aspect) predictions
        targets (np.ndarray): Same shape; values under a False mask are ignored (may be NaN)
        mask (np.ndarray): Same shape, True where a label is used
        name (str): Granularity name for log messages

    Returns:
        DiffTensor: Scalar; an aspect without any labelled position contributes 0
    """

    pred = as_tensor(pred)
    targets = np.asarray(targets, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if pred.ndim == 1:
        pred = ops.reshape(pred, (pred.shape[0], 1))
        targets = targets.reshape(-1, 1)
        mask = mask.reshape(-1, 1)
    if targets.shape != pred.shape or mask.shape != pred.shape:
        raise DimensionError(
            f"{name or 'apa'} loss: predictions {pred.shape}, targets {targets.shape}, mask {mask.shape}"
        )

    n_aspects = pred.shape[1]
    counts = mask.sum(axis=0)
    if not counts.any():
        logger.warning("No labelled positions for the %s loss; it contributes 0", name or "APA")
    elif not counts.all():
        logger.debug("%s loss: %d aspect(s) without labels", name, int(np.sum(counts == 0)))

    clean = np.where(mask, targets, 0.0)
    diff = ops.mul(ops.sub(pred, clean), mask.astype(np.float64))
    per_aspect = ops.sum(ops.mul(diff, diff), axis=0)
    per_aspect = ops.mul(per_aspect, 1.0 / np.maximum(counts, 1))
    return ops.scale(ops.sum(per_aspect), 1.0 / n_aspects)


def apa_loss(
    pred: Mapping[str, DiffTensor],
    targets: Mapping[str, np.ndarray],
    masks: Mapping[str, np.ndarray],
    omega: Mapping[str, float],
) -> DiffTensor:
    """
    Weighted sum over granularities of the aspect-averaged masked MSE.

    Parameters:
        pred (dict): granularity -> predictions ("phone", "word", "utterance")
        targets (dict): granularity -> targets, word targets already broadcast to phones
        masks (dict): granularity -> bool masks excluding silences and missing labels
        omega (dict): granularity -> weight

    Returns:
        DiffTensor: Scalar APA loss
    """

    return combine(granularity_losses(pred, targets, masks), omega)


def granularity_losses(
    pred: Mapping[str, DiffTensor],
    targets: Mapping[str, np.ndarray],
    masks: Mapping[str, np.ndarray],
) -> Dict[str, DiffTensor]:
    if set(pred) != set(targets) or set(pred) != set(masks):
        raise DimensionError(
            f"granularities differ: pred {sorted(pred)}, targets {sorted(targets)}, masks {sorted(masks)}"
        )
    return {g: granularity_loss(pred[g], targets[g], masks[g], g) for g in pred}


def combine(losses: Mapping[str, DiffTensor], omega: Mapping[str, float]) -> DiffTensor:
    total = as_tensor(0.0)
    for g, loss in losses.items():
        total = ops.add(total, ops.scale(loss, omega.get(g, 1.0)))
    return total
