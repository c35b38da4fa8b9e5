"""Regression metrics for assessment scores."""

import numpy as np

from util.log_util import get_logger
from util.validation import DimensionError

logger = get_logger("metrics.apa")


def _pair(pred, target, name: str):
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    target = np.asarray(target, dtype=np.float64).reshape(-1)
    if pred.shape != target.shape:
        raise DimensionError(f"{name}: {pred.size} predictions for {target.size} targets")
    return pred, target


def pcc(pred, target) -> float:
    """
    Sample Pearson correlation.

    Parameters:
        pred (array-like): [n] predictions
        target (array-like): [n] reference scores

    Returns:
        float: Correlation in [-1, 1]; NaN (with a warning) when n < 2 or
        either vector is constant
    """

    pred, target = _pair(pred, target, "pcc")
    if pred.size < 2:
        logger.warning("PCC needs at least 2 items, got %d", pred.size)
        return float("nan")
    p = pred - pred.mean()
    t = target - target.mean()
    denominator = np.sqrt(np.dot(p, p)) * np.sqrt(np.dot(t, t))
    if denominator == 0.0:
        logger.warning("PCC is undefined for a constant vector")
        return float("nan")
    return float(np.clip(np.dot(p, t) / denominator, -1.0, 1.0))


def mse(pred, target) -> float:
    """Mean of squared differences; needs n >= 1."""
    pred, target = _pair(pred, target, "mse")
    if pred.size == 0:
        raise DimensionError("mse needs at least one item")
    diff = pred - target
    return float(np.dot(diff, diff) / diff.size)
