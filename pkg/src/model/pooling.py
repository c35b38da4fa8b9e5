"""Score-conditioned attention pooling over the utterance sequence."""

from typing import Tuple

from numerics import ops
from numerics.nn_ops import softmax
from numerics.tensor import DiffTensor, as_tensor
from util.validation import DimensionError


def attention_weights(scores_q, w, tau: float) -> DiffTensor:
    """
    alpha_i = exp(w . q_i / tau) / sum_j exp(w . q_j / tau).

    Parameters:
        scores_q (DiffTensor): [N x 4] per-position predicted scores
        w (DiffTensor): [4] pooling vector
        tau (float): Temperature, > 0

    Returns:
        DiffTensor: [N] weights, positive and summing to 1
    """

    scores_q, w = as_tensor(scores_q), as_tensor(w)
    if scores_q.ndim != 2 or w.shape != (scores_q.shape[1],):
        raise DimensionError(f"pooling: q {scores_q.shape} and w {w.shape} do not match")
    if tau <= 0:
        raise DimensionError(f"pooling temperature must be > 0, got {tau}")
    logits = ops.scale(ops.matmul(scores_q, ops.reshape(w, (w.shape[0], 1))), 1.0 / tau)
    return ops.reshape(softmax(logits, axis=0), (scores_q.shape[0],))


def attention_pool(H, scores_q, w, tau: float) -> Tuple[DiffTensor, DiffTensor]:
    """
    Weighted sum of the rows of H under attention_weights.

    Parameters:
        H (DiffTensor): [N x d] utterance-level sequence
        scores_q (DiffTensor): [N x 4] phone accuracy and the three word scores per position
        w (DiffTensor): [4] pooling vector
        tau (float): Temperature

    Returns:
        tuple: ([d] pooled vector, [N] weights)
    """

    H = as_tensor(H)
    alpha = attention_weights(scores_q, w, tau)
    if H.ndim != 2 or H.shape[0] != alpha.shape[0]:
        raise DimensionError(f"pooling: H {H.shape} does not match {alpha.shape[0]} weights")
    pooled = ops.sum(ops.mul(ops.reshape(alpha, (alpha.shape[0], 1)), H), axis=0)
    return pooled, alpha
