"""Vanilla pre-norm Transformer encoder block used as the baseline mixer."""

import math
from typing import List, Tuple

import numpy as np

from blocks.layers import FeedForward, LayerNorm, Linear, Module
from config.model_config import HMambaConfig
from numerics import ops
from numerics.nn_ops import softmax
from numerics.tensor import DiffTensor
from util.validation import ConfigError


class MultiHeadSelfAttention(Module):
    def __init__(self, d: int, n_heads: int, rng: np.random.Generator):
        super().__init__()
        if d % n_heads:
            raise ConfigError(f"d={d} is not divisible by n_heads={n_heads}")
        self.d = d
        self.n_heads = n_heads
        self.head_dim = d // n_heads
        for name in ("query", "key", "value", "output"):
            self.add_module(name, Linear(d, d, rng))

    def attend(self, X: DiffTensor) -> Tuple[DiffTensor, List[DiffTensor]]:
        """
        Softmax attention over all positions.

        Returns:
            tuple: ([T x d] output, per-head [T x T] attention weights)
        """

        Q, K, V = self.query(X), self.key(X), self.value(X)
        inv_sqrt = 1.0 / math.sqrt(self.head_dim)
        heads, weights = [], []
        for h in range(self.n_heads):
            lo, hi = h * self.head_dim, (h + 1) * self.head_dim
            q = ops.slice_axis(Q, lo, hi, axis=1)
            k = ops.slice_axis(K, lo, hi, axis=1)
            v = ops.slice_axis(V, lo, hi, axis=1)
            attention = softmax(ops.scale(ops.matmul(q, ops.transpose(k)), inv_sqrt), axis=-1)
            weights.append(attention)
            heads.append(ops.matmul(attention, v))
        return self.output(ops.concat(heads, axis=1)), weights

    def __call__(self, X: DiffTensor) -> DiffTensor:
        return self.attend(X)[0]

    def macs(self, seq_len: int) -> int:
        projections = 4 * seq_len * self.d * self.d
        # scores Q K^T plus the weighted sum over V
        return projections + 2 * seq_len * seq_len * self.d


class TransformerBlock(Module):
    """H' = MHSA(LN(H)) + H; out = FFN(LN(H')) + H'."""

    def __init__(self, config: HMambaConfig, rng: np.random.Generator):
        super().__init__()
        d = config.d
        self.add_module("norm_attention", LayerNorm(d, config.ln_eps))
        self.add_module("attention", MultiHeadSelfAttention(d, config.n_heads, rng))
        self.add_module("norm_ffn", LayerNorm(d, config.ln_eps))
        self.add_module("ffn", FeedForward(d, config.resolved_transformer_ffn_mult * d, rng))

    def __call__(self, H: DiffTensor) -> DiffTensor:
        return transformer_block_forward(H, self)

    def macs(self, seq_len: int) -> int:
        return self.attention.macs(seq_len) + self.ffn.macs(seq_len)


def transformer_block_forward(H: DiffTensor, block: TransformerBlock) -> DiffTensor:
    """
    Parameters:
        H (DiffTensor): [T x d] block input
        block (TransformerBlock): Block parameters

    Returns:
        DiffTensor: [T x d]
    """

    H_mid = ops.add(block.attention(block.norm_attention(H)), H)
    return ops.add(block.ffn(block.norm_ffn(H_mid)), H_mid)
