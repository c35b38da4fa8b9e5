"""Pre-norm residual block with a BiMamba mixer and an FFN."""

import numpy as np

from blocks.bimamba import BiMambaLayer
from blocks.layers import FeedForward, LayerNorm, Module
from config.model_config import HMambaConfig
from numerics import ops
from numerics.tensor import DiffTensor


class MambaBlock(Module):
    """H' = BiMamba(LN(H)) + H; out = FFN(LN(H')) + H'."""

    def __init__(self, config: HMambaConfig, rng: np.random.Generator):
        super().__init__()
        d = config.d
        self.add_module("norm_mixer", LayerNorm(d, config.ln_eps))
        self.add_module(
            "mixer",
            BiMambaLayer(
                d,
                config.d_inner,
                config.d_state,
                config.resolved_dt_rank,
                config.conv_kernel,
                rng,
            ),
        )
        self.add_module("norm_ffn", LayerNorm(d, config.ln_eps))
        self.add_module("ffn", FeedForward(d, config.ffn_mult * d, rng))

    def __call__(self, H: DiffTensor) -> DiffTensor:
        return mamba_block_forward(H, self)

    def macs(self, seq_len: int) -> int:
        return self.mixer.macs(seq_len) + self.ffn.macs(seq_len)


def mamba_block_forward(H: DiffTensor, block: MambaBlock) -> DiffTensor:
    """
    Parameters:
        H (DiffTensor): [T x d] block input
        block (MambaBlock): Block parameters

    Returns:
        DiffTensor: [T x d]
    """

    H_mid = ops.add(block.mixer(block.norm_mixer(H)), H)
    return ops.add(block.ffn(block.norm_ffn(H_mid)), H_mid)
