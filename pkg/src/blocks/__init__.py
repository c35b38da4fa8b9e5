"""
Sequence-mixing blocks.

This package contains the selective scan,
the BiMamba layer and the encoder blocks.
- Module, Linear, LayerNorm, FeedForward
- MambaBlock, TransformerBlock
- count_params_and_macs
"""

from .layers import FeedForward, LayerNorm, Linear, Module, Sequential
from .selective_scan import SelectiveSSM, selective_scan, selective_scan_core
from .bimamba import BiMambaLayer, bimamba_forward
from .mamba_block import MambaBlock, mamba_block_forward
from .transformer_block import TransformerBlock, transformer_block_forward
from .accounting import count_params_and_macs


def build_block(config, rng) -> Module:
    """Block of the configured type."""
    if config.block_type == "transformer":
        return TransformerBlock(config, rng)
    return MambaBlock(config, rng)


__all__ = [
    "Module",
    "Linear",
    "LayerNorm",
    "FeedForward",
    "Sequential",
    "SelectiveSSM",
    "selective_scan",
    "selective_scan_core",
    "BiMambaLayer",
    "bimamba_forward",
    "MambaBlock",
    "mamba_block_forward",
    "TransformerBlock",
    "transformer_block_forward",
    "count_params_and_macs",
    "build_block",
]
