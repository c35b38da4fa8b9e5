"""
Parameter and multiply-accumulate accounting.

Counting rules, per forward pass over T positions:
  linear          T * in * out            (bias adds are not counted)
  full conv       T * d_out * d_in * k
  depthwise conv  T * d * k
  selective scan  T * d_inner * d_state * 3
  attention       2 * T^2 * d plus the four d x d projections
Elementwise ops, normalization and embedding lookups count 0.
Parameters are the exact sum of every trainable array's size.
"""

from typing import Dict

from blocks.layers import Module
from util.validation import DimensionError


def count_params_and_macs(model_or_block: Module, seq_len: int) -> Dict[str, int]:
    """
    Count parameters and MACs of a block or a whole model.

    Parameters:
        model_or_block (Module): Any module implementing macs()
        seq_len (int): Sequence length T

    Returns:
        dict: {"params": int, "macs": int}
    """

    if seq_len < 1:
        raise DimensionError(f"seq_len must be >= 1, got {seq_len}")
    return {
        "params": model_or_block.num_parameters(),
        "macs": int(model_or_block.macs(seq_len)),
    }
