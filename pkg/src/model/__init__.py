"""
The HMamba hierarchy.

This package contains the full model,
its heads and the checkpoint format.
- HMambaModel, ModelOutput, forward
- attention_pool
- broadcast_word_targets, aggregate_word_predictions
- diagnose
- save_checkpoint, load_checkpoint
"""

from .pooling import attention_pool, attention_weights
from .word_ops import aggregate_word_predictions, broadcast_word_targets
from .mdd import diagnose
from .heads import AspectHeads, ClassifierHead, RegressorHead
from .hmamba import HMambaModel, ModelOutput, build_model, forward
from .checkpoint import Checkpoint, load_checkpoint, restore_rng, save_checkpoint

__all__ = [
    "attention_pool",
    "attention_weights",
    "aggregate_word_predictions",
    "broadcast_word_targets",
    "diagnose",
    "AspectHeads",
    "ClassifierHead",
    "RegressorHead",
    "HMambaModel",
    "ModelOutput",
    "build_model",
    "forward",
    "Checkpoint",
    "load_checkpoint",
    "restore_rng",
    "save_checkpoint",
]
