"""
Differentiable numerics.

This package contains the tensor type
and every primitive the model is built from.
- DiffTensor, Tape
- ops (elementwise, shape, reduction, matmul)
- nn_ops (layer_norm, conv1d, softmax, dropout)
"""

from .tensor import DiffTensor, Tape, as_tensor, parameter, unbroadcast, zero_grad
from . import ops
from . import nn_ops

__all__ = [
    "DiffTensor",
    "Tape",
    "as_tensor",
    "parameter",
    "unbroadcast",
    "zero_grad",
    "ops",
    "nn_ops",
]
