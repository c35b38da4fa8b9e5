"""Bidirectional Mamba layer: shared gate, forward and flipped SSM branches."""

import numpy as np

from blocks.layers import Linear, Module, uniform_init
from blocks.selective_scan import SelectiveSSM, selective_scan
from numerics import ops
from numerics.nn_ops import depthwise_conv1d
from numerics.tensor import DiffTensor


class MambaBranch(Module):
    """Causal depthwise convolution followed by a selective SSM."""

    def __init__(
        self,
        d_inner: int,
        d_state: int,
        dt_rank: int,
        conv_kernel: int,
        rng: np.random.Generator,
    ):
        super().__init__()
        self.d_inner = d_inner
        self.conv_kernel = conv_kernel
        self.add_parameter("conv_weight", uniform_init(rng, conv_kernel, (d_inner, conv_kernel)))
        self.add_parameter("conv_bias", uniform_init(rng, conv_kernel, (d_inner,)))
        self.add_module("ssm", SelectiveSSM(d_inner, d_state, dt_rank, rng))

    def convolve(self, S: DiffTensor) -> DiffTensor:
        return depthwise_conv1d(S, self.conv_weight, self.conv_bias, mode="causal")

    def __call__(self, S: DiffTensor) -> DiffTensor:
        """SSM(Conv1D(S)) for a sequence already in this branch's time order."""
        return selective_scan(self.convolve(S), self.ssm)

    def macs(self, seq_len: int) -> int:
        return seq_len * self.d_inner * self.conv_kernel + self.ssm.macs(seq_len)


class BiMambaLayer(Module):
    """
    M = Linear(1/2 O_fwd + 1/2 Flip(O_bwd)) with O = SiLU(Z) * SSM(Conv(S)).

    in_proj produces Z and S from the normalized input in one matrix; the
    backward branch runs on Flip(S) and its output is flipped back before
    averaging. Both branches are gated by the same, unflipped SiLU(Z).
    """

    def __init__(
        self,
        d: int,
        d_inner: int,
        d_state: int,
        dt_rank: int,
        conv_kernel: int,
        rng: np.random.Generator,
    ):
        super().__init__()
        self.d = d
        self.d_inner = d_inner
        self.add_module("in_proj", Linear(d, 2 * d_inner, rng, bias=False))
        self.add_module("forward_branch", MambaBranch(d_inner, d_state, dt_rank, conv_kernel, rng))
        self.add_module("backward_branch", MambaBranch(d_inner, d_state, dt_rank, conv_kernel, rng))
        self.add_module("out_proj", Linear(d_inner, d, rng, bias=False))

    def __call__(self, N: DiffTensor) -> DiffTensor:
        return bimamba_forward(N, self)

    def macs(self, seq_len: int) -> int:
        return (
            self.in_proj.macs(seq_len)
            + self.forward_branch.macs(seq_len)
            + self.backward_branch.macs(seq_len)
            + self.out_proj.macs(seq_len)
        )


def bimamba_forward(N: DiffTensor, layer: BiMambaLayer) -> DiffTensor:
    """
    Bidirectional Mamba over a layer-normalized sequence.

    Parameters:
        N (DiffTensor): [T x d] normalized block input
        layer (BiMambaLayer): Layer parameters

    Returns:
        DiffTensor: [T x d]
    """

    d_inner = layer.d_inner
    projected = layer.in_proj(N)
    Z = ops.slice_axis(projected, 0, d_inner, axis=1)
    S_fwd = ops.slice_axis(projected, d_inner, 2 * d_inner, axis=1)
    S_bwd = ops.flip_sequence(S_fwd)

    gate = ops.silu(Z)
    O_fwd = ops.mul(gate, layer.forward_branch(S_fwd))
    O_bwd = ops.mul(gate, layer.backward_branch(S_bwd))

    merged = ops.add(ops.scale(O_fwd, 0.5), ops.scale(ops.flip_sequence(O_bwd), 0.5))
    return layer.out_proj(merged)
