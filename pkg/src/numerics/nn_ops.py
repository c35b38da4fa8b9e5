"""Neural-network primitives with hand-written backward passes."""

from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from config.constants import LAYER_NORM_EPS
from numerics.tensor import DiffTensor, as_tensor
from util.validation import ConfigError, DimensionError

CONV_MODES = ("causal", "same")


def layer_norm(x, gain, bias, eps: float = LAYER_NORM_EPS) -> DiffTensor:
    """
    Normalize every row of x over its last axis, then apply gain and bias.

    Parameters:
        x (DiffTensor): [T x d] input
        gain (DiffTensor): [d] scale
        bias (DiffTensor): [d] shift
        eps (float): Variance guard, > 0

    Returns:
        DiffTensor: [T x d] output
    """

    x, gain, bias = as_tensor(x), as_tensor(gain), as_tensor(bias)
    d = x.shape[-1]
    if d < 1 or gain.shape != (d,) or bias.shape != (d,):
        raise DimensionError(
            f"layer_norm: input {x.shape} needs gain/bias of shape ({d},), "
            f"got {gain.shape} and {bias.shape}"
        )
    if eps <= 0:
        raise ConfigError("layer_norm eps must be > 0")

    centered = x.values - x.values.mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt((centered ** 2).mean(axis=-1, keepdims=True) + eps)
    normed = centered * inv_std
    gv = gain.values
    reduce_axes = tuple(range(x.ndim - 1))

    def backward(g):
        g_normed = g * gv
        g_x = inv_std * (
            g_normed
            - g_normed.mean(axis=-1, keepdims=True)
            - normed * (g_normed * normed).mean(axis=-1, keepdims=True)
        )
        return g_x, (g * normed).sum(axis=reduce_axes), g.sum(axis=reduce_axes)

    return DiffTensor(
        normed * gv + bias.values,
        parents=(x, gain, bias),
        backward=backward,
        op="layer_norm",
    )


def _pad_amounts(k: int, mode: str):
    if mode == "causal":
        return k - 1, 0
    if mode == "same":
        left = (k - 1) // 2
        return left, k - 1 - left
    raise ConfigError(f"conv mode must be one of {CONV_MODES}, got {mode!r}")


def _windows(xv: np.ndarray, k: int, mode: str):
    left, right = _pad_amounts(k, mode)
    padded = np.pad(xv, ((left, right), (0, 0)))
    # [T x channels x k]
    return sliding_window_view(padded, k, axis=0), left


def conv1d(x, kernels, mode: str = "causal", bias=None) -> DiffTensor:
    """
    Full 1-D convolution over time that keeps the sequence length.

    Parameters:
        x (DiffTensor): [T x d_in] input, T >= 1
        kernels (DiffTensor): [d_out x d_in x k] filters
        mode (str): "causal" left-pads k-1 zeros, "same" pads both sides
        bias (DiffTensor, optional): [d_out]

    Returns:
        DiffTensor: [T x d_out]
    """

    x, kernels = as_tensor(x), as_tensor(kernels)
    if x.ndim != 2 or x.shape[0] == 0:
        raise DimensionError(f"conv1d needs a non-empty [T x d_in] input, got {x.shape}")
    if kernels.ndim != 3 or kernels.shape[1] != x.shape[1] or kernels.shape[2] < 1:
        raise DimensionError(f"conv1d: kernels {kernels.shape} do not match input {x.shape}")

    T = x.shape[0]
    k = kernels.shape[2]
    windows, left = _windows(x.values, k, mode)
    kv = kernels.values
    out = np.einsum("tik,oik->to", windows, kv)

    def backward(g):
        g_kernels = np.einsum("to,tik->oik", g, windows)
        g_padded = np.zeros((T + k - 1, x.shape[1]))
        for j in range(k):
            g_padded[j:j + T] += g @ kv[:, :, j]
        grads = [g_padded[left:left + T], g_kernels]
        if bias is not None:
            grads.append(g.sum(axis=0))
        return tuple(grads)

    parents = [x, kernels]
    if bias is not None:
        bias = as_tensor(bias)
        if bias.shape != (kv.shape[0],):
            raise DimensionError(f"conv1d bias {bias.shape} does not match {kv.shape[0]} outputs")
        out = out + bias.values
        parents.append(bias)
    return DiffTensor(out, parents=parents, backward=backward, op="conv1d")


def depthwise_conv1d(x, kernels, bias=None, mode: str = "causal") -> DiffTensor:
    """
    One length-k filter per channel.

    Parameters:
        x (DiffTensor): [T x d] input, T >= 1
        kernels (DiffTensor): [d x k] filters
        bias (DiffTensor, optional): [d]
        mode (str): Padding mode as in conv1d

    Returns:
        DiffTensor: [T x d]
    """

    x, kernels = as_tensor(x), as_tensor(kernels)
    if x.ndim != 2 or x.shape[0] == 0:
        raise DimensionError(f"depthwise_conv1d needs a non-empty [T x d] input, got {x.shape}")
    if kernels.ndim != 2 or kernels.shape[0] != x.shape[1] or kernels.shape[1] < 1:
        raise DimensionError(f"depthwise_conv1d: kernels {kernels.shape} do not match input {x.shape}")

    T, d = x.shape
    k = kernels.shape[1]
    windows, left = _windows(x.values, k, mode)
    kv = kernels.values
    out = np.einsum("tdk,dk->td", windows, kv)

    def backward(g):
        g_kernels = np.einsum("td,tdk->dk", g, windows)
        g_padded = np.zeros((T + k - 1, d))
        for j in range(k):
            g_padded[j:j + T] += g * kv[:, j]
        grads = [g_padded[left:left + T], g_kernels]
        if bias is not None:
            grads.append(g.sum(axis=0))
        return tuple(grads)

    parents = [x, kernels]
    if bias is not None:
        bias = as_tensor(bias)
        if bias.shape != (d,):
            raise DimensionError(f"depthwise_conv1d bias {bias.shape} does not match {d} channels")
        out = out + bias.values
        parents.append(bias)
    return DiffTensor(out, parents=parents, backward=backward, op="depthwise_conv1d")


def softmax(x, axis: int = -1) -> DiffTensor:
    """Softmax with max subtraction."""
    x = as_tensor(x)
    shifted = x.values - x.values.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return (s * (g - (g * s).sum(axis=axis, keepdims=True)),)

    return DiffTensor(s, parents=(x,), backward=backward, op="softmax")


def dropout(x, rate: float, training: bool, rng: Optional[np.random.Generator]) -> DiffTensor:
    """
    Inverted dropout: survivors are scaled by 1/(1-rate); eval mode is the identity.

    Parameters:
        x (DiffTensor): Input
        rate (float): Drop probability in [0, 1)
        training (bool): Whether to drop
        rng (np.random.Generator): Mask source, only read when training

    Returns:
        DiffTensor: Output of the same shape
    """

    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
    x = as_tensor(x)
    if not training or rate == 0.0:
        return x
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return DiffTensor(x.values * keep, parents=(x,), backward=lambda g: (g * keep,), op="dropout")
