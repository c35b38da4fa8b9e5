"""Differentiable primitive operations on DiffTensor."""

from typing import Optional, Sequence, Tuple, Union

import numpy as np

from numerics.tensor import DiffTensor, as_tensor
from util.validation import DimensionError, NumericError

Axis = Optional[Union[int, Tuple[int, ...]]]


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _normalize_axis(axis: int, ndim: int) -> int:
    if not -ndim <= axis < ndim:
        raise DimensionError(f"axis {axis} out of range for a {ndim}-d tensor")
    return axis % ndim


# Binary arithmetic


def add(a, b) -> DiffTensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "add")
    return DiffTensor(a.values + b.values, parents=(a, b), backward=lambda g: (g, g), op="add")


def sub(a, b) -> DiffTensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "sub")
    return DiffTensor(a.values - b.values, parents=(a, b), backward=lambda g: (g, -g), op="sub")


def mul(a, b) -> DiffTensor:
    """Elementwise (Hadamard) product with broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "mul")
    av, bv = a.values, b.values
    return DiffTensor(av * bv, parents=(a, b), backward=lambda g: (g * bv, g * av), op="mul")


def div(a, b) -> DiffTensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "div")
    av, bv = a.values, b.values
    return DiffTensor(
        av / bv,
        parents=(a, b),
        backward=lambda g: (g / bv, -g * av / (bv * bv)),
        op="div",
    )


def scale(a, factor: float) -> DiffTensor:
    """Multiply by a constant scalar."""
    a = as_tensor(a)
    factor = float(factor)
    return DiffTensor(a.values * factor, parents=(a,), backward=lambda g: (g * factor,), op="scale")


def neg(a) -> DiffTensor:
    return scale(a, -1.0)


def _check_broadcast(a: DiffTensor, b: DiffTensor, name: str) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError as e:
        raise DimensionError(f"{name}: shapes {a.shape} and {b.shape} do not broadcast") from e


# Elementwise functions


def exp(a) -> DiffTensor:
    a = as_tensor(a)
    out = np.exp(a.values)
    return DiffTensor(out, parents=(a,), backward=lambda g: (g * out,), op="exp")


def log(a) -> DiffTensor:
    a = as_tensor(a)
    if np.any(a.values <= 0):
        raise NumericError("log of a non-positive value")
    av = a.values
    return DiffTensor(np.log(av), parents=(a,), backward=lambda g: (g / av,), op="log")


def power(a, exponent: float) -> DiffTensor:
    a = as_tensor(a)
    p = float(exponent)
    av = a.values
    return DiffTensor(
        av ** p, parents=(a,), backward=lambda g: (g * p * av ** (p - 1.0),), op="pow"
    )


def sigmoid(a) -> DiffTensor:
    a = as_tensor(a)
    s = _stable_sigmoid(a.values)
    return DiffTensor(s, parents=(a,), backward=lambda g: (g * s * (1.0 - s),), op="sigmoid")


def silu(a) -> DiffTensor:
    """x * sigmoid(x)."""
    a = as_tensor(a)
    x = a.values
    s = _stable_sigmoid(x)
    return DiffTensor(
        x * s,
        parents=(a,),
        backward=lambda g: (g * (s + x * s * (1.0 - s)),),
        op="silu",
    )


def softplus(a) -> DiffTensor:
    """log(1 + exp(x)), computed without overflow."""
    a = as_tensor(a)
    x = a.values
    return DiffTensor(
        np.logaddexp(0.0, x),
        parents=(a,),
        backward=lambda g: (g * _stable_sigmoid(x),),
        op="softplus",
    )


def tanh(a) -> DiffTensor:
    a = as_tensor(a)
    t = np.tanh(a.values)
    return DiffTensor(t, parents=(a,), backward=lambda g: (g * (1.0 - t * t),), op="tanh")


def clamp_min(a, floor: float) -> DiffTensor:
    """max(x, floor); the gradient is zero where the floor is active."""
    a = as_tensor(a)
    passed = a.values > floor
    return DiffTensor(
        np.maximum(a.values, floor),
        parents=(a,),
        backward=lambda g: (g * passed,),
        op="clamp_min",
    )


# Shape and indexing


def flip_sequence(a, axis: int = 0) -> DiffTensor:
    """Reverse the time axis only."""
    a = as_tensor(a)
    axis = _normalize_axis(axis, a.ndim)
    return DiffTensor(
        np.flip(a.values, axis=axis),
        parents=(a,),
        backward=lambda g: (np.flip(g, axis=axis),),
        op="flip",
    )


def concat(tensors: Sequence, axis: int = -1) -> DiffTensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise DimensionError("concat needs at least one tensor")
    axis = _normalize_axis(axis, tensors[0].ndim)
    try:
        out = np.concatenate([t.values for t in tensors], axis=axis)
    except ValueError as e:
        shapes = ", ".join(str(t.shape) for t in tensors)
        raise DimensionError(f"concat along axis {axis}: incompatible shapes {shapes}") from e
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return DiffTensor(out, parents=tensors, backward=backward, op="concat")


def stack(tensors: Sequence, axis: int = 0) -> DiffTensor:
    """Stack equally shaped tensors along a new axis."""
    tensors = [as_tensor(t) for t in tensors]
    expanded = [reshape(t, t.shape[:axis] + (1,) + t.shape[axis:]) for t in tensors]
    return concat(expanded, axis=axis)


def slice_axis(a, start: int, stop: int, axis: int = -1) -> DiffTensor:
    """a[..., start:stop, ...] along one axis."""
    a = as_tensor(a)
    axis = _normalize_axis(axis, a.ndim)
    if not 0 <= start <= stop <= a.shape[axis]:
        raise DimensionError(f"slice [{start}:{stop}] out of range for axis {axis} of {a.shape}")
    index = [slice(None)] * a.ndim
    index[axis] = slice(start, stop)
    index = tuple(index)

    def backward(g):
        full = np.zeros(a.shape)
        full[index] = g
        return (full,)

    return DiffTensor(a.values[index], parents=(a,), backward=backward, op="slice")


def transpose(a, axes: Optional[Sequence[int]] = None) -> DiffTensor:
    a = as_tensor(a)
    axes = tuple(axes) if axes is not None else tuple(reversed(range(a.ndim)))
    inverse = tuple(np.argsort(axes))
    return DiffTensor(
        np.transpose(a.values, axes),
        parents=(a,),
        backward=lambda g: (np.transpose(g, inverse),),
        op="transpose",
    )


def reshape(a, shape: Sequence[int]) -> DiffTensor:
    a = as_tensor(a)
    try:
        out = a.values.reshape(tuple(shape))
    except ValueError as e:
        raise DimensionError(f"cannot reshape {a.shape} to {tuple(shape)}") from e
    return DiffTensor(out, parents=(a,), backward=lambda g: (g.reshape(a.shape),), op="reshape")


def broadcast_to(a, shape: Sequence[int]) -> DiffTensor:
    a = as_tensor(a)
    try:
        out = np.broadcast_to(a.values, tuple(shape))
    except ValueError as e:
        raise DimensionError(f"cannot broadcast {a.shape} to {tuple(shape)}") from e
    # the tape sums the gradient back down to a.shape
    return DiffTensor(out, parents=(a,), backward=lambda g: (g,), op="broadcast")


def gather_rows(table, ids: Sequence[int]) -> DiffTensor:
    """Rows of `table` selected by integer ids (embedding lookup)."""
    table = as_tensor(table)
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise DimensionError(f"row id out of range for a table of {table.shape[0]} rows")

    def backward(g):
        full = np.zeros(table.shape)
        np.add.at(full, ids, g)
        return (full,)

    return DiffTensor(table.values[ids], parents=(table,), backward=backward, op="gather")


def pick(a, ids: Sequence[int]) -> DiffTensor:
    """a[t, ids[t]] for each row t of a 2-d tensor."""
    a = as_tensor(a)
    ids = np.asarray(ids, dtype=np.int64)
    if a.ndim != 2 or ids.shape != (a.shape[0],):
        raise DimensionError(f"pick needs [N x C] and [N] ids, got {a.shape} and {ids.shape}")
    rows = np.arange(a.shape[0])

    def backward(g):
        full = np.zeros(a.shape)
        full[rows, ids] = g
        return (full,)

    return DiffTensor(a.values[rows, ids], parents=(a,), backward=backward, op="pick")


# Reductions


def sum(a, axis: Axis = None, keepdims: bool = False) -> DiffTensor:  # noqa: A001
    a = as_tensor(a)
    out = a.values.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape),)

    return DiffTensor(out, parents=(a,), backward=backward, op="sum")


def mean(a, axis: Axis = None, keepdims: bool = False) -> DiffTensor:
    a = as_tensor(a)
    if axis is None:
        count = a.size
    else:
        axes = (axis,) if isinstance(axis, int) else axis
        count = int(np.prod([a.shape[ax] for ax in axes]))
    if count == 0:
        raise DimensionError(f"mean over an empty axis of {a.shape}")
    return scale(sum(a, axis=axis, keepdims=keepdims), 1.0 / count)


# Linear algebra


def matmul(a, b) -> DiffTensor:
    """Matrix product of [m x k] and [k x n]."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: shapes {a.shape} and {b.shape} are not aligned")
    av, bv = a.values, b.values
    return DiffTensor(
        av @ bv,
        parents=(a, b),
        backward=lambda g: (g @ bv.T, av.T @ g),
        op="matmul",
    )
