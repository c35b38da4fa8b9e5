"""Dense double-precision tensor with reverse-mode differentiation."""

from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from util.validation import DimensionError, GradientStateError

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    if grad.shape != tuple(shape):
        raise DimensionError(f"cannot reduce gradient of shape {grad.shape} to {tuple(shape)}")
    return grad


class DiffTensor:
    """
    Immutable value array that records how it was computed.

    A tensor produced by a primitive keeps references to its parents and a
    closure mapping the output gradient to one gradient per parent. Tensors
    that do not depend on any `requires_grad` leaf keep no graph.
    """

    def __init__(
        self,
        values,
        requires_grad: bool = False,
        parents: Sequence["DiffTensor"] = (),
        backward: Optional[BackwardFn] = None,
        op: str = "leaf",
    ):
        self.values = _frozen(values)
        tracked = any(parent.requires_grad for parent in parents)
        self.requires_grad = bool(requires_grad or tracked)
        self._parents: Tuple["DiffTensor", ...] = tuple(parents) if tracked else ()
        self._backward = backward if tracked else None
        self.op = op if tracked else "leaf"
        self.grad: Optional[np.ndarray] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def is_leaf(self) -> bool:
        return not self._parents

    def item(self) -> float:
        if self.size != 1:
            raise DimensionError(f"item() needs a single element, got shape {self.shape}")
        return float(self.values.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.values

    def detach(self) -> "DiffTensor":
        return DiffTensor(self.values)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self, grad: Optional[np.ndarray] = None) -> "Tape":
        """
        Back-propagate from this tensor into every reachable leaf.

        Parameters:
            grad (np.ndarray, optional): Seed gradient; required unless this tensor is a scalar

        Returns:
            Tape: The traversal that was executed
        """

        if grad is None:
            if self.size != 1:
                raise DimensionError(
                    f"backward() without a seed needs a scalar root, got shape {self.shape}"
                )
            grad = np.ones(self.shape)
        grad = np.asarray(grad, dtype=np.float64)
        if grad.shape != self.shape:
            raise DimensionError(f"seed gradient {grad.shape} does not match root {self.shape}")
        tape = Tape.record(self)
        tape.run(self, grad)
        return tape

    # Operator sugar; implementations live in numerics.ops
    def __add__(self, other):
        from numerics import ops
        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from numerics import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from numerics import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from numerics import ops
        return ops.mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        from numerics import ops
        return ops.div(self, other)

    def __neg__(self):
        from numerics import ops
        return ops.neg(self)

    def __matmul__(self, other):
        from numerics import ops
        return ops.matmul(self, other)

    def __pow__(self, exponent: float):
        from numerics import ops
        return ops.power(self, exponent)

    @property
    def T(self) -> "DiffTensor":
        from numerics import ops
        return ops.transpose(self)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"DiffTensor(shape={self.shape}, op={self.op}{flag})"


def as_tensor(value) -> DiffTensor:
    """Wrap arrays and scalars as constant tensors; pass tensors through."""
    return value if isinstance(value, DiffTensor) else DiffTensor(value)


def parameter(values) -> DiffTensor:
    """Create a trainable leaf."""
    return DiffTensor(values, requires_grad=True)


class Tape:
    """Topologically ordered record of the nodes reachable from a root."""

    def __init__(self, nodes: List[DiffTensor]):
        self.nodes = nodes

    @classmethod
    def record(cls, root: DiffTensor) -> "Tape":
        """Collect the tracked subgraph under `root`, parents before children."""
        order: List[DiffTensor] = []
        visited = set()
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited or not node.requires_grad:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return cls(order)

    @property
    def leaves(self) -> List[DiffTensor]:
        return [node for node in self.nodes if node.is_leaf]

    def run(self, root: DiffTensor, seed: np.ndarray) -> None:
        """Visit each node once in reverse order, accumulating into leaf grads."""
        stale = [leaf for leaf in self.leaves if leaf.grad is not None]
        if stale:
            raise GradientStateError(
                f"{len(stale)} leaf tensor(s) still hold gradients from a previous "
                "backward pass; call zero_grad() first"
            )

        pending = {id(root): seed}
        for node in reversed(self.nodes):
            grad = pending.pop(id(node), None)
            if node.is_leaf:
                node.grad = _frozen(grad if grad is not None else np.zeros(node.shape))
                continue
            if grad is None:
                continue
            parent_grads = node._backward(grad)
            for parent, parent_grad in zip(node._parents, parent_grads):
                if parent_grad is None or not parent.requires_grad:
                    continue
                parent_grad = unbroadcast(np.asarray(parent_grad, dtype=np.float64), parent.shape)
                key = id(parent)
                pending[key] = pending[key] + parent_grad if key in pending else parent_grad


def zero_grad(tensors) -> None:
    for tensor in tensors:
        tensor.zero_grad()
