"""Parameter containers and the small layers every block is built from."""

from typing import Dict, Iterator, Optional, Tuple

import numpy as np

from config.constants import LAYER_NORM_EPS
from numerics import ops
from numerics.nn_ops import layer_norm
from numerics.tensor import DiffTensor, parameter
from util.validation import CheckpointError


class Module:
    """
    Tree of named trainable tensors.

    Parameters are immutable leaves; an optimizer replaces them through
    `assign`, and attribute access always reads the current leaf.
    """

    def __init__(self):
        self._params: Dict[str, DiffTensor] = {}
        self._children: Dict[str, "Module"] = {}

    def add_parameter(self, name: str, values) -> DiffTensor:
        self._params[name] = parameter(values)
        return self._params[name]

    def add_module(self, name: str, module: "Module") -> "Module":
        self._children[name] = module
        return module

    def __getattr__(self, name: str):
        state = self.__dict__
        if name in state.get("_params", {}):
            return state["_params"][name]
        if name in state.get("_children", {}):
            return state["_children"][name]
        raise AttributeError(f"{type(self).__name__} has no attribute {name!r}")

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, DiffTensor]]:
        for name, tensor in self._params.items():
            yield prefix + name, tensor
        for name, child in self._children.items():
            yield from child.named_parameters(prefix + name + ".")

    def named_modules(self, prefix: str = "") -> Iterator[Tuple[str, "Module"]]:
        yield prefix.rstrip("."), self
        for name, child in self._children.items():
            yield from child.named_modules(prefix + name + ".")

    def parameters(self):
        return [tensor for _, tensor in self.named_parameters()]

    def num_parameters(self) -> int:
        return int(np.sum([tensor.size for tensor in self.parameters()], dtype=np.int64))

    def assign(self, dotted_name: str, tensor: DiffTensor) -> None:
        """Replace the parameter at `dotted_name` with a new leaf of the same shape."""
        owner = self
        *path, leaf = dotted_name.split(".")
        for part in path:
            owner = owner._children[part]
        current = owner._params[leaf]
        if current.shape != tensor.shape:
            raise CheckpointError(
                f"{dotted_name}: expected shape {current.shape}, got {tensor.shape}"
            )
        owner._params[leaf] = tensor

    def zero_grad(self) -> None:
        for tensor in self.parameters():
            tensor.zero_grad()

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: tensor.values for name, tensor in self.named_parameters()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        """Load arrays by name; missing, extra, or misshapen entries are rejected."""
        expected = dict(self.named_parameters())
        missing = sorted(set(expected) - set(state))
        extra = sorted(set(state) - set(expected))
        if missing or extra:
            raise CheckpointError(
                f"parameter names differ from the config (missing: {missing[:5]}, extra: {extra[:5]})"
            )
        for name, values in state.items():
            self.assign(name, parameter(np.asarray(values, dtype=np.float64)))

    def macs(self, seq_len: int) -> int:
        """Multiply-accumulates of one forward pass over `seq_len` positions."""
        raise NotImplementedError


def uniform_init(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Linear(Module):
    """Row-vector affine map x @ W + b with W of shape [in x out]."""

    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, bias: bool = True):
        super().__init__()
        self.d_in = d_in
        self.d_out = d_out
        self.has_bias = bias
        self.add_parameter("weight", uniform_init(rng, d_in, (d_in, d_out)))
        if bias:
            self.add_parameter("bias", uniform_init(rng, d_in, (d_out,)))

    def __call__(self, x: DiffTensor) -> DiffTensor:
        squeeze = x.ndim == 1
        if squeeze:
            x = ops.reshape(x, (1, x.shape[0]))
        out = ops.matmul(x, self.weight)
        if self.has_bias:
            out = ops.add(out, self.bias)
        return ops.reshape(out, (self.d_out,)) if squeeze else out

    def macs(self, seq_len: int) -> int:
        return seq_len * self.d_in * self.d_out


class LayerNorm(Module):
    def __init__(self, d: int, eps: float = LAYER_NORM_EPS):
        super().__init__()
        self.eps = eps
        self.add_parameter("gain", np.ones(d))
        self.add_parameter("bias", np.zeros(d))

    def __call__(self, x: DiffTensor) -> DiffTensor:
        return layer_norm(x, self.gain, self.bias, self.eps)

    def macs(self, seq_len: int) -> int:
        return 0


class FeedForward(Module):
    """Two linear layers with SiLU between them."""

    def __init__(
        self, d_in: int, hidden: int, rng: np.random.Generator, d_out: Optional[int] = None
    ):
        super().__init__()
        self.add_module("fc1", Linear(d_in, hidden, rng))
        self.add_module("fc2", Linear(hidden, d_out or d_in, rng))

    def __call__(self, x: DiffTensor) -> DiffTensor:
        return self.fc2(ops.silu(self.fc1(x)))

    def macs(self, seq_len: int) -> int:
        return self.fc1.macs(seq_len) + self.fc2.macs(seq_len)


class Sequential(Module):
    """Children applied in order; named "0", "1", ..."""

    def __init__(self, modules):
        super().__init__()
        for i, module in enumerate(modules):
            self.add_module(str(i), module)

    def __len__(self) -> int:
        return len(self._children)

    def __iter__(self):
        return iter(self._children.values())

    def __call__(self, x: DiffTensor) -> DiffTensor:
        for module in self:
            x = module(x)
        return x

    def macs(self, seq_len: int) -> int:
        return int(np.sum([module.macs(seq_len) for module in self], dtype=np.int64))
