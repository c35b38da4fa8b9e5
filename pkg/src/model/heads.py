"""Feed-forward prediction heads: one hidden layer each."""

from typing import Sequence

import numpy as np

from blocks.layers import FeedForward, Module
from numerics import ops
from numerics.tensor import DiffTensor


class RegressorHead(FeedForward):
    """Scalar score per row: [N x d] -> [N], or [d] -> []."""

    def __init__(self, d: int, hidden: int, rng: np.random.Generator):
        super().__init__(d, hidden, rng, d_out=1)

    def __call__(self, x: DiffTensor) -> DiffTensor:
        out = super().__call__(x)
        return ops.reshape(out, out.shape[:-1])


class AspectHeads(Module):
    """One regressor per aspect; output columns follow the aspect order."""

    def __init__(self, aspects: Sequence[str], d: int, hidden: int, rng: np.random.Generator):
        super().__init__()
        self.aspects = tuple(aspects)
        for aspect in self.aspects:
            self.add_module(aspect, RegressorHead(d, hidden, rng))

    def __call__(self, x: DiffTensor) -> DiffTensor:
        columns = [self._children[aspect](x) for aspect in self.aspects]
        if x.ndim == 1:
            return ops.stack(columns, axis=0)
        return ops.stack(columns, axis=1)

    def macs(self, seq_len: int) -> int:
        return int(np.sum([self._children[a].macs(seq_len) for a in self.aspects]))


class ClassifierHead(FeedForward):
    """C-way logits per row."""

    def __init__(self, d: int, hidden: int, n_classes: int, rng: np.random.Generator):
        super().__init__(d, hidden, rng, d_out=n_classes)
