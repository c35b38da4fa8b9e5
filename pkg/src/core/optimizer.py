"""Adam with per-group learning rates."""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from blocks.layers import Module
from numerics.tensor import parameter
from util.log_util import get_logger
from util.validation import ConfigError, NumericError

logger = get_logger("core.optimizer")


@dataclass
class OptimizerState:
    """First and second moments per parameter name, plus the step counter."""

    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0


def group_of(groups: Mapping[str, List[str]]) -> Dict[str, str]:
    """
    Invert a group -> names map, checking it is a partition.

    Raises:
        ConfigError: A name appears in two groups
    """

    owner: Dict[str, str] = {}
    for group, names in groups.items():
        for name in names:
            if name in owner:
                raise ConfigError(f"parameter {name} is in groups {owner[name]} and {group}")
            owner[name] = group
    return owner


def adam_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, Optional[np.ndarray]],
    state: OptimizerState,
    lr_per_group: Mapping[str, float],
    groups: Mapping[str, List[str]],
    betas: Tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> Tuple[Dict[str, np.ndarray], OptimizerState]:
    """
    One bias-corrected Adam update.

    Parameters:
        params (dict): name -> current values
        grads (dict): name -> gradient (None counts as zero)
        state (OptimizerState): Moments from previous steps
        lr_per_group (dict): group -> learning rate for this step
        groups (dict): group -> parameter names; must cover every parameter exactly once
        betas (tuple): Moment decay rates
        eps (float): Denominator guard

    Returns:
        tuple: (new values by name, new state)

    Raises:
        NumericError: A gradient holds NaN or inf; nothing is updated
    """

    owner = group_of(groups)
    uncovered = sorted(set(params) - set(owner))
    unknown = sorted(set(owner) - set(params))
    if uncovered or unknown:
        raise ConfigError(
            f"parameter groups do not match the parameters (uncovered: {uncovered[:5]}, unknown: {unknown[:5]})"
        )
    missing_rates = sorted(set(groups) - set(lr_per_group))
    if missing_rates:
        raise ConfigError(f"no learning rate for group(s) {missing_rates}")

    clean = {}
    for name, values in params.items():
        grad = grads.get(name)
        grad = np.zeros_like(values) if grad is None else np.asarray(grad, dtype=np.float64)
        if not np.all(np.isfinite(grad)):
            bad = int(np.sum(~np.isfinite(grad)))
            raise NumericError(f"non-finite gradient in {name} ({bad} of {grad.size} entries); step aborted")
        clean[name] = grad

    beta1, beta2 = betas
    step = state.step + 1
    correction1 = 1.0 - beta1 ** step
    correction2 = 1.0 - beta2 ** step
    new_state = OptimizerState(step=step)
    updated = {}
    for name, values in params.items():
        g = clean[name]
        m = beta1 * state.m.get(name, np.zeros_like(values)) + (1.0 - beta1) * g
        v = beta2 * state.v.get(name, np.zeros_like(values)) + (1.0 - beta2) * g * g
        new_state.m[name] = m
        new_state.v[name] = v
        lr = lr_per_group[owner[name]]
        updated[name] = values - lr * (m / correction1) / (np.sqrt(v / correction2) + eps)
    return updated, new_state


class Adam:
    """Adam bound to a module; parameters are swapped for fresh leaves after each step."""

    def __init__(
        self,
        model: Module,
        groups: Mapping[str, List[str]],
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ):
        self.model = model
        self.groups = {g: list(names) for g, names in groups.items()}
        self.betas = tuple(betas)
        self.eps = eps
        self.state = OptimizerState()
        group_of(self.groups)

    def step(self, lr_per_group: Mapping[str, float]) -> None:
        named = dict(self.model.named_parameters())
        updated, self.state = adam_step(
            {name: tensor.values for name, tensor in named.items()},
            {name: tensor.grad for name, tensor in named.items()},
            self.state,
            lr_per_group,
            self.groups,
            self.betas,
            self.eps,
        )
        for name, values in updated.items():
            self.model.assign(name, parameter(values))

    def grad_norms(self) -> Dict[str, float]:
        """L2 norm of the current gradients per group."""
        owner = group_of(self.groups)
        squares = {g: 0.0 for g in self.groups}
        for name, tensor in self.model.named_parameters():
            if tensor.grad is not None:
                squares[owner[name]] += float(np.sum(tensor.grad * tensor.grad))
        return {g: float(np.sqrt(s)) for g, s in squares.items()}
