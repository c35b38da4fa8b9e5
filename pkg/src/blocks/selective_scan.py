"""Selective state space scan with input-dependent step size, B and C."""

import math

import numpy as np

from blocks.layers import Linear, Module
from numerics import ops
from numerics.tensor import DiffTensor, as_tensor
from util.validation import DimensionError, NumericError

# Recurrence terms per (t, channel, state): discretized A, B*u, and C readout
SCAN_MACS_PER_STATE = 3
DT_MIN = 1e-3
DT_MAX = 0.1


class SelectiveSSM(Module):
    """
    Parameters of one selective SSM over `d_inner` channels.

    x_proj maps each position to [dt_low; B; C]; dt_proj lifts the rank-r
    dt_low to one step size per channel. A = -exp(A_log) stays negative.
    """

    def __init__(self, d_inner: int, d_state: int, dt_rank: int, rng: np.random.Generator):
        super().__init__()
        self.d_inner = d_inner
        self.d_state = d_state
        self.dt_rank = dt_rank

        self.add_module("x_proj", Linear(d_inner, dt_rank + 2 * d_state, rng, bias=False))
        dt_proj = self.add_module("dt_proj", Linear(dt_rank, d_inner, rng))
        dt_proj.assign("weight", _leaf(rng.uniform(-dt_rank ** -0.5, dt_rank ** -0.5, (dt_rank, d_inner))))
        # softplus(bias) lands log-uniformly in [DT_MIN, DT_MAX]
        dt = np.exp(rng.uniform(math.log(DT_MIN), math.log(DT_MAX), d_inner))
        dt_proj.assign("bias", _leaf(dt + np.log(-np.expm1(-dt))))

        self.add_parameter("A_log", np.tile(np.log(np.arange(1, d_state + 1, dtype=np.float64)), (d_inner, 1)))
        self.add_parameter("D", np.ones(d_inner))

    def A(self) -> DiffTensor:
        return ops.neg(ops.exp(self.A_log))

    def macs(self, seq_len: int) -> int:
        return (
            self.x_proj.macs(seq_len)
            + self.dt_proj.macs(seq_len)
            + seq_len * self.d_inner * self.d_state * SCAN_MACS_PER_STATE
        )


def _leaf(values) -> DiffTensor:
    return DiffTensor(values, requires_grad=True)


def scan_states(u: np.ndarray, delta: np.ndarray, A: np.ndarray, B: np.ndarray):
    """
    Run the recurrence h_t = exp(delta_t A) h_{t-1} + delta_t B_t u_t from h_{-1} = 0.

    Parameters:
        u (np.ndarray): [T x d_inner] inputs
        delta (np.ndarray): [T x d_inner] step sizes
        A (np.ndarray): [d_inner x d_state] state matrix (negative)
        B (np.ndarray): [T x d_state] input maps

    Returns:
        tuple: (states [T x d_inner x d_state], discretized A, discretized B*u)
    """

    T, d_inner = u.shape
    decay = np.exp(delta[:, :, None] * A[None, :, :])
    drive = delta[:, :, None] * B[:, None, :] * u[:, :, None]
    states = np.empty((T, d_inner, A.shape[1]))
    h = np.zeros((d_inner, A.shape[1]))
    for t in range(T):
        h = decay[t] * h + drive[t]
        if not np.all(np.isfinite(h)):
            raise NumericError(f"selective scan state became non-finite at position {t}")
        states[t] = h
    return states, decay, drive


def selective_scan_core(u, delta, A, B, C, D) -> DiffTensor:
    """
    Fused scan y_t = C_t . h_t + D * u_t with a hand-derived backward pass.

    Parameters:
        u (DiffTensor): [T x d_inner]
        delta (DiffTensor): [T x d_inner], > 0
        A (DiffTensor): [d_inner x d_state]
        B (DiffTensor): [T x d_state]
        C (DiffTensor): [T x d_state]
        D (DiffTensor): [d_inner]

    Returns:
        DiffTensor: [T x d_inner]
    """

    u, delta, A, B, C, D = (as_tensor(t) for t in (u, delta, A, B, C, D))
    if u.ndim != 2 or u.shape[0] < 1:
        raise DimensionError(f"selective scan needs a [T x d_inner] input with T >= 1, got {u.shape}")
    T, d_inner = u.shape
    d_state = A.shape[-1]
    expected = {
        "delta": (delta.shape, (T, d_inner)),
        "A": (A.shape, (d_inner, d_state)),
        "B": (B.shape, (T, d_state)),
        "C": (C.shape, (T, d_state)),
        "D": (D.shape, (d_inner,)),
    }
    for name, (got, want) in expected.items():
        if got != want:
            raise DimensionError(f"selective scan: {name} has shape {got}, expected {want}")

    uv, dv, Av, Bv, Cv, Dv = u.values, delta.values, A.values, B.values, C.values, D.values
    states, decay, _ = scan_states(uv, dv, Av, Bv)
    out = np.einsum("tdn,tn->td", states, Cv) + Dv * uv

    def backward(g):
        g_C = np.einsum("td,tdn->tn", g, states)
        g_D = (g * uv).sum(axis=0)
        g_decay = np.empty_like(states)
        g_drive = np.empty_like(states)
        carry = np.zeros((d_inner, d_state))
        for t in range(T - 1, -1, -1):
            g_h = g[t][:, None] * Cv[t][None, :] + carry
            g_decay[t] = g_h * (states[t - 1] if t > 0 else 0.0)
            g_drive[t] = g_h
            carry = g_h * decay[t]
        through_decay = g_decay * decay
        g_delta = (through_decay * Av[None]).sum(axis=2) + (
            g_drive * Bv[:, None, :]
        ).sum(axis=2) * uv
        g_A = (through_decay * dv[:, :, None]).sum(axis=0)
        g_B = (g_drive * (dv * uv)[:, :, None]).sum(axis=1)
        g_u = g * Dv + (g_drive * Bv[:, None, :]).sum(axis=2) * dv
        return g_u, g_delta, g_A, g_B, g_C, g_D

    return DiffTensor(out, parents=(u, delta, A, B, C, D), backward=backward, op="selective_scan")


def selective_scan(u: DiffTensor, params: SelectiveSSM) -> DiffTensor:
    """
    Selective scan with delta, B and C computed per position from u.

    Parameters:
        u (DiffTensor): [T x d_inner] branch input
        params (SelectiveSSM): Projections, A_log and D of this branch

    Returns:
        DiffTensor: [T x d_inner]
    """

    r, n = params.dt_rank, params.d_state
    projected = params.x_proj(u)
    dt_low = ops.slice_axis(projected, 0, r, axis=1)
    B = ops.slice_axis(projected, r, r + n, axis=1)
    C = ops.slice_axis(projected, r + n, r + 2 * n, axis=1)
    delta = ops.softplus(params.dt_proj(dt_low))
    return selective_scan_core(u, delta, params.A(), B, C, params.D)
