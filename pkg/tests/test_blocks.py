"""
Tests for the sequence-mixing blocks: the selective scan against its unrolled
recurrence, causality, the bidirectional layer, and params/MAC accounting.
"""

import numpy as np
import pytest

from blocks import (
    BiMambaLayer,
    Linear,
    MambaBlock,
    SelectiveSSM,
    Sequential,
    TransformerBlock,
    count_params_and_macs,
    selective_scan,
    selective_scan_core,
)
from blocks.bimamba import MambaBranch, bimamba_forward
from blocks.selective_scan import scan_states
from conftest import tiny_model_config
from config.model_config import HMambaConfig
from gradcheck import check_function, check_module, weighted_sum
from numerics.tensor import DiffTensor, parameter
from util.validation import CheckpointError, ConfigError, DimensionError, NumericError


def unrolled_scan(u, delta, A, B, C, D):
    """y_t = sum_{s<=t} C_t . (prod_{r=s+1..t} exp(delta_r A)) delta_s B_s u_s + D u_t."""
    T, d_inner = u.shape
    y = np.zeros((T, d_inner))
    for t in range(T):
        for i in range(d_inner):
            total = D[i] * u[t, i]
            for s in range(t + 1):
                decay = np.exp(delta[s + 1:t + 1, i].sum() * A[i])
                total += np.dot(C[t], decay * delta[s, i] * B[s] * u[s, i])
            y[t, i] = total
    return y


def random_scan_inputs(rng, T, d_inner, d_state):
    return (
        rng.normal(0.0, 1.0, (T, d_inner)),
        rng.uniform(0.05, 1.0, (T, d_inner)),
        -rng.uniform(0.1, 2.0, (d_inner, d_state)),
        rng.normal(0.0, 1.0, (T, d_state)),
        rng.normal(0.0, 1.0, (T, d_state)),
        rng.normal(0.0, 1.0, d_inner),
    )


def reference_branch(S, branch):
    """Causal depthwise conv then the selective scan, one position at a time."""
    w, b = branch.conv_weight.values, branch.conv_bias.values
    T, d_inner = S.shape
    k = w.shape[1]
    conv = np.tile(b, (T, 1))
    for t in range(T):
        for j in range(k):
            s = t - (k - 1) + j
            if s >= 0:
                conv[t] += w[:, j] * S[s]

    ssm = branch.ssm
    r, n = ssm.dt_rank, ssm.d_state
    projected = conv @ ssm.x_proj.weight.values
    B, C = projected[:, r:r + n], projected[:, r + n:r + 2 * n]
    delta = np.logaddexp(0.0, projected[:, :r] @ ssm.dt_proj.weight.values + ssm.dt_proj.bias.values)
    A = -np.exp(ssm.A_log.values)
    D = ssm.D.values
    h = np.zeros((d_inner, n))
    y = np.zeros((T, d_inner))
    for t in range(T):
        h = np.exp(delta[t][:, None] * A) * h + delta[t][:, None] * B[t][None, :] * conv[t][:, None]
        y[t] = h @ C[t] + D * conv[t]
    return y


def reference_bimamba(N, layer):
    """Gate, forward branch, flipped branch flipped back, average, out_proj."""
    projected = N @ layer.in_proj.weight.values
    Z, S = projected[:, :layer.d_inner], projected[:, layer.d_inner:]
    gate = Z / (1.0 + np.exp(-Z))
    O_fwd = gate * reference_branch(S, layer.forward_branch)
    O_bwd = gate * reference_branch(S[::-1], layer.backward_branch)
    return (0.5 * O_fwd + 0.5 * O_bwd[::-1]) @ layer.out_proj.weight.values


# =============================================================================
# Selective scan
# =============================================================================


class TestSelectiveScan:
    def test_matches_unrolled_recurrence(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            T = int(rng.integers(1, 11))
            d_inner = int(rng.integers(1, 9))
            d_state = int(rng.integers(1, 5))
            inputs = random_scan_inputs(rng, T, d_inner, d_state)
            got = selective_scan_core(*[DiffTensor(x) for x in inputs]).values
            np.testing.assert_allclose(got, unrolled_scan(*inputs), rtol=0, atol=1e-10)

    def test_core_is_causal(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            T = int(rng.integers(2, 11))
            u, delta, A, B, C, D = random_scan_inputs(rng, T, 3, 2)
            t0 = int(rng.integers(0, T - 1))
            base = selective_scan_core(u, delta, A, B, C, D).values
            u2, delta2, B2, C2 = u.copy(), delta.copy(), B.copy(), C.copy()
            u2[t0 + 1:] += rng.normal(0.0, 1.0, u2[t0 + 1:].shape)
            delta2[t0 + 1:] += 0.3
            B2[t0 + 1:] *= -2.0
            C2[t0 + 1:] += 1.0
            changed = selective_scan_core(u2, delta2, A, B2, C2, D).values
            np.testing.assert_allclose(changed[:t0 + 1], base[:t0 + 1], rtol=0, atol=1e-12)

    def test_projected_scan_is_causal(self, rng):
        ssm = SelectiveSSM(6, 4, 1, rng)
        u = rng.normal(0.0, 1.0, (9, 6))
        base = selective_scan(DiffTensor(u), ssm).values
        u[5:] = rng.normal(0.0, 3.0, (4, 6))
        changed = selective_scan(DiffTensor(u), ssm).values
        np.testing.assert_allclose(changed[:5], base[:5], rtol=0, atol=1e-12)

    def test_single_position(self, rng):
        inputs = random_scan_inputs(rng, 1, 2, 3)
        got = selective_scan_core(*inputs).values
        u, delta, A, B, C, D = inputs
        expected = (C[0] * delta[0][:, None] * B[0] * u[0][:, None]).sum(axis=1) + D * u[0]
        np.testing.assert_allclose(got[0], expected, atol=1e-12)

    def test_gradients(self, rng):
        inputs = random_scan_inputs(rng, 5, 3, 2)
        assert max(check_function(selective_scan_core, inputs)) < 1e-4

    def test_shape_mismatch(self, rng):
        u, delta, A, B, C, D = random_scan_inputs(rng, 4, 3, 2)
        with pytest.raises(DimensionError):
            selective_scan_core(u, delta, A, B[:3], C, D)

    def test_A_is_negative(self, rng):
        ssm = SelectiveSSM(4, 3, 1, rng)
        assert np.all(ssm.A().values < 0)

    def test_hand_unrolled_example(self):
        ones = np.ones((3, 1))
        u = np.array([[1.0], [0.0], [0.0]])
        expected = np.exp([0.0, -1.0, -2.0])
        states, _, _ = scan_states(u, ones, -np.ones((1, 1)), ones)
        np.testing.assert_allclose(states[:, 0, 0], expected, rtol=0, atol=1e-15)
        y = selective_scan_core(u, ones, -np.ones((1, 1)), ones, ones, np.zeros(1)).values
        np.testing.assert_allclose(y[:, 0], expected, rtol=0, atol=1e-15)

    def test_vanishing_step_size_leaves_only_the_skip(self, rng):
        u, _, A, B, C, D = random_scan_inputs(rng, 8, 4, 3)
        delta = np.full(u.shape, 1e-12)
        y = selective_scan_core(u, delta, A, B, C, D).values
        np.testing.assert_allclose(y, D * u, rtol=0, atol=1e-9)

    def test_state_obeys_the_geometric_bound(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            T = int(rng.integers(1, 40))
            u, delta, A, B, _, _ = random_scan_inputs(rng, T, 3, 2)
            states, decay, drive = scan_states(u, delta, A, B)
            # |h_t| <= max|drive| * (1 + rho + ... + rho^t) with rho = max exp(delta A) < 1
            rho = decay.max()
            assert rho < 1.0
            bound = np.abs(drive).max() * (1.0 - rho ** np.arange(1, T + 1)) / (1.0 - rho)
            assert np.all(np.abs(states).max(axis=(1, 2)) <= bound + 1e-12)

    def test_non_finite_state_names_the_position(self):
        ones = np.ones((3, 1))
        u = np.array([[1.0], [1e300], [1.0]])
        with np.errstate(over="ignore", invalid="ignore"), pytest.raises(NumericError, match="position 1"):
            selective_scan_core(u, ones, -np.ones((1, 1)), ones * 1e300, ones, np.zeros(1))


# =============================================================================
# Bidirectional layer and blocks
# =============================================================================


class TestBiMamba:
    def test_branch_is_causal(self, rng):
        branch = MambaBranch(4, 2, 1, 3, rng)
        S = rng.normal(0.0, 1.0, (8, 4))
        base = branch(DiffTensor(S)).values
        S[6:] += 5.0
        np.testing.assert_allclose(branch(DiffTensor(S)).values[:6], base[:6], atol=1e-12)

    def test_layer_sees_both_directions(self, rng):
        layer = BiMambaLayer(4, 8, 2, 1, 3, rng)
        N = rng.normal(0.0, 1.0, (6, 4))
        base = layer(DiffTensor(N)).values
        late, early = N.copy(), N.copy()
        late[-1] += 1.0
        early[0] += 1.0
        assert not np.allclose(layer(DiffTensor(late)).values[0], base[0])
        assert not np.allclose(layer(DiffTensor(early)).values[-1], base[-1])

    def test_layer_keeps_shape(self, rng):
        layer = BiMambaLayer(4, 8, 2, 1, 3, rng)
        assert layer(DiffTensor(rng.normal(0.0, 1.0, (5, 4)))).shape == (5, 4)

    def test_matches_step_by_step_reference(self, rng):
        layer = BiMambaLayer(8, 16, 4, 1, 4, rng)
        N = rng.normal(0.0, 1.0, (6, 8))
        got = bimamba_forward(DiffTensor(N), layer).values
        np.testing.assert_allclose(got, reference_bimamba(N, layer), rtol=0, atol=1e-12)

    def test_single_position(self, rng):
        layer = BiMambaLayer(8, 16, 4, 1, 4, rng)
        N = rng.normal(0.0, 1.0, (1, 8))
        got = bimamba_forward(DiffTensor(N), layer).values
        np.testing.assert_allclose(got, reference_bimamba(N, layer), rtol=0, atol=1e-12)


class TestBlocks:
    @pytest.mark.parametrize("block_cls", [MambaBlock, TransformerBlock])
    def test_shape_and_length_one(self, block_cls, rng):
        block = block_cls(tiny_model_config(), rng)
        assert block(DiffTensor(rng.normal(0.0, 1.0, (7, 8)))).shape == (7, 8)
        assert block(DiffTensor(rng.normal(0.0, 1.0, (1, 8)))).shape == (1, 8)

    @pytest.mark.parametrize("block_cls", [MambaBlock, TransformerBlock])
    def test_block_gradients(self, block_cls, rng):
        block = block_cls(tiny_model_config(), rng)
        H = DiffTensor(rng.normal(0.0, 1.0, (5, 8)))
        error = check_module(block, lambda: weighted_sum(block(H)), 6, rng)
        assert error < 1e-4

    @pytest.mark.parametrize("T", [1, 2, 17])
    def test_zeroed_branch_outputs_give_the_identity(self, T, rng):
        block = MambaBlock(tiny_model_config(), rng)
        for name in ("mixer.out_proj.weight", "ffn.fc2.weight", "ffn.fc2.bias"):
            block.assign(name, parameter(np.zeros(dict(block.named_parameters())[name].shape)))
        H = rng.normal(0.0, 1.0, (T, 8))
        np.testing.assert_array_equal(block(DiffTensor(H)).values, H)

    def test_attention_is_certain_on_one_position(self, rng):
        block = TransformerBlock(tiny_model_config(), rng)
        _, weights = block.attention.attend(DiffTensor(rng.normal(0.0, 1.0, (1, 8))))
        for w in weights:
            np.testing.assert_array_equal(w.values, [[1.0]])

    def test_attention_rows_are_distributions(self, rng):
        block = TransformerBlock(tiny_model_config(), rng)
        _, weights = block.attention.attend(DiffTensor(rng.normal(0.0, 1.0, (6, 8))))
        assert len(weights) == 2
        for w in weights:
            np.testing.assert_allclose(w.values.sum(axis=1), 1.0, atol=1e-12)


# =============================================================================
# Parameters and MACs
# =============================================================================


class TestAccounting:
    def test_linear(self, rng):
        assert count_params_and_macs(Linear(3, 5, rng), 2) == {"params": 20, "macs": 30}

    def test_tiny_mamba_block_ledger(self, rng):
        # norms 32 + in_proj 256 + branches 2 x 336 + out_proj 128 + ffn 552
        block = MambaBlock(HMambaConfig(d=8, d_state=4), rng)
        assert count_params_and_macs(block, 10) == {"params": 1640, "macs": 17280}

    def test_tiny_transformer_block_ledger(self, rng):
        # norms 32 + four projections 288 + ffn (4d hidden, as in the Mamba block) 552
        block = TransformerBlock(HMambaConfig(d=8, n_heads=2), rng)
        assert count_params_and_macs(block, 10) == {"params": 872, "macs": 9280}

    def test_transformer_ffn_width_can_be_set_apart(self, rng):
        block = TransformerBlock(HMambaConfig(d=8, n_heads=2, transformer_ffn_mult=8), rng)
        assert count_params_and_macs(block, 10) == {"params": 1416, "macs": 14400}

    def test_matched_width_ledger_at_d128(self, rng):
        # with d_state=16, expand=2 and conv k=4 the two BiMamba branches
        # outweigh the four d x d attention projections
        config = HMambaConfig(d=128)
        assert config.resolved_transformer_ffn_mult == config.ffn_mult == 4
        mamba = count_params_and_macs(MambaBlock(config, rng), 50)
        transformer = count_params_and_macs(TransformerBlock(config, rng), 50)
        assert mamba == {"params": 266880, "macs": 14028800}
        assert transformer == {"params": 198272, "macs": 10470400}
        assert mamba["params"] > transformer["params"]
        assert mamba["macs"] > transformer["macs"]

    def test_rejects_bad_transformer_ffn_width(self):
        with pytest.raises(ConfigError):
            HMambaConfig(transformer_ffn_mult=0).validate()

    def test_sequential_sums_children(self, rng):
        stack = Sequential([Linear(4, 4, rng), Linear(4, 2, rng)])
        assert count_params_and_macs(stack, 3) == {"params": 30, "macs": 72}

    def test_rejects_empty_sequence(self, rng):
        with pytest.raises(DimensionError):
            count_params_and_macs(Linear(2, 2, rng), 0)


class TestModuleContainer:
    def test_linear_accepts_vectors(self, rng):
        layer = Linear(3, 2, rng)
        out = layer(DiffTensor(np.ones(3)))
        assert out.shape == (2,)

    def test_assign_rejects_wrong_shape(self, rng):
        layer = Linear(3, 2, rng)
        with pytest.raises(CheckpointError):
            layer.assign("weight", parameter(np.zeros((2, 3))))

    def test_state_dict_round_trip(self, rng):
        source = MambaBlock(tiny_model_config(), rng)
        target = MambaBlock(tiny_model_config(), np.random.default_rng(99))
        target.load_state_dict(source.state_dict())
        H = DiffTensor(rng.normal(0.0, 1.0, (4, 8)))
        np.testing.assert_array_equal(source(H).values, target(H).values)

    def test_load_rejects_missing_names(self, rng):
        layer = Linear(3, 2, rng)
        with pytest.raises(CheckpointError):
            layer.load_state_dict({"weight": np.zeros((3, 2))})
