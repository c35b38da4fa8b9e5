"""
Tests for the differentiable numerics: tensor semantics, primitive ops and
the neural-network primitives, each checked against central differences.
"""

import numpy as np
import pytest

from gradcheck import check_function
from numerics import ops
from numerics.nn_ops import conv1d, depthwise_conv1d, dropout, layer_norm, softmax
from numerics.tensor import DiffTensor, parameter, unbroadcast
from util.validation import ConfigError, DimensionError, GradientStateError, NumericError

OP_TOLERANCE = 1e-4


def _away_from_zero(rng, shape):
    values = rng.uniform(0.2, 1.5, shape)
    return values * rng.choice([-1.0, 1.0], shape)


# =============================================================================
# Tensor semantics
# =============================================================================


class TestDiffTensor:
    def test_values_are_read_only(self):
        t = DiffTensor([1.0, 2.0])
        with pytest.raises(ValueError):
            t.values[0] = 5.0

    def test_constants_keep_no_graph(self):
        a = DiffTensor(np.ones(3))
        out = ops.mul(ops.add(a, 1.0), 2.0)
        assert not out.requires_grad
        assert out.is_leaf

    def test_scalar_backward(self):
        x = parameter([1.0, -2.0, 3.0])
        ops.sum(ops.mul(x, x)).backward()
        np.testing.assert_allclose(x.grad, [2.0, -4.0, 6.0])

    def test_shared_subexpression_accumulates(self):
        x = parameter(3.0)
        y = ops.mul(x, x)
        ops.add(y, y).backward()
        assert float(x.grad) == pytest.approx(12.0)

    def test_second_backward_without_zero_grad_is_rejected(self):
        x = parameter([1.0, 2.0])
        ops.sum(ops.exp(x)).backward()
        with pytest.raises(GradientStateError):
            ops.sum(ops.exp(x)).backward()

    def test_zero_grad_allows_another_pass(self):
        x = parameter([1.0, 2.0])
        ops.sum(x).backward()
        x.zero_grad()
        ops.sum(ops.scale(x, 3.0)).backward()
        np.testing.assert_allclose(x.grad, [3.0, 3.0])

    def test_non_scalar_root_needs_seed(self):
        x = parameter([1.0, 2.0])
        with pytest.raises(DimensionError):
            ops.exp(x).backward()

    def test_seed_gradient(self):
        x = parameter([1.0, 2.0])
        ops.scale(x, 2.0).backward(np.array([1.0, 10.0]))
        np.testing.assert_allclose(x.grad, [2.0, 20.0])

    def test_unreached_leaf_gets_zero_gradient_when_on_tape(self):
        x = parameter([1.0, 2.0])
        y = parameter([3.0, 4.0])
        out = ops.add(ops.sum(x), ops.scale(ops.sum(y), 0.0))
        out.backward()
        np.testing.assert_allclose(y.grad, [0.0, 0.0])

    def test_operator_sugar(self):
        a = parameter([[1.0, 2.0]])
        b = parameter([[3.0], [4.0]])
        out = (a @ b) * 2.0 - 1.0
        assert out.item() == pytest.approx(21.0)

    def test_unbroadcast(self):
        grad = np.ones((3, 4))
        assert unbroadcast(grad, (4,)).tolist() == [3.0] * 4
        assert unbroadcast(grad, (3, 1)).shape == (3, 1)


# =============================================================================
# Primitive gradients
# =============================================================================


class TestOpGradients:
    @pytest.mark.parametrize(
        "name, fn, shapes",
        [
            ("add_broadcast", lambda a, b: ops.add(a, b), [(3, 4), (4,)]),
            ("sub", lambda a, b: ops.sub(a, b), [(3, 4), (3, 4)]),
            ("mul_broadcast", lambda a, b: ops.mul(a, b), [(3, 4), (3, 1)]),
            ("scale", lambda a: ops.scale(a, -1.7), [(5,)]),
            ("neg", lambda a: ops.neg(a), [(2, 3)]),
            ("exp", lambda a: ops.exp(a), [(2, 3)]),
            ("sigmoid", lambda a: ops.sigmoid(a), [(4, 3)]),
            ("silu", lambda a: ops.silu(a), [(4, 3)]),
            ("softplus", lambda a: ops.softplus(a), [(4, 3)]),
            ("tanh", lambda a: ops.tanh(a), [(4, 3)]),
            ("flip", lambda a: ops.flip_sequence(a, axis=0), [(5, 2)]),
            ("concat", lambda a, b: ops.concat([a, b], axis=1), [(3, 2), (3, 4)]),
            ("stack", lambda a, b: ops.stack([a, b], axis=1), [(3,), (3,)]),
            ("slice", lambda a: ops.slice_axis(a, 1, 3, axis=1), [(3, 5)]),
            ("transpose", lambda a: ops.transpose(a), [(2, 5)]),
            ("reshape", lambda a: ops.reshape(a, (6,)), [(2, 3)]),
            ("broadcast_to", lambda a: ops.broadcast_to(a, (4, 3)), [(3,)]),
            ("gather_repeated_rows", lambda a: ops.gather_rows(a, [0, 2, 2, 1]), [(3, 4)]),
            ("pick", lambda a: ops.pick(a, [1, 0, 3]), [(3, 4)]),
            ("sum_axis", lambda a: ops.sum(a, axis=0), [(3, 4)]),
            ("mean_keepdims", lambda a: ops.mean(a, axis=1, keepdims=True), [(3, 4)]),
            ("matmul", lambda a, b: ops.matmul(a, b), [(3, 4), (4, 2)]),
            ("softmax_rows", lambda a: softmax(a, axis=1), [(3, 5)]),
            ("softmax_columns", lambda a: softmax(a, axis=0), [(4, 2)]),
        ],
    )
    def test_gradient_matches_central_differences(self, name, fn, shapes, rng):
        inputs = [rng.normal(0.0, 1.0, shape) for shape in shapes]
        errors = check_function(fn, inputs)
        assert max(errors) < OP_TOLERANCE, name

    def test_div(self, rng):
        a = rng.normal(0.0, 1.0, (3, 2))
        b = rng.uniform(0.5, 2.0, (3, 2))
        assert max(check_function(ops.div, [a, b])) < OP_TOLERANCE

    def test_log(self, rng):
        assert max(check_function(ops.log, [rng.uniform(0.3, 3.0, (4,))])) < OP_TOLERANCE

    def test_power(self, rng):
        fn = lambda a: ops.power(a, 1.5)  # noqa: E731
        assert max(check_function(fn, [rng.uniform(0.3, 3.0, (4,))])) < OP_TOLERANCE

    def test_clamp_min(self, rng):
        fn = lambda a: ops.clamp_min(a, 0.0)  # noqa: E731
        assert max(check_function(fn, [_away_from_zero(rng, (3, 3))])) < OP_TOLERANCE

    def test_layer_norm(self, rng):
        inputs = [rng.normal(0.0, 1.0, (4, 5)), rng.uniform(0.5, 1.5, 5), rng.normal(0.0, 0.1, 5)]
        assert max(check_function(layer_norm, inputs)) < OP_TOLERANCE

    @pytest.mark.parametrize("mode", ["causal", "same"])
    @pytest.mark.parametrize("k", [2, 3])
    def test_conv1d(self, rng, mode, k):
        fn = lambda x, w, b: conv1d(x, w, mode=mode, bias=b)  # noqa: E731
        inputs = [rng.normal(0.0, 1.0, (6, 3)), rng.normal(0.0, 1.0, (2, 3, k)), rng.normal(0.0, 1.0, 2)]
        assert max(check_function(fn, inputs)) < OP_TOLERANCE

    @pytest.mark.parametrize("mode", ["causal", "same"])
    def test_depthwise_conv1d(self, rng, mode):
        fn = lambda x, w, b: depthwise_conv1d(x, w, b, mode=mode)  # noqa: E731
        inputs = [rng.normal(0.0, 1.0, (7, 3)), rng.normal(0.0, 1.0, (3, 4)), rng.normal(0.0, 1.0, 3)]
        assert max(check_function(fn, inputs)) < OP_TOLERANCE

    def test_conv_silu_mean_composition(self, rng):
        fn = lambda x, w: ops.mean(ops.silu(conv1d(x, w, mode="causal")))  # noqa: E731
        inputs = [rng.normal(0.0, 1.0, (6, 3)), rng.normal(0.0, 1.0, (2, 3, 3))]
        assert max(check_function(fn, inputs, eps=1e-5)) < OP_TOLERANCE

    def test_dropout_with_fixed_mask(self, rng):
        fn = lambda a: dropout(a, 0.3, True, np.random.default_rng(5))  # noqa: E731
        assert max(check_function(fn, [rng.normal(0.0, 1.0, (4, 4))])) < OP_TOLERANCE


# =============================================================================
# Forward semantics
# =============================================================================


class TestForwardSemantics:
    def test_log_rejects_non_positive(self):
        with pytest.raises(NumericError):
            ops.log(DiffTensor([1.0, 0.0]))

    def test_matmul_shape_mismatch(self):
        with pytest.raises(DimensionError):
            ops.matmul(DiffTensor(np.ones((2, 3))), DiffTensor(np.ones((2, 3))))

    def test_softmax_rows_sum_to_one(self, rng):
        s = softmax(DiffTensor(rng.normal(0.0, 5.0, (4, 6))), axis=1).values
        np.testing.assert_allclose(s.sum(axis=1), np.ones(4), atol=1e-12)
        assert np.all(s > 0)

    def test_softmax_of_huge_equal_logits(self):
        np.testing.assert_array_equal(softmax(DiffTensor([1000.0, 1000.0])).values, [0.5, 0.5])

    def test_softplus_does_not_overflow(self):
        out = ops.softplus(DiffTensor([-800.0, 0.0, 800.0])).values
        assert np.all(np.isfinite(out))
        assert out[2] == pytest.approx(800.0)

    def test_layer_norm_rows_are_standardized(self, rng):
        x = DiffTensor(rng.normal(3.0, 2.0, (5, 16)))
        out = layer_norm(x, np.ones(16), np.zeros(16)).values
        np.testing.assert_allclose(out.mean(axis=1), 0.0, atol=1e-10)
        np.testing.assert_allclose(out.std(axis=1), 1.0, atol=1e-4)

    def test_causal_conv_ignores_the_future(self, rng):
        x = rng.normal(0.0, 1.0, (8, 2))
        w = rng.normal(0.0, 1.0, (3, 2, 4))
        base = conv1d(DiffTensor(x), DiffTensor(w), mode="causal").values
        x[5:] += 10.0
        changed = conv1d(DiffTensor(x), DiffTensor(w), mode="causal").values
        np.testing.assert_allclose(base[:5], changed[:5])

    def test_same_conv_keeps_length(self, rng):
        out = conv1d(DiffTensor(rng.normal(0.0, 1.0, (5, 3))), DiffTensor(np.ones((4, 3, 3))), mode="same")
        assert out.shape == (5, 4)

    def test_conv_rejects_unknown_mode(self, rng):
        with pytest.raises(ConfigError):
            conv1d(DiffTensor(np.ones((5, 3))), DiffTensor(np.ones((4, 3, 3))), mode="valid")

    def test_dropout_is_identity_in_eval(self, rng):
        x = DiffTensor(rng.normal(0.0, 1.0, (3, 3)))
        assert dropout(x, 0.5, False, None) is x

    def test_dropout_scales_survivors(self):
        x = DiffTensor(np.ones((200, 50)))
        out = dropout(x, 0.2, True, np.random.default_rng(0)).values
        kept = out[out != 0]
        np.testing.assert_allclose(kept, 1.25)
        assert abs(out.mean() - 1.0) < 0.02

    def test_dropout_keeps_the_mean_at_the_ssl_rate(self):
        x = DiffTensor(np.ones(100_000))
        out = dropout(x, 0.1, True, np.random.default_rng(1)).values
        assert abs(out.mean() - 1.0) < 0.01
        assert abs(np.mean(out == 0.0) - 0.1) < 0.01

    def test_flip_reverses_time_only(self):
        x = DiffTensor(np.arange(6.0).reshape(3, 2))
        np.testing.assert_array_equal(ops.flip_sequence(x).values, [[4, 5], [2, 3], [0, 1]])

    def test_gather_rejects_out_of_range(self):
        with pytest.raises(DimensionError):
            ops.gather_rows(DiffTensor(np.ones((3, 2))), [3])
