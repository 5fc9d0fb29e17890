"""Tests for blocks, network assembly and chaining, losses and optimizers."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from gmconv.checks import numerical_gradient, relative_error
from gmconv.exceptions import ConfigError, InvalidKernelError, ShapeError
from gmconv.group_spec import parse_group
from gmconv.groups import make_cyclic, make_dihedral
from gmconv.layers.conv import ErrorMode, GMConvLayer
from gmconv.nn.blocks import ConvBlock, PReLUBlock
from gmconv.nn.losses import LossKind, compute_loss, cross_entropy_loss, mse_loss
from gmconv.nn.network import (
    LayerConfig,
    LayerType,
    Network,
    build_network,
    network_equivariance_error,
)
from gmconv.nn.optim import SGD, AdamW


def _build(spec, layers, seed=0, in_channels=1):
    configs = [LayerConfig(**layer) for layer in layers]
    return build_network(parse_group(spec), configs, in_channels, np.random.default_rng(seed))


EQUIVARIANT = [
    {"type": "conv", "channels": 3, "k": 1},
    {"type": "prelu"},
    {"type": "conv", "channels": 2, "k": 2, "residual": False},
]

INVARIANT = [
    {"type": "conv", "channels": 3},
    {"type": "prelu"},
    {"type": "pool", "generators": []},
    {"type": "readout", "outputs": 2},
]


class TestLayerConfig:
    def test_error_modes(self):
        assert LayerConfig("conv").error_mode == (None, 0)
        assert LayerConfig("conv", error="full").error_mode == (ErrorMode.FULL, 0)
        assert LayerConfig("conv", error="ldr(3)").error_mode == (ErrorMode.LDR, 3)

    def test_strings_become_enums(self):
        config = LayerConfig.from_dict({"type": "pool", "mode": "max", "generators": [2]})

        assert config.type is LayerType.POOL
        assert config.mode == "max"
        assert config.generators == (2,)

    @pytest.mark.parametrize("error", ["ldr", "ldr()", "partial", "LDR(1)"])
    def test_bad_error_pattern(self, error):
        with pytest.raises(ConfigError):
            LayerConfig("conv", error=error)

    def test_non_positive_channels(self):
        with pytest.raises(ConfigError):
            LayerConfig("conv", channels=0)

    def test_unknown_type(self):
        with pytest.raises(ValueError):
            LayerConfig("dense")


class TestBuild:
    def test_equivariant_shapes(self):
        net = _build("C8", EQUIVARIANT)
        x = np.random.default_rng(1).standard_normal((5, 1, 8))

        assert net.forward(x).shape == (5, 2, 8)
        assert net.output_group.order == 8

    def test_pool_moves_to_subgroup(self):
        layers = [{"type": "conv", "channels": 2}, {"type": "pool", "generators": [8, 2]}]
        net = _build("C4xC4", layers)

        assert net.forward(np.zeros((1, 1, 16))).shape == (1, 2, 4)
        assert net.output_group.order == 4

    def test_stride_moves_to_subgroup(self):
        layers = [{"type": "stride", "channels": 2, "generators": [2]}, {"type": "prelu"}]
        net = _build("C8", layers)

        assert net.forward(np.zeros((3, 1, 8))).shape == (3, 2, 4)

    def test_grid_kernel_sizes(self):
        net = _build("C4xC4", [{"type": "conv", "channels": 2, "k": 1}])

        assert net.conv_kernel_sizes() == [9]
        assert net.parameter_count() == 2 * 9

    def test_flops(self):
        net = _build("C8", [{"type": "conv", "channels": 2}, {"type": "readout", "outputs": 3}])

        assert net.flops_per_sample() == 2 * 2 * 1 * 3 * 8 + 2 * 3 * 16

    def test_ldr_layer_parameters(self):
        net = _build("C8", [{"type": "conv", "channels": 1, "error": "ldr(2)"}])

        assert net.parameter_count() == 3 + 2 * 8

    def test_readout_must_be_last(self):
        with pytest.raises(ConfigError, match="readout"):
            _build("C4", [{"type": "readout"}, {"type": "prelu"}])

    def test_bad_generators(self):
        with pytest.raises(ConfigError, match="layer 1"):
            _build("C4", [{"type": "conv"}, {"type": "pool", "generators": [9]}])

    def test_ldr_rank_too_large(self):
        with pytest.raises(InvalidKernelError, match="rank"):
            _build("C4", [{"type": "conv", "error": "ldr(4)"}])

    def test_same_seed_same_parameters(self):
        first = _build("D4", EQUIVARIANT, seed=3)
        second = _build("D4", EQUIVARIANT, seed=3)

        assert_allclose(first.flat_parameters(), second.flat_parameters())


class TestNetwork:
    def test_mismatched_blocks_name_the_layer(self):
        G = make_cyclic(4)
        conv = ConvBlock(GMConvLayer.create(G, 1, 3))

        with pytest.raises(ShapeError, match="layer 1") as info:
            Network([conv, PReLUBlock(2, G)])

        assert info.value.layer_index == 1

    def test_bad_input_names_layer_zero(self):
        net = _build("C4", EQUIVARIANT)

        with pytest.raises(ShapeError, match="layer 0"):
            net.forward(np.zeros((1, 2, 4)))

    def test_empty_network(self):
        with pytest.raises(ShapeError):
            Network([])

    def test_residual_needs_equal_channels(self):
        with pytest.raises(ShapeError):
            ConvBlock(GMConvLayer.create(make_cyclic(4), 1, 2), residual=True)

    def test_backward_before_forward(self):
        with pytest.raises(ShapeError):
            _build("C4", EQUIVARIANT).backward(np.zeros((1, 2, 4)))

    @pytest.mark.parametrize(
        ("spec", "layers", "out_shape"),
        [
            ("D3", EQUIVARIANT, (2, 6)),
            ("C8", INVARIANT, (2,)),
            ("C8", [{"type": "stride", "channels": 2, "generators": [2], "error": "full"},
                    {"type": "pool", "generators": [], "mode": "max"}], (2, 1)),
            ("C6", [{"type": "conv", "channels": 1, "error": "ldr(2)", "residual": True}], (1, 6)),
        ],
    )
    def test_gradients_against_finite_differences(self, spec, layers, out_shape):
        net = _build(spec, layers, seed=4)
        G = parse_group(spec)
        rng = np.random.default_rng(5)
        x = rng.standard_normal((3, 1, G.order))
        dy = rng.standard_normal((3, *out_shape))
        for array in net.parameters().values():
            array[...] = rng.uniform(0.2, 0.6, size=array.shape) * rng.choice([-1, 1], array.shape)

        def loss():
            return float(np.sum(dy * net.forward(x)))

        net.forward(x)
        grads = net.backward(dy)

        params = net.parameters()
        assert grads.keys() == params.keys()
        for name, array in params.items():
            assert relative_error(numerical_gradient(loss, array), grads[name]) < 1e-6, name

    def test_predict_keeps_caches(self):
        net = _build("C4", EQUIVARIANT)
        rng = np.random.default_rng(6)
        x, other = rng.standard_normal((2, 1, 4)), rng.standard_normal((2, 1, 4))
        dy = rng.standard_normal((2, 2, 4))

        net.forward(x)
        expected = net.backward(dy)
        net.predict(other)
        actual = net.backward(dy)

        for name, grad in expected.items():
            assert_allclose(actual[name], grad)

    def test_flat_parameters_round_trip(self):
        net = _build("C8", INVARIANT)
        flat = net.flat_parameters()

        net.set_flat_parameters(2 * flat)

        assert_allclose(net.flat_parameters(), 2 * flat)
        with pytest.raises(ShapeError):
            net.set_flat_parameters(np.append(flat, 0.0))


class TestNetworkEquivariance:
    @pytest.mark.parametrize("spec", ["C8", "D4", "C3xC3"])
    def test_exact_network_is_equivariant(self, spec):
        net = _build(spec, EQUIVARIANT)
        samples = np.random.default_rng(7).standard_normal((3, 1, parse_group(spec).order))

        assert network_equivariance_error(net, samples) <= 1e-12

    def test_pooled_readout_is_invariant(self):
        net = _build("D4", INVARIANT)
        samples = np.random.default_rng(8).standard_normal((3, 1, 8))

        assert network_equivariance_error(net, samples) <= 1e-12

    def test_subgroup_output_is_not_measured(self):
        net = _build("C8", [{"type": "conv"}, {"type": "pool", "generators": [2]}])

        assert math.isnan(network_equivariance_error(net, np.zeros((1, 1, 8))))

    def test_readout_without_global_pool_is_not_measured(self):
        net = _build("C8", [{"type": "conv", "channels": 2}, {"type": "readout", "outputs": 3}])

        assert math.isnan(network_equivariance_error(net, np.ones((1, 1, 8))))

    def test_error_term_breaks_equivariance(self):
        net = _build("C6", [{"type": "conv", "error": "full"}])
        rng = np.random.default_rng(9)
        for name, array in net.parameters().items():
            if name.endswith("error"):
                array[...] = rng.standard_normal(array.shape)

        assert network_equivariance_error(net, rng.standard_normal((2, 1, 6))) > 1e-3


class TestLosses:
    def test_mse(self):
        value, grad = mse_loss(np.array([[1.0, 2.0]]), np.array([[0.0, 0.0]]))

        assert value == pytest.approx(2.5)
        assert_allclose(grad, [[1.0, 2.0]])

    def test_mse_shape_mismatch(self):
        with pytest.raises(ShapeError):
            mse_loss(np.zeros((2, 3)), np.zeros((3, 2)))

    def test_cross_entropy_uniform(self):
        value, grad = cross_entropy_loss(np.zeros((4, 3)), np.array([0, 1, 2, 0]))

        assert value == pytest.approx(np.log(3))
        assert_allclose(grad.sum(axis=1), np.zeros(4), atol=1e-15)

    def test_cross_entropy_is_stable_for_large_logits(self):
        value, _ = cross_entropy_loss(np.array([[1000.0, 0.0]]), np.array([0]))

        assert value == pytest.approx(0.0, abs=1e-12)

    def test_cross_entropy_gradient(self):
        rng = np.random.default_rng(10)
        logits = rng.standard_normal((5, 3))
        labels = np.array([0, 2, 1, 1, 0])

        _, grad = cross_entropy_loss(logits, labels)

        numeric = numerical_gradient(lambda: cross_entropy_loss(logits, labels)[0], logits)
        assert relative_error(numeric, grad) < 1e-7

    def test_cross_entropy_shapes(self):
        with pytest.raises(ShapeError):
            cross_entropy_loss(np.zeros(3), np.array([0]))

    def test_dispatch(self):
        pred, target = np.ones((2, 2)), np.zeros((2, 2))

        assert compute_loss(LossKind.MSE, pred, target)[0] == 1.0
        assert compute_loss("cross_entropy", pred, np.array([0, 1]))[0] == pytest.approx(np.log(2))


class TestOptimizers:
    def test_sgd_step_with_decay(self):
        params = {"w": np.array([1.0, -2.0]), "frozen": np.array([5.0])}

        SGD(0.1, weight_decay=0.5).step(params, {"w": np.array([1.0, 1.0])})

        assert_allclose(params["w"], [1.0 - 0.1 * 1.5, -2.0 - 0.1 * 0.0])
        assert params["frozen"][0] == 5.0

    def test_adam_first_step_is_signed_learning_rate(self):
        params = {"w": np.array([0.0, 0.0])}

        AdamW(learning_rate=0.01).step(params, {"w": np.array([3.0, -0.5])})

        assert_allclose(params["w"], [-0.01, 0.01], rtol=1e-6)

    def test_adam_decoupled_decay(self):
        params = {"w": np.array([2.0])}

        AdamW(learning_rate=0.1, weight_decay=0.5).step(params, {"w": np.array([0.0])})

        assert_allclose(params["w"], [2.0 - 0.1 * 0.5 * 2.0])

    def test_updates_are_in_place(self):
        net = _build("C4", [{"type": "conv"}])
        params = net.parameters()
        before = net.flat_parameters()

        SGD(1.0).step(params, {name: np.ones_like(p) for name, p in params.items()})

        assert_allclose(net.flat_parameters(), before - 1.0)


class TestDihedralChain:
    def test_rotation_subgroup_pooling(self):
        net = _build("D4", [{"type": "conv", "channels": 2}, {"type": "pool", "generators": [2]}])
        G = make_dihedral(4)

        out = net.forward(np.ones((1, 1, G.order)))

        assert out.shape == (1, 2, 4)
        # constant input gives a constant response on every block
        assert_allclose(out, out[..., :1] * np.ones(4))
