"""Tests for convolution on homogeneous spaces G/H."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from gmconv.checks import numerical_gradient, relative_error
from gmconv.exceptions import ShapeError
from gmconv.groups import homogeneous_space, make_cyclic, make_dihedral, subgroup_from_generators
from gmconv.layers.conv import GMConvLayer, gmconv_forward
from gmconv.layers.homogeneous import (
    HomSpaceConvLayer,
    homspace_conv_backward,
    homspace_conv_forward,
)


def _brute_force(layer, f):
    G, X = layer.space.group, layer.space
    reps = X.representatives
    out = np.zeros((layer.out_channels, X.size))
    for o in range(layer.out_channels):
        for i in range(layer.in_channels):
            for s, g in enumerate(layer.support):
                for y in range(X.size):
                    for x in range(X.size):
                        moved = G.mul(G.inv(G.mul(int(g), int(reps[y]))), int(reps[x]))
                        if layer.space.stabilizer.contains(moved):
                            out[o, x] += layer.weights[o, i, s] * f[i, y]
    return out


@pytest.fixture
def square_points():
    # D4 acting on the four cosets of a reflection
    G = make_dihedral(4)
    return homogeneous_space(G, subgroup_from_generators(G, [1]))


class TestForward:
    def test_matches_brute_force_sum(self, square_points):
        layer = HomSpaceConvLayer.create(square_points, 2, 3, k=2, rng=np.random.default_rng(0))
        f = np.random.default_rng(1).standard_normal((2, 4))

        assert square_points.size == 4
        assert_allclose(homspace_conv_forward(layer, f), _brute_force(layer, f), atol=1e-12)

    def test_trivial_stabilizer_is_group_convolution(self):
        G = make_dihedral(3)
        X = homogeneous_space(G, subgroup_from_generators(G, []), representatives=range(6))
        layer = HomSpaceConvLayer.create(X, 2, 2, k=1, rng=np.random.default_rng(2))
        conv = GMConvLayer(G, 1, layer.support, layer.weights)
        f = np.random.default_rng(3).standard_normal((3, 2, 6))

        assert_allclose(homspace_conv_forward(layer, f), gmconv_forward(conv, f), atol=1e-12)

    def test_identity_kernel_reproduces_signal(self, square_points):
        layer = HomSpaceConvLayer.create(square_points, 1, 1, k=1)
        layer.weights[...] = 0.0
        layer.weights[0, 0, 0] = 1.0
        f = np.random.default_rng(4).standard_normal((1, 4))

        assert_allclose(homspace_conv_forward(layer, f), f)

    def test_abelian_space_is_equivariant(self):
        G = make_cyclic(6)
        X = homogeneous_space(G, subgroup_from_generators(G, [3]))
        layer = HomSpaceConvLayer.create(X, 1, 2, k=1, rng=np.random.default_rng(5))
        f = np.random.default_rng(6).standard_normal((1, 3))
        out = homspace_conv_forward(layer, f)

        for g in G.elements():
            # (g.f)[x] = f[g^-1 x]
            perm = X.act(G.inv(g))
            assert_allclose(homspace_conv_forward(layer, f[:, perm]), out[:, perm], atol=1e-12)

    def test_indicator_shape(self, square_points):
        layer = HomSpaceConvLayer.create(square_points, 1, 1, k=1)

        assert layer.indicators.shape == (len(layer.support), 4, 4)
        # every shifted coset indicator hits exactly one representative
        assert_allclose(layer.indicators.sum(axis=2), np.ones((len(layer.support), 4)))

    def test_wrong_input_shape(self, square_points):
        layer = HomSpaceConvLayer.create(square_points, 1, 1)

        with pytest.raises(ShapeError):
            homspace_conv_forward(layer, np.zeros((1, 8)))

    def test_weights_shape_checked(self, square_points):
        with pytest.raises(ShapeError):
            HomSpaceConvLayer(square_points, 1, np.array([0, 1]), np.zeros((1, 1, 3)))


class TestBackward:
    def test_against_finite_differences(self, square_points):
        layer = HomSpaceConvLayer.create(square_points, 2, 2, k=1, rng=np.random.default_rng(7))
        rng = np.random.default_rng(8)
        f = rng.standard_normal((3, 2, 4))
        dy = rng.standard_normal((3, 2, 4))

        def loss():
            return float(np.sum(dy * homspace_conv_forward(layer, f)))

        dweights, df = homspace_conv_backward(layer, f, dy)

        assert relative_error(numerical_gradient(loss, layer.weights), dweights) < 1e-7
        assert relative_error(numerical_gradient(loss, f), df) < 1e-7

    def test_unbatched_gradient_shape(self, square_points):
        layer = HomSpaceConvLayer.create(square_points, 1, 1)

        _, df = homspace_conv_backward(layer, np.ones((1, 4)), np.ones((1, 4)))

        assert df.shape == (1, 4)
