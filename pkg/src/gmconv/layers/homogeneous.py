"""Convolution on a homogeneous space X = G/H indexed by coset representatives."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from gmconv.exceptions import ShapeError
from gmconv.groups import HomogeneousSpace, word_ball
from gmconv.layers.conv import as_batch


@dataclass
class HomSpaceConvLayer:
    """
    out[o, x] = sum_i sum_{g in support} w[o, i, g] sum_{y in X} f[i, y] (B_{g y} 1_H)(x).

    The indicator (B_{g y} 1_H)(x) is 1 iff (g y)^-1 x lies in H, i.e. x is in the coset g y H.
    """

    space: HomogeneousSpace
    k: int
    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        self.support = np.asarray(self.support, dtype=np.intp)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.ndim != 3 or self.weights.shape[2] != len(self.support):
            raise ShapeError(
                f"weights must be (out, in, {len(self.support)}), got {self.weights.shape}"
            )

    @classmethod
    def create(
        cls,
        space: HomogeneousSpace,
        in_channels: int,
        out_channels: int,
        k: int = 1,
        rng: np.random.Generator | None = None,
    ) -> HomSpaceConvLayer:
        rng = rng or np.random.default_rng(0)
        support = word_ball(space.group, k)
        bound = np.sqrt(1.0 / (in_channels * len(support)))
        weights = rng.uniform(-bound, bound, size=(out_channels, in_channels, len(support)))
        return cls(space, k, support, weights)

    @property
    def in_channels(self) -> int:
        return int(self.weights.shape[1])

    @property
    def out_channels(self) -> int:
        return int(self.weights.shape[0])

    @cached_property
    def indicators(self) -> np.ndarray:
        """(N_k, |X|, |X|): entry [s, y, x] = (B_{g_s y} 1_H)(x) on representatives."""
        G = self.space.group
        reps = self.space.representatives
        in_h = self.space.stabilizer.local_index >= 0
        gy = G.mul_table[self.support[:, None], reps[None, :]]
        moved = G.mul_table[G.inv_table[gy][:, :, None], reps[None, None, :]]
        return in_h[moved].astype(float)


def homspace_conv_forward(layer: HomSpaceConvLayer, f: np.ndarray) -> np.ndarray:
    """
    Raises:
        ShapeError: If f is not (batch, in_channels, |X|) or (in_channels, |X|).
    """
    f, squeeze = as_batch(f, layer.in_channels, layer.space.size)
    out = np.einsum("oik,kyx,biy->box", layer.weights, layer.indicators, f)
    return out[0] if squeeze else out


def homspace_conv_backward(
    layer: HomSpaceConvLayer, f: np.ndarray, dy: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients (dweights, df) of sum(dy * forward)."""
    f, squeeze = as_batch(f, layer.in_channels, layer.space.size)
    dy, _ = as_batch(dy, layer.out_channels, layer.space.size)
    dweights = np.einsum("box,kyx,biy->oik", dy, layer.indicators, f)
    df = np.einsum("box,oik,kyx->biy", dy, layer.weights, layer.indicators)
    return dweights, df[0] if squeeze else df
