"""
Network blocks with explicit forward and backward passes.

Each block maps (batch, channels, size) to (batch, channels', size'); the
readout maps to (batch, outputs). ``forward`` returns the output and an opaque
cache that ``backward`` consumes.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any

import numpy as np

from gmconv.exceptions import ShapeError
from gmconv.groups import FiniteGroup
from gmconv.layers.conv import (
    GMConvLayer,
    StrideLayer,
    gmconv_backward,
    gmconv_forward,
    stride_backward,
    stride_forward,
)
from gmconv.layers.pooling import GMPoolLayer, pool_backward, pool_forward


class Block(ABC):
    """Base class for network blocks."""

    #: Group indexing the block output, or None when the output is not a signal on a group.
    output_group: FiniteGroup | None = None

    @property
    @abstractmethod
    def in_shape(self) -> tuple[int, ...]:
        """Per-sample input shape."""

    @property
    @abstractmethod
    def out_shape(self) -> tuple[int, ...]:
        """Per-sample output shape."""

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, Any]:
        """
        Validate the input shape and delegate to _forward.

        Raises:
            ShapeError: If x is not (batch, *in_shape).
        """
        x = np.asarray(x, dtype=float)
        if x.shape[1:] != self.in_shape:
            raise ShapeError(
                f"{type(self).__name__} expects "
                f"(batch, {', '.join(map(str, self.in_shape))}), got {x.shape}"
            )
        return self._forward(x)

    @abstractmethod
    def _forward(self, x: np.ndarray) -> tuple[np.ndarray, Any]:
        """Compute the output for a validated batch."""

    @abstractmethod
    def backward(self, cache: Any, dy: np.ndarray) -> tuple[np.ndarray, dict[str, np.ndarray]]:
        """Return (dx, parameter gradients keyed like ``parameters``)."""

    def parameters(self) -> dict[str, np.ndarray]:
        """Trainable arrays; optimizers update them in place."""
        return {}


class ConvBlock(Block):
    def __init__(self, layer: GMConvLayer, residual: bool = False):
        if residual and layer.in_channels != layer.out_channels:
            raise ShapeError("residual connection needs equal input and output channels")
        self.layer = layer
        self.residual = residual
        self.output_group = layer.group

    @property
    def in_shape(self) -> tuple[int, ...]:
        return (self.layer.in_channels, self.layer.group.order)

    @property
    def out_shape(self) -> tuple[int, ...]:
        return (self.layer.out_channels, self.layer.group.order)

    def _forward(self, x):
        y = gmconv_forward(self.layer, x)
        return (y + x if self.residual else y), x

    def backward(self, cache, dy):
        grads = gmconv_backward(self.layer, cache, dy)
        dx = grads.dx + dy if self.residual else grads.dx
        return dx, grads.as_dict()

    def parameters(self):
        return self.layer.parameters()


class StrideBlock(Block):
    def __init__(self, layer: StrideLayer):
        self.layer = layer
        self.output_group = layer.subgroup.as_group

    @property
    def in_shape(self) -> tuple[int, ...]:
        return (self.layer.conv.in_channels, self.layer.conv.group.order)

    @property
    def out_shape(self) -> tuple[int, ...]:
        return (self.layer.conv.out_channels, self.layer.subgroup.order)

    def _forward(self, x):
        return stride_forward(self.layer, x), x

    def backward(self, cache, dy):
        grads = stride_backward(self.layer, cache, dy)
        return grads.dx, grads.as_dict()

    def parameters(self):
        return self.layer.conv.parameters()


class PoolBlock(Block):
    def __init__(self, layer: GMPoolLayer, channels: int):
        self.layer = layer
        self.channels = channels
        self.output_group = layer.partition.subgroup.as_group

    @property
    def in_shape(self) -> tuple[int, ...]:
        return (self.channels, self.layer.group.order)

    @property
    def out_shape(self) -> tuple[int, ...]:
        return (self.channels, self.layer.output_size)

    def _forward(self, x):
        return pool_forward(self.layer, x), x

    def backward(self, cache, dy):
        return pool_backward(self.layer, cache, dy), {}


class PReLUBlock(Block):
    """max(x, 0) + a_c min(x, 0) with one slope per channel."""

    def __init__(self, channels: int, group: FiniteGroup, slope: float = 0.25):
        self.slope = np.full(channels, float(slope))
        self.size = group.order
        self.output_group = group

    @property
    def in_shape(self) -> tuple[int, ...]:
        return (len(self.slope), self.size)

    @property
    def out_shape(self) -> tuple[int, ...]:
        return self.in_shape

    def _forward(self, x):
        a = self.slope[None, :, None]
        return np.where(x > 0, x, a * x), x

    def backward(self, cache, dy):
        positive = cache > 0
        dx = np.where(positive, dy, self.slope[None, :, None] * dy)
        dslope = np.where(positive, 0.0, cache * dy).sum(axis=(0, 2))
        return dx, {"slope": dslope}

    def parameters(self):
        return {"slope": self.slope}


class ReadoutBlock(Block):
    """Dense layer on the flattened signal: z = W vec(x) + b."""

    output_group = None

    def __init__(self, channels: int, size: int, outputs: int, rng: np.random.Generator):
        fan_in = channels * size
        bound = np.sqrt(1.0 / fan_in)
        self.channels = channels
        self.size = size
        self.weights = rng.uniform(-bound, bound, size=(outputs, fan_in))
        self.bias = np.zeros(outputs)

    @property
    def in_shape(self) -> tuple[int, ...]:
        return (self.channels, self.size)

    @property
    def out_shape(self) -> tuple[int, ...]:
        return (len(self.bias),)

    def _forward(self, x):
        flat = x.reshape(x.shape[0], -1)
        return flat @ self.weights.T + self.bias, flat

    def backward(self, cache, dy):
        dx = (dy @ self.weights).reshape(-1, self.channels, self.size)
        return dx, {"weights": dy.T @ cache, "bias": dy.sum(axis=0)}

    def parameters(self):
        return {"weights": self.weights, "bias": self.bias}

