"""Sequential network over a group/subgroup chain, built from layer configs."""

from __future__ import annotations

import re
from collections.abc import Sequence
from dataclasses import dataclass, field
from gmconv._compat import StrEnum
from typing import Any

import numpy as np

from gmconv.exceptions import ConfigError, GMConvError, ShapeError
from gmconv.groups import FiniteGroup, right_cosets, subgroup_from_generators
from gmconv.layers.conv import ErrorMode, GMConvLayer, StrideLayer
from gmconv.layers.equivariance import equivariance_error, identity_action, translation_actions
from gmconv.layers.pooling import GMPoolLayer, PoolMode
from gmconv.nn.blocks import (
    Block,
    ConvBlock,
    PoolBlock,
    PReLUBlock,
    ReadoutBlock,
    StrideBlock,
)

_ERROR_PATTERN = re.compile(r"^(none|full|ldr\((\d+)\))$")


class LayerType(StrEnum):
    CONV = "conv"
    PRELU = "prelu"
    POOL = "pool"
    STRIDE = "stride"
    READOUT = "readout"


@dataclass(frozen=True)
class LayerConfig:
    """
    One entry of an architecture.

    ``error`` is "none", "full" or "ldr(r)". ``generators`` names the pooling or
    stride subgroup by element ids of the incoming group; an empty list pools
    onto the trivial subgroup (global pooling).
    """

    type: LayerType
    channels: int = 1
    k: int = 1
    error: str = "none"
    residual: bool = False
    generators: tuple[int, ...] = ()
    mode: PoolMode = PoolMode.MEAN
    outputs: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "type", LayerType(self.type))
        object.__setattr__(self, "mode", PoolMode(self.mode))
        object.__setattr__(self, "generators", tuple(int(g) for g in self.generators))
        if not _ERROR_PATTERN.match(self.error):
            raise ConfigError(f"error must be none, full or ldr(r), got {self.error!r}")
        if self.channels < 1 or self.k < 0 or self.outputs < 1:
            raise ConfigError("channels and outputs must be positive and k non-negative")

    @property
    def error_mode(self) -> tuple[ErrorMode | None, int]:
        parsed = _ERROR_PATTERN.match(self.error)
        if self.error == "none":
            return None, 0
        if self.error == "full":
            return ErrorMode.FULL, 0
        return ErrorMode.LDR, int(parsed.group(2))

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> LayerConfig:
        return cls(**raw)


class Network:
    """
    Ordered blocks with reverse-mode chaining.

    Raises:
        ShapeError: If adjacent blocks disagree on shapes; the message names the layer index.
    """

    def __init__(self, blocks: Sequence[Block], input_group: FiniteGroup | None = None):
        self.blocks = list(blocks)
        if not self.blocks:
            raise ShapeError("a network needs at least one block")
        for i in range(1, len(self.blocks)):
            if self.blocks[i - 1].out_shape != self.blocks[i].in_shape:
                raise ShapeError(
                    f"expects input {self.blocks[i].in_shape} "
                    f"but receives {self.blocks[i - 1].out_shape}",
                    layer_index=i,
                )
        self.input_group = input_group
        self._caches: list[Any] = []

    @property
    def output_group(self) -> FiniteGroup | None:
        return self.blocks[-1].output_group

    def forward(self, batch: np.ndarray) -> np.ndarray:
        """Run all blocks, keeping the caches needed by ``backward``."""
        caches = []
        out = np.asarray(batch, dtype=float)
        for i, block in enumerate(self.blocks):
            try:
                out, cache = block.forward(out)
            except ShapeError as exc:
                raise ShapeError(str(exc), layer_index=i) from exc
            caches.append(cache)
        self._caches = caches
        return out

    def predict(self, batch: np.ndarray) -> np.ndarray:
        """Forward pass that leaves the stored caches untouched."""
        saved = self._caches
        try:
            return self.forward(batch)
        finally:
            self._caches = saved

    def backward(self, loss_grad: np.ndarray) -> dict[str, np.ndarray]:
        """
        Gradients for every parameter of the last ``forward`` call.

        Raises:
            ShapeError: If called before forward.
        """
        if len(self._caches) != len(self.blocks):
            raise ShapeError("backward called before forward")
        grads: dict[str, np.ndarray] = {}
        delta = np.asarray(loss_grad, dtype=float)
        for i in reversed(range(len(self.blocks))):
            delta, block_grads = self.blocks[i].backward(self._caches[i], delta)
            for name, grad in block_grads.items():
                grads[f"{i}.{name}"] = grad
        return grads

    def parameters(self) -> dict[str, np.ndarray]:
        return {
            f"{i}.{name}": array
            for i, block in enumerate(self.blocks)
            for name, array in block.parameters().items()
        }

    def parameter_count(self) -> int:
        return sum(array.size for array in self.parameters().values())

    def flat_parameters(self) -> np.ndarray:
        params = list(self.parameters().values())
        return np.concatenate([p.ravel() for p in params]) if params else np.zeros(0)

    def set_flat_parameters(self, vector: np.ndarray) -> None:
        """Write a flat vector back into the parameter arrays in place."""
        offset = 0
        for array in self.parameters().values():
            array[...] = vector[offset : offset + array.size].reshape(array.shape)
            offset += array.size
        if offset != len(vector):
            raise ShapeError(f"expected {offset} parameters, got {len(vector)}")

    def conv_kernel_sizes(self) -> list[int]:
        """N_k of every convolution, i.e. weights per channel pair."""
        sizes = []
        for block in self.blocks:
            if isinstance(block, ConvBlock):
                sizes.append(len(block.layer.support))
            elif isinstance(block, StrideBlock):
                sizes.append(len(block.layer.conv.support))
        return sizes

    def flops_per_sample(self) -> int:
        """Multiply-adds (counted as 2 FLOPs) of the convolution and readout blocks."""
        total = 0
        for block in self.blocks:
            if isinstance(block, ConvBlock | StrideBlock):
                conv = block.layer if isinstance(block, ConvBlock) else block.layer.conv
                rows = block.out_shape[1]
                total += 2 * conv.out_channels * conv.in_channels * len(conv.support) * rows
            elif isinstance(block, ReadoutBlock):
                total += 2 * block.weights.size
        return total


def build_network(
    group: FiniteGroup,
    layers: Sequence[LayerConfig],
    in_channels: int,
    rng: np.random.Generator,
) -> Network:
    """
    Instantiate blocks along the group chain; pooling and stride move to the subgroup.

    Raises:
        ConfigError: If a readout is not last or a layer references invalid subgroup generators.
    """
    blocks: list[Block] = []
    current = group
    channels = in_channels
    for i, spec in enumerate(layers):
        if spec.type is LayerType.READOUT:
            if i != len(layers) - 1:
                raise ConfigError(f"layer {i}: readout must be the last layer")
            blocks.append(ReadoutBlock(channels, current.order, spec.outputs, rng))
            continue
        if spec.type is LayerType.PRELU:
            blocks.append(PReLUBlock(channels, current))
            continue
        if spec.type is LayerType.CONV:
            mode, rank = spec.error_mode
            layer = GMConvLayer.create(
                current, channels, spec.channels, spec.k, mode, rank or 1, rng
            )
            blocks.append(ConvBlock(layer, residual=spec.residual))
            channels = spec.channels
            continue

        try:
            subgroup = subgroup_from_generators(current, list(spec.generators))
        except GMConvError as exc:
            raise ConfigError(
                f"layer {i}: bad subgroup generators {spec.generators}: {exc}"
            ) from exc
        if spec.type is LayerType.POOL:
            pool = GMPoolLayer(right_cosets(current, subgroup), spec.mode)
            blocks.append(PoolBlock(pool, channels))
        else:
            mode, rank = spec.error_mode
            conv = GMConvLayer.create(
                current, channels, spec.channels, spec.k, mode, rank or 1, rng
            )
            blocks.append(StrideBlock(StrideLayer(subgroup, conv)))
            channels = spec.channels
        current = subgroup.as_group
    return Network(blocks, input_group=group)


@dataclass
class EquivarianceProbe:
    """Input actions and matching output actions for measuring a network's equivariance."""

    actions: list = field(default_factory=list)
    output_actions: list = field(default_factory=list)


def network_probe(net: Network) -> EquivarianceProbe | None:
    """
    Translations on the input group, mirrored on the output when it lives on the
    same group. When the signal has been pooled onto the trivial group (with or
    without a readout after it) the output should not move, so the probe measures
    invariance. None otherwise: a readout over a non-trivial group has no
    prescribed output action.
    """
    group = net.input_group
    if group is None:
        return None
    actions = translation_actions(group)
    out_group = net.output_group
    if out_group is not None and out_group.is_same(group):
        return EquivarianceProbe(actions, actions)
    signal_group = next(
        (block.output_group for block in reversed(net.blocks) if block.output_group is not None),
        None,
    )
    if signal_group is not None and signal_group.order == 1:
        return EquivarianceProbe(actions, [identity_action] * len(actions))
    return None


def network_equivariance_error(net: Network, samples: np.ndarray) -> float:
    """Equivariance error of ``net`` on single-sample batches; NaN when no probe applies."""
    probe = network_probe(net)
    if probe is None:
        return float("nan")
    return equivariance_error(
        lambda x: net.predict(x[None])[0],
        probe.actions,
        list(samples),
        probe.output_actions,
    )
