"""Subgroup pooling over the blocks P_h of a right-coset partition."""

from __future__ import annotations

from dataclasses import dataclass
from gmconv._compat import StrEnum
from functools import cached_property

import numpy as np

from gmconv.exceptions import ShapeError
from gmconv.groups import CosetPartition, FiniteGroup


class PoolMode(StrEnum):
    MAX = "max"
    MEAN = "mean"


@dataclass(frozen=True, eq=False)
class GMPoolLayer:
    """
    Output h reads the block P_h = {h g_i}; the output index set is H (local ids).

    Max-mode ties go to the smallest element id.
    """

    partition: CosetPartition
    mode: PoolMode = PoolMode.MEAN

    @property
    def group(self) -> FiniteGroup:
        return self.partition.subgroup.parent

    @property
    def output_size(self) -> int:
        return self.partition.subgroup.order

    @cached_property
    def blocks(self) -> np.ndarray:
        """(|H|, |G|/|H|) with each row sorted ascending."""
        return np.sort(self.partition.blocks, axis=1)

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.group.order:
            raise ShapeError(f"pooling expects last axis {self.group.order}, got {x.shape}")
        return x


def pool_forward(layer: GMPoolLayer, x: np.ndarray) -> np.ndarray:
    """Pool the last axis from |G| to |H|; leading axes pass through."""
    values = layer._check(x)[..., layer.blocks]
    if PoolMode(layer.mode) is PoolMode.MAX:
        return values.max(axis=-1)
    return values.mean(axis=-1)


def pool_backward(layer: GMPoolLayer, x: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """
    Mean spreads dy[h] / |block| over P_h; max routes dy[h] to the block argmax.

    Raises:
        ShapeError: If dy does not match the pooled shape of x.
    """
    x = layer._check(x)
    dy = np.asarray(dy, dtype=float)
    if dy.shape != x.shape[:-1] + (layer.output_size,):
        raise ShapeError(f"dy shape {dy.shape} does not match pooled shape of {x.shape}")
    dx = np.zeros_like(x)
    if PoolMode(layer.mode) is PoolMode.MEAN:
        dx[..., layer.blocks] = dy[..., None] / layer.blocks.shape[1]
        return dx
    winner = np.argmax(x[..., layer.blocks], axis=-1)
    winners = layer.blocks[np.arange(layer.output_size), winner]
    flat_dx = dx.reshape(-1, x.shape[-1])
    np.put_along_axis(
        flat_dx, winners.reshape(-1, layer.output_size), dy.reshape(-1, layer.output_size), axis=1
    )
    return flat_dx.reshape(x.shape)
