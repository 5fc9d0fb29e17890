"""
Group-matrix convolution with optional learnable equivariance error, and stride.

Signals are arrays of shape (batch, channels, |G|) or (channels, |G|). Every
B_g is applied as an index gather, never as a dense matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from gmconv._compat import StrEnum
from functools import cached_property

import numpy as np

from gmconv.exceptions import GroupMismatchError, InvalidKernelError, ShapeError
from gmconv.groups import FiniteGroup, Subgroup, word_ball
from gmconv.matrices import DiagonalBasisForm, m_of


class ErrorMode(StrEnum):
    FULL = "full"
    LDR = "ldr"


@dataclass
class ErrorTerm:
    """
    Learnable deviation from exact equivariance.

    full: ``coefficients`` has shape (out, in, N_k, |G|) and is added to the
        support rows of F for every channel pair.
    ldr: ``coefficients`` has shape (out, in, r, |G|); vector j is added to
        column ``positions[j]`` of F.
    """

    mode: ErrorMode
    coefficients: np.ndarray
    positions: tuple[int, ...] = ()

    @property
    def rank(self) -> int:
        return len(self.positions)


@dataclass
class GMConvLayer:
    """
    y[o] = sum_i sum_{g in support} w[o, i, g] B_g x[i] (+ error term).

    Example:
        layer = GMConvLayer.create(make_cyclic(8), in_channels=1, out_channels=4, k=1)
        y = gmconv_forward(layer, x)
    """

    group: FiniteGroup
    k: int
    support: np.ndarray
    weights: np.ndarray
    error_term: ErrorTerm | None = None

    def __post_init__(self) -> None:
        self.support = np.asarray(self.support, dtype=np.intp)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.ndim != 3 or self.weights.shape[2] != len(self.support):
            raise ShapeError(
                f"weights must be (out, in, {len(self.support)}), got {self.weights.shape}"
            )
        if self.error_term is None:
            return
        out_c, in_c, n_k = self.weights.shape
        n = self.group.order
        et = self.error_term
        et.coefficients = np.asarray(et.coefficients, dtype=float)
        if et.mode is ErrorMode.FULL:
            expected = (out_c, in_c, n_k, n)
        else:
            if len(set(et.positions)) != et.rank or any(not 0 <= p < n for p in et.positions):
                raise InvalidKernelError(
                    f"LDR positions must be distinct element ids: {et.positions}"
                )
            expected = (out_c, in_c, et.rank, n)
        if et.coefficients.shape != expected:
            raise ShapeError(
                f"{et.mode} error coefficients must be {expected}, got {et.coefficients.shape}"
            )

    @classmethod
    def create(
        cls,
        group: FiniteGroup,
        in_channels: int,
        out_channels: int,
        k: int = 1,
        error: ErrorMode | str | None = None,
        rank: int = 1,
        rng: np.random.Generator | None = None,
    ) -> GMConvLayer:
        """
        New layer with fan-in uniform weights and a zero error term.

        LDR positions are the first ``rank`` elements of the word ball.
        """
        rng = rng or np.random.default_rng(0)
        support = word_ball(group, k)
        bound = np.sqrt(1.0 / (in_channels * len(support)))
        weights = rng.uniform(-bound, bound, size=(out_channels, in_channels, len(support)))
        error_term = None
        if error is not None:
            mode = ErrorMode(error)
            n = group.order
            if mode is ErrorMode.FULL:
                coefficients = np.zeros((out_channels, in_channels, len(support), n))
                positions: tuple[int, ...] = ()
            else:
                if not 0 < rank < n:
                    raise InvalidKernelError(f"LDR rank must be in 1..{n - 1}, got {rank}")
                by_distance = word_ball(group, group.diameter)
                positions = tuple(int(p) for p in by_distance[:rank])
                coefficients = np.zeros((out_channels, in_channels, rank, n))
            error_term = ErrorTerm(mode, coefficients, positions)
        return cls(group, k, support, weights, error_term)

    @property
    def out_channels(self) -> int:
        return int(self.weights.shape[0])

    @property
    def in_channels(self) -> int:
        return int(self.weights.shape[1])

    def parameters(self) -> dict[str, np.ndarray]:
        params = {"weights": self.weights}
        if self.error_term is not None:
            params["error"] = self.error_term.coefficients
        return params

    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters().values())

    @cached_property
    def gather(self) -> np.ndarray:
        """(N_k, |G|): entry [s, h] = g_s^-1 h, so x[..., gather[s]] = B_{g_s} x."""
        return self.group.inverse_shift[self.support].astype(np.intp)

    @cached_property
    def scatter(self) -> np.ndarray:
        """(N_k, |G|): entry [s, h] = g_s h, the transpose gather."""
        return self.group.mul_table[self.support].astype(np.intp)

    @cached_property
    def ldr_gather(self) -> np.ndarray:
        """(r, |G|): entry [j, g] = g^-1 p_j, the input read by F[g, p_j]."""
        G = self.group
        positions = np.asarray(self.error_term.positions if self.error_term else (), dtype=np.intp)
        return G.mul_table[G.inv_table[:, None], positions[None, :]].T.astype(np.intp)

    @cached_property
    def ldr_scatter(self) -> np.ndarray:
        """(r, |G|): entry [j, h] = p_j h^-1, the g whose ldr_gather hits h."""
        G = self.group
        positions = np.asarray(self.error_term.positions if self.error_term else (), dtype=np.intp)
        return G.mul_table[np.ix_(positions, G.inv_table)].astype(np.intp)


@dataclass
class GMConvGrads:
    dweights: np.ndarray
    dx: np.ndarray
    derror: np.ndarray | None = None

    def as_dict(self) -> dict[str, np.ndarray]:
        grads = {"weights": self.dweights}
        if self.derror is not None:
            grads["error"] = self.derror
        return grads


def as_batch(x: np.ndarray, channels: int, size: int) -> tuple[np.ndarray, bool]:
    """Promote (C, n) to (1, C, n); returns the array and whether it was promoted."""
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 2
    if squeeze:
        x = x[None]
    if x.ndim != 3 or x.shape[1:] != (channels, size):
        raise ShapeError(f"expected (batch, {channels}, {size}), got {x.shape}")
    return x, squeeze


def _conv_rows(layer: GMConvLayer, x: np.ndarray, rows: np.ndarray) -> np.ndarray:
    xg = x[:, :, layer.gather[:, rows]]
    y = np.einsum("oik,bikr->bor", layer.weights, xg)
    et = layer.error_term
    if et is None:
        return y
    if et.mode is ErrorMode.FULL:
        return y + np.einsum("oikr,bikr->bor", et.coefficients[..., rows], xg)
    column_of = {int(h): c for c, h in enumerate(rows)}
    for j, p in enumerate(et.positions):
        if p in column_of:
            xl = x[:, :, layer.ldr_gather[j]]
            y[:, :, column_of[p]] += np.einsum("oig,big->bo", et.coefficients[:, :, j], xl)
    return y


def gmconv_forward(layer: GMConvLayer, x: np.ndarray) -> np.ndarray:
    """
    Raises:
        ShapeError: If x is not (batch, in_channels, |G|) or (in_channels, |G|).
    """
    x, squeeze = as_batch(x, layer.in_channels, layer.group.order)
    y = _conv_rows(layer, x, np.arange(layer.group.order))
    return y[0] if squeeze else y


def gmconv_backward(layer: GMConvLayer, x: np.ndarray, dy: np.ndarray) -> GMConvGrads:
    """
    Gradients of sum(dy * forward(x)) with respect to weights, x and the error term.

    Raises:
        ShapeError: If x or dy do not match the layer.
    """
    n = layer.group.order
    x, squeeze = as_batch(x, layer.in_channels, n)
    dy, _ = as_batch(dy, layer.out_channels, n)
    if dy.shape[0] != x.shape[0]:
        raise ShapeError(f"batch sizes differ: x {x.shape[0]}, dy {dy.shape[0]}")

    xg = x[:, :, layer.gather]
    dweights = np.einsum("bon,bikn->oik", dy, xg)
    dxg = np.einsum("oik,bon->bikn", layer.weights, dy)
    derror = None
    et = layer.error_term
    if et is not None and et.mode is ErrorMode.FULL:
        derror = np.einsum("bon,bikn->oikn", dy, xg)
        dxg = dxg + np.einsum("oikn,bon->bikn", et.coefficients, dy)
    dx = dxg[:, :, np.arange(len(layer.support))[:, None], layer.scatter].sum(axis=2)

    if et is not None and et.mode is ErrorMode.LDR:
        derror = np.zeros_like(et.coefficients)
        for j, p in enumerate(et.positions):
            xl = x[:, :, layer.ldr_gather[j]]
            derror[:, :, j] = np.einsum("bo,big->oig", dy[:, :, p], xl)
            dxl = np.einsum("oig,bo->big", et.coefficients[:, :, j], dy[:, :, p])
            dx += dxl[:, :, layer.ldr_scatter[j]]
    return GMConvGrads(dweights, dx[0] if squeeze else dx, derror)


def channel_pair_form(layer: GMConvLayer, out_channel: int, in_channel: int) -> DiagonalBasisForm:
    """F of the linear map from input channel ``in_channel`` to output ``out_channel``."""
    n = layer.group.order
    F = np.zeros((n, n))
    F[layer.support] += layer.weights[out_channel, in_channel][:, None]
    et = layer.error_term
    if et is not None and et.mode is ErrorMode.FULL:
        F[layer.support] += et.coefficients[out_channel, in_channel]
    elif et is not None:
        F[:, list(et.positions)] += et.coefficients[out_channel, in_channel].T
    return DiagonalBasisForm(layer.group, F)


def channel_pair_matrix(layer: GMConvLayer, out_channel: int, in_channel: int) -> np.ndarray:
    """Dense |G|x|G| matrix of one channel pair."""
    return m_of(channel_pair_form(layer, out_channel, in_channel))


@dataclass
class StrideLayer:
    """GM convolution whose output is kept only on the subgroup H."""

    subgroup: Subgroup
    conv: GMConvLayer

    def __post_init__(self) -> None:
        if not self.subgroup.parent.is_same(self.conv.group):
            raise GroupMismatchError(
                f"stride subgroup of {self.subgroup.parent.name} "
                f"used with a conv over {self.conv.group.name}"
            )


def stride_forward(layer: StrideLayer, x: np.ndarray) -> np.ndarray:
    """Output shape (batch, out, |H|), rows ordered as ``subgroup.member_ids``."""
    conv = layer.conv
    x, squeeze = as_batch(x, conv.in_channels, conv.group.order)
    y = _conv_rows(conv, x, layer.subgroup.members)
    return y[0] if squeeze else y


def stride_backward(layer: StrideLayer, x: np.ndarray, dy: np.ndarray) -> GMConvGrads:
    conv = layer.conv
    x, squeeze = as_batch(x, conv.in_channels, conv.group.order)
    dy, _ = as_batch(dy, conv.out_channels, layer.subgroup.order)
    full = np.zeros((dy.shape[0], conv.out_channels, conv.group.order))
    full[:, :, layer.subgroup.members] = dy
    grads = gmconv_backward(conv, x, full)
    if squeeze:
        grads.dx = grads.dx[0]
    return grads
