"""
Padded convolution on finite windows of Z and Z x Z.

The window X_in is dilated by the kernel support N to (X_in)_N = {b^-1 a};
inputs are zero-extended to it, convolved with the window-restricted group
diagonals and read back on X_in. Only the boundary (X_in)_N minus X_in can
break translation equivariance, which bounds the displacement of the layer.
"""

from __future__ import annotations

import itertools
from collections.abc import Hashable, Mapping, Sequence
from dataclasses import asdict, dataclass
from functools import cached_property
from typing import Protocol

import numpy as np

from gmconv.displacement import numerical_rank, shift_residual, span_dimension
from gmconv.exceptions import InvalidGroupError, KernelSupportError, ShapeError
from gmconv.groups import FiniteGroup, word_ball
from gmconv.telemetry import LogLevel, get_recorder


class DiscreteGroup(Protocol):
    """Anything with element multiplication, inverse and an identity."""

    @property
    def identity(self) -> Hashable: ...

    def mul(self, a, b): ...

    def inv(self, a): ...


class Lattice:
    """
    Z^d for d in {1, 2}; elements are coordinate tuples, the group law is addition.

    Generators are the king moves, so the radius-k ball is the (2k+1)^d box.
    """

    def __init__(self, dim: int):
        if dim not in (1, 2):
            raise InvalidGroupError(f"only Z and Z x Z are supported, got dimension {dim}")
        self.dim = dim

    def __repr__(self) -> str:
        return f"Lattice(dim={self.dim})"

    @property
    def identity(self) -> tuple[int, ...]:
        return (0,) * self.dim

    def mul(self, a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
        return tuple(int(x) + int(y) for x, y in zip(a, b, strict=True))

    def inv(self, a: Sequence[int]) -> tuple[int, ...]:
        return tuple(-int(x) for x in a)

    def ball(self, k: int) -> list[tuple[int, ...]]:
        offsets = itertools.product(range(-k, k + 1), repeat=self.dim)
        return sorted(offsets, key=lambda t: (max(abs(c) for c in t), t))

    def box(self, *sizes: int) -> list[tuple[int, ...]]:
        if len(sizes) != self.dim:
            raise ShapeError(f"need {self.dim} window sizes, got {len(sizes)}")
        return list(itertools.product(*(range(s) for s in sizes)))


@dataclass(frozen=True, eq=False)
class PaddedWindow:
    """
    Input window, kernel support and the padded window (X_in)_N.

    Raises:
        KernelSupportError: If the support is not closed under inverse.
        ShapeError: If the window is empty or has repeated elements.
    """

    lattice: DiscreteGroup
    x_in: tuple[Hashable, ...]
    support: tuple[Hashable, ...]

    def __post_init__(self) -> None:
        if not self.x_in or len(set(self.x_in)) != len(self.x_in):
            raise ShapeError("window must be non-empty without repeated elements")
        support = set(self.support)
        if len(support) != len(self.support):
            raise KernelSupportError("kernel support repeats an element")
        if any(self.lattice.inv(b) not in support for b in self.support):
            raise KernelSupportError("kernel support must be closed under inverse")

    @classmethod
    def box(cls, sizes: Sequence[int], radius: int = 1) -> PaddedWindow:
        """X_in = {0..s_1-1} x ... on Z^d with the radius-``radius`` king ball."""
        lattice = Lattice(len(sizes))
        return cls(lattice, tuple(lattice.box(*sizes)), tuple(lattice.ball(radius)))

    @classmethod
    def over_group(cls, group: FiniteGroup, x_in: Sequence[int], k: int = 1) -> PaddedWindow:
        """Window on a finite group with the word ball as support."""
        return cls(group, tuple(int(x) for x in x_in), tuple(int(g) for g in word_ball(group, k)))

    @cached_property
    def padded(self) -> tuple[Hashable, ...]:
        lat = self.lattice
        dilated = {lat.mul(lat.inv(b), a) for a in self.x_in for b in self.support}
        return tuple(sorted(dilated | set(self.x_in)))

    @cached_property
    def boundary(self) -> tuple[Hashable, ...]:
        inside = set(self.x_in)
        return tuple(x for x in self.padded if x not in inside)

    @cached_property
    def index(self) -> dict[Hashable, int]:
        return {x: i for i, x in enumerate(self.padded)}

    @cached_property
    def in_index(self) -> np.ndarray:
        return np.asarray([self.index[x] for x in self.x_in], dtype=np.intp)

    @cached_property
    def full_gather(self) -> np.ndarray:
        """(|N|, |X_padded|): padded index of g_s^-1 x, or -1 when it leaves the padded window."""
        lat = self.lattice
        return np.asarray(
            [
                [self.index.get(lat.mul(lat.inv(g), x), -1) for x in self.padded]
                for g in self.support
            ],
            dtype=np.intp,
        )

    @property
    def gather(self) -> np.ndarray:
        """(|N|, |X_in|): always inside the padded window."""
        return self.full_gather[:, self.in_index]

    def kernel_vector(self, phi: np.ndarray | Mapping[Hashable, float]) -> np.ndarray:
        """
        Kernel as a vector over ``support``.

        Raises:
            KernelSupportError: If a mapping names an element outside the support.
            ShapeError: If an array does not have one entry per support element.
        """
        if isinstance(phi, Mapping):
            position = {g: s for s, g in enumerate(self.support)}
            vector = np.zeros(len(self.support))
            for g, value in phi.items():
                key = tuple(g) if isinstance(g, list) else g
                if key not in position:
                    raise KernelSupportError(f"kernel entry at {g} lies outside the support")
                vector[position[key]] = value
            return vector
        vector = np.asarray(phi, dtype=float)
        if vector.shape != (len(self.support),):
            raise ShapeError(f"kernel must have {len(self.support)} entries, got {vector.shape}")
        return vector


def _pad(window: PaddedWindow, psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=float)
    if psi.shape[-1] != len(window.x_in):
        raise ShapeError(f"input must end with {len(window.x_in)} window values, got {psi.shape}")
    padded = np.zeros(psi.shape[:-1] + (len(window.padded),))
    padded[..., window.in_index] = psi
    return padded


def padded_conv_forward(
    window: PaddedWindow, phi: np.ndarray | Mapping[Hashable, float], psi: np.ndarray
) -> np.ndarray:
    """E^T (sum_g phi(g) B_g) E psi over the padded window; leading axes of psi are batch axes."""
    kernel = window.kernel_vector(phi)
    return np.einsum("s,...sx->...x", kernel, _pad(window, psi)[..., window.gather])


def padded_conv_backward(
    window: PaddedWindow,
    phi: np.ndarray | Mapping[Hashable, float],
    psi: np.ndarray,
    dy: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients (dphi, dpsi) of sum(dy * forward)."""
    kernel = window.kernel_vector(phi)
    padded = _pad(window, psi)
    dy = np.asarray(dy, dtype=float)
    dphi = np.einsum("...x,...sx->s", dy, padded[..., window.gather])
    flat_dy = dy.reshape(-1, len(window.x_in))
    dpadded = np.zeros((flat_dy.shape[0], len(window.padded)))
    contributions = kernel[None, :, None] * flat_dy[:, None, :]
    np.add.at(dpadded, (slice(None), window.gather), contributions)
    dpsi = dpadded[:, window.in_index].reshape(np.shape(psi))
    return dphi, dpsi


def padded_conv_matrix(
    window: PaddedWindow, phi: np.ndarray | Mapping[Hashable, float]
) -> np.ndarray:
    """|X_padded| square matrix of the padded layer; rows outside X_in are zero."""
    kernel = window.kernel_vector(phi)
    size = len(window.padded)
    M = np.zeros((size, size))
    rows = np.broadcast_to(window.in_index, window.gather.shape)
    np.add.at(M, (rows, window.gather), np.broadcast_to(kernel[:, None], window.gather.shape))
    return M


def padded_diagonal_form(window: PaddedWindow, M: np.ndarray) -> np.ndarray:
    """F~ with |N| rows: F~[s, x] = M[x, g_s^-1 x], zero where g_s^-1 x leaves the padded window."""
    gather = window.full_gather
    inside = gather >= 0
    columns = np.broadcast_to(np.arange(len(window.padded)), gather.shape)
    F = np.zeros(gather.shape)
    F[inside] = np.asarray(M)[columns[inside], gather[inside]]
    return F


@dataclass(frozen=True)
class PaddingBound:
    boundary_size: int
    support_size: int
    dim_bound: int
    rank_bound: int
    measured_dim: int
    measured_rank: int

    @property
    def holds(self) -> bool:
        return self.measured_dim <= self.dim_bound and self.measured_rank <= self.rank_bound


def padded_conv_displacement_bound(
    window: PaddedWindow, rng: np.random.Generator | None = None, samples: int = 4
) -> PaddingBound:
    """
    Measure dim_D and the displacement rank of the padded-conv class against
    |boundary| * |N| and |boundary|.
    """
    rng = rng or np.random.default_rng(0)
    n_support = len(window.support)
    residuals = [
        shift_residual(padded_diagonal_form(window, padded_conv_matrix(window, unit)))
        for unit in np.eye(n_support)
    ]
    measured_dim = span_dimension(residuals)
    kernels = [*np.eye(n_support), *rng.normal(size=(samples, n_support))]
    measured_rank = max(
        numerical_rank(
            shift_residual(padded_diagonal_form(window, padded_conv_matrix(window, k)))
        ).rank
        for k in kernels
    )
    n_boundary = len(window.boundary)
    bound = PaddingBound(
        n_boundary,
        n_support,
        n_boundary * n_support,
        n_boundary,
        measured_dim,
        measured_rank,
    )
    level = LogLevel.DEBUG if bound.holds else LogLevel.WARN
    get_recorder().log(
        "padded convolution displacement",
        level,
        {"event_type": "padding_bound", **asdict(bound)},
    )
    return bound
