"""
Displacement operators, displacement rank and dimension, and LDR kernels.

D(M) is the row-wise cyclic-shift difference of F(M): it vanishes exactly when
every row of F(M) is constant, i.e. when M is a group matrix. Matrix classes
are always handled through a finite spanning set, which is exact because D is linear.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from gmconv._compat import StrEnum
from typing import NamedTuple

import numpy as np
import scipy.linalg

from gmconv.config import get_settings
from gmconv.exceptions import (
    AccuracyError,
    DuplicatePositionError,
    ElementError,
    GroupMismatchError,
    InvalidFamilyError,
    InvalidKernelError,
    ShapeError,
)
from gmconv.groups import FiniteGroup, direct_product
from gmconv.matrices import (
    DiagonalBasisForm,
    GroupMatrix,
    densify,
    f_of,
    group_diagonal,
    m_of,
    project_to_group_matrices,
)
from gmconv.telemetry import LogLevel, get_recorder


def sylvester_displacement(A: np.ndarray, B: np.ndarray, M: np.ndarray) -> np.ndarray:
    """
    AM - MB.

    Raises:
        ShapeError: If A, M, B are not conformable.
    """
    A, B, M = (np.atleast_2d(np.asarray(X, dtype=float)) for X in (A, B, M))
    m, n = M.shape
    if A.shape != (m, m) or B.shape != (n, n):
        raise ShapeError(f"need A {m}x{m} and B {n}x{n}, got {A.shape} and {B.shape}")
    return A @ M - M @ B


def stein_displacement(A: np.ndarray, B: np.ndarray, M: np.ndarray) -> np.ndarray:
    """
    M - AMB.

    Raises:
        ShapeError: If A, M, B are not conformable.
    """
    A, B, M = (np.atleast_2d(np.asarray(X, dtype=float)) for X in (A, B, M))
    m, n = M.shape
    if A.shape != (m, m) or B.shape != (n, n):
        raise ShapeError(f"need A {m}x{m} and B {n}x{n}, got {A.shape} and {B.shape}")
    return M - A @ M @ B


def cyclic_shift(n: int) -> np.ndarray:
    """Canonical cyclic permutation P with P[i+1, i] = 1 (the dense B_1 of C_n)."""
    P = np.zeros((n, n))
    P[(np.arange(n) + 1) % n, np.arange(n)] = 1.0
    return P


class NumericalRank(NamedTuple):
    rank: int
    tol: float


def numerical_rank(
    A: np.ndarray, rtol: float | None = None, atol: float | None = None
) -> NumericalRank:
    """
    Rank from the diagonal of a column-pivoted QR.

    The threshold is max(rtol * ||A||_F, atol); a matrix whose entries are all
    within atol of zero has rank 0.
    """
    settings = get_settings()
    rtol = settings.rank_rtol if rtol is None else rtol
    atol = settings.atol if atol is None else atol
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0 or float(np.abs(A).max()) <= atol:
        return NumericalRank(0, atol)
    tol = max(rtol * float(np.linalg.norm(A)), atol)
    R, _ = scipy.linalg.qr(A, mode="r", pivoting=True)
    return NumericalRank(int(np.count_nonzero(np.abs(np.diag(R)) > tol)), tol)


def shift_residual(F: np.ndarray) -> np.ndarray:
    """F minus F with columns cycled left by one; works for any 2-d F."""
    F = np.asarray(F, dtype=float)
    return F - np.roll(F, -1, axis=1)


@dataclass(frozen=True, eq=False)
class DisplacementResult:
    residual: np.ndarray
    rank: int
    rank_tol: float


def displacement_d(
    form: DiagonalBasisForm, rtol: float | None = None, atol: float | None = None
) -> DisplacementResult:
    """D(M) = F(M) - F(M) P with the canonical column cycle P."""
    residual = shift_residual(form.F)
    rank, tol = numerical_rank(residual, rtol, atol)
    return DisplacementResult(residual, rank, tol)


def displacement_of(M: np.ndarray, G: FiniteGroup) -> DisplacementResult:
    return displacement_d(f_of(M, G))


@dataclass(frozen=True, eq=False)
class PermutationFamily:
    """
    One full-cycle permutation of the columns per row of F.

    Raises:
        InvalidFamilyError: If some sigma is not a permutation or not a single |G|-cycle.
    """

    sigmas: np.ndarray

    def __post_init__(self) -> None:
        sigmas = np.asarray(self.sigmas)
        if sigmas.ndim != 2 or sigmas.shape[0] != sigmas.shape[1]:
            raise InvalidFamilyError(f"sigmas must be an n x n array, got shape {sigmas.shape}")
        n = sigmas.shape[0]
        if not np.array_equal(np.sort(sigmas, axis=1), np.broadcast_to(np.arange(n), sigmas.shape)):
            raise InvalidFamilyError("every sigma_g must be a permutation of the columns")
        rows = np.arange(n)
        current = np.zeros(n, dtype=np.intp)
        cycle_length = np.zeros(n, dtype=np.intp)
        for step in range(1, n + 1):
            current = sigmas[rows, current]
            cycle_length[(current == 0) & (cycle_length == 0)] = step
        bad = np.flatnonzero(cycle_length != n)
        if bad.size:
            raise InvalidFamilyError(f"sigma for row {int(bad[0])} is not a full cycle")

    @property
    def size(self) -> int:
        return int(np.asarray(self.sigmas).shape[0])

    @classmethod
    def canonical(cls, n: int) -> PermutationFamily:
        """Every row uses x -> x+1 mod n, which reproduces D."""
        return cls(np.tile((np.arange(n) + 1) % n, (n, 1)))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> PermutationFamily:
        sigmas = np.empty((n, n), dtype=np.intp)
        for g in range(n):
            order = rng.permutation(n)
            sigmas[g, order] = np.roll(order, -1)
        return cls(sigmas)


def displacement_d_family(
    form: DiagonalBasisForm,
    family: PermutationFamily,
    rtol: float | None = None,
    atol: float | None = None,
) -> DisplacementResult:
    """Residual[g, x] = F[g, x] - F[g, sigma_g(x)]."""
    F = np.asarray(form.F, dtype=float)
    if family.size != F.shape[1]:
        raise ShapeError(f"family acts on {family.size} columns, form has {F.shape[1]}")
    residual = F - np.take_along_axis(F, np.asarray(family.sigmas, dtype=np.intp), axis=1)
    rank, tol = numerical_rank(residual, rtol, atol)
    return DisplacementResult(residual, rank, tol)


def span_dimension(
    arrays: Sequence[np.ndarray], rtol: float | None = None, atol: float | None = None
) -> int:
    """Dimension of the span of the given arrays (flattened)."""
    if len(arrays) == 0:
        return 0
    return numerical_rank(np.stack([np.ravel(a) for a in arrays]), rtol, atol).rank


def displacement_dimension(
    matrices: Sequence[np.ndarray],
    group: FiniteGroup,
    family: PermutationFamily | None = None,
    rtol: float | None = None,
    atol: float | None = None,
) -> int:
    """
    dim_D of the class spanned by ``matrices``: the rank of the stacked D(M_i).

    An empty class has dimension 0.
    """
    residuals = []
    for M in matrices:
        form = f_of(M, group)
        if family is None:
            residuals.append(shift_residual(form.F))
        else:
            residuals.append(displacement_d_family(form, family).residual)
    return span_dimension(residuals, rtol, atol)


class GMDistance(NamedTuple):
    distance: float
    projection: GroupMatrix


def distance_to_gm(M: np.ndarray, G: FiniteGroup) -> GMDistance:
    """Frobenius distance to the nearest group matrix, and that group matrix."""
    projection = project_to_group_matrices(M, G)
    return GMDistance(float(np.linalg.norm(np.asarray(M) - densify(projection))), projection)


class BoundMode(StrEnum):
    TRANSPOSE = "transpose"
    PRODUCT = "product"
    KRONECKER = "kronecker"


@dataclass(frozen=True)
class DistanceBoundReport:
    mode: BoundMode
    lhs: float
    rhs: float
    holds: bool


def check_distance_bounds(
    M: np.ndarray,
    other: np.ndarray | None,
    group: FiniteGroup,
    mode: BoundMode | str,
    other_group: FiniteGroup | None = None,
    tol: float = 1e-10,
) -> DistanceBoundReport:
    """
    Evaluate one of the distance-to-group-matrix bounds.

    transpose: dist(M) == dist(M^T)
    product:   dist(MN) <= max(|M|, |N|) (dist(M) + dist(N)), N over the same group
    kronecker: dist(M kron N) <= max(|M|, |N|) (dist(M) + dist(N)), N over ``other_group``

    Raises:
        ShapeError: If an operand is missing or has the wrong size.
    """
    mode = BoundMode(mode)
    M = np.asarray(M, dtype=float)
    dist_m = distance_to_gm(M, group).distance
    if mode is BoundMode.TRANSPOSE:
        rhs = distance_to_gm(M.T, group).distance
        return DistanceBoundReport(mode, dist_m, rhs, abs(dist_m - rhs) <= tol * max(1.0, dist_m))

    if other is None:
        raise ShapeError(f"{mode} bound needs a second matrix")
    N = np.asarray(other, dtype=float)
    if mode is BoundMode.PRODUCT:
        lhs = distance_to_gm(M @ N, group).distance
        dist_n = distance_to_gm(N, group).distance
    else:
        if other_group is None:
            raise GroupMismatchError("kronecker bound needs the second group")
        product = direct_product(group, other_group)
        lhs = distance_to_gm(np.kron(M, N), product).distance
        dist_n = distance_to_gm(N, other_group).distance
    scale = max(float(np.linalg.norm(M)), float(np.linalg.norm(N)))
    rhs = scale * (dist_m + dist_n)
    return DistanceBoundReport(mode, lhs, rhs, lhs <= rhs + tol * max(1.0, rhs))


class ClassMode(StrEnum):
    TRANSPOSE = "transpose"
    SUM = "sum"
    KRONECKER = "kronecker"


@dataclass(frozen=True)
class ClassDimensionReport:
    """
    Displacement dimensions of the input classes and the derived class.

    ``holds`` compares against ``bound``; for kronecker, ``general_bound`` is the
    bound that follows from the class spans alone and always applies.
    """

    mode: ClassMode
    dims: dict[str, int]
    bound: int
    holds: bool
    equality: bool
    general_bound: int | None = None
    general_holds: bool | None = None
    notes: list[str] = field(default_factory=list)


def check_class_dimensions(
    mode: ClassMode | str,
    first: Sequence[np.ndarray],
    group: FiniteGroup,
    second: Sequence[np.ndarray] | None = None,
    second_group: FiniteGroup | None = None,
) -> ClassDimensionReport:
    """
    Compare dim_D of transposed, summed or Kronecker-combined classes with the input dimensions.

    Raises:
        GroupMismatchError: If a second class is required but its group is missing.
    """
    mode = ClassMode(mode)
    recorder = get_recorder()
    d_m = displacement_dimension(first, group)
    if mode is ClassMode.TRANSPOSE:
        d_t = displacement_dimension([np.asarray(M).T for M in first], group)
        dims = {"d_M": d_m, "d_transpose": d_t}
        return ClassDimensionReport(mode, dims, d_m, d_t == d_m, d_t == d_m)

    if second is None:
        raise GroupMismatchError(f"{mode} needs a second class")
    if mode is ClassMode.SUM:
        d_n = displacement_dimension(second, group)
        d_sum = displacement_dimension([*first, *second], group)
        bound = d_m + d_n
        report = ClassDimensionReport(
            mode, {"d_M": d_m, "d_M2": d_n, "d_sum": d_sum}, bound, d_sum <= bound, d_sum == bound
        )
        if not report.equality:
            recorder.log(
                "sum class dimension is below d_M + d_M'",
                LogLevel.WARN,
                {"event_type": "class_dimension", "dims": report.dims},
            )
        return report

    if second_group is None:
        raise GroupMismatchError("kronecker needs the group of the second class")
    product = direct_product(group, second_group)
    d_n = displacement_dimension(second, second_group)
    d_kron = displacement_dimension([np.kron(M, N) for M in first for N in second], product)
    n_m, n_n = span_dimension(first), span_dimension(second)
    bound = d_m + d_n
    general = d_m * n_n + n_m * d_n - d_m * d_n
    report = ClassDimensionReport(
        mode,
        {"d_M": d_m, "d_N": d_n, "d_kron": d_kron, "n_M": n_m, "n_N": n_n},
        bound,
        d_kron <= bound,
        d_kron == bound,
        general,
        d_kron <= general,
    )
    if not report.holds:
        report.notes.append("d_M + d_N is exceeded; the span bound still applies")
        recorder.log(
            "kronecker class exceeds d_M + d_N",
            LogLevel.WARN,
            {"event_type": "class_dimension", "dims": report.dims, "general_bound": general},
        )
    return report


@dataclass(frozen=True, eq=False)
class LDRKernel:
    """
    Group-matrix coefficients ``b`` plus r free columns of F.

    ``a_vectors[i]`` is added to column ``positions[i]`` of F = 1 kron b.

    Raises:
        ShapeError: If b or a_vectors have the wrong length.
        DuplicatePositionError: If positions repeat.
        ElementError: If a position is not an element id.
        InvalidKernelError: If r >= |G|.
    """

    group: FiniteGroup
    b: np.ndarray
    a_vectors: np.ndarray
    positions: tuple[int, ...]

    def __post_init__(self) -> None:
        n = self.group.order
        if np.shape(self.b) != (n,):
            raise ShapeError(f"b must have length {n}, got shape {np.shape(self.b)}")
        r = len(self.positions)
        if np.shape(self.a_vectors) != (r, n):
            raise ShapeError(
                f"a_vectors must have shape ({r}, {n}), got {np.shape(self.a_vectors)}"
            )
        if len(set(self.positions)) != r:
            raise DuplicatePositionError(f"positions repeat: {self.positions}")
        if any(not 0 <= p < n for p in self.positions):
            raise ElementError(f"positions must be element ids of {self.group.name}")
        if r and r >= n:
            raise InvalidKernelError(f"rank budget {r} must be below |G| = {n}")

    @property
    def r(self) -> int:
        return len(self.positions)


def ldr_form(kernel: LDRKernel) -> DiagonalBasisForm:
    n = kernel.group.order
    F = np.repeat(np.asarray(kernel.b, dtype=float)[:, None], n, axis=1)
    if kernel.r:
        F[:, list(kernel.positions)] += np.asarray(kernel.a_vectors, dtype=float).T
    return DiagonalBasisForm(kernel.group, F)


def ldr_build(kernel: LDRKernel, check: bool = True) -> np.ndarray:
    """
    Dense matrix with F(M) = 1 kron b + sum_i a_i placed at column g_i.

    Raises:
        AccuracyError: If ``check`` and rank D(M) differs from dim span{a_i}.
    """
    form = ldr_form(kernel)
    M = m_of(form)
    if check:
        expected = numerical_rank(kernel.a_vectors).rank if kernel.r else 0
        actual = displacement_d(form).rank
        if actual != expected:
            raise AccuracyError(f"rank D(M) = {actual}, expected {expected}")
    return M


def ldr_class_basis(G: FiniteGroup, positions: Sequence[int]) -> list[np.ndarray]:
    """Spanning set of the LDR class: every B_g, then a unit entry in each free column."""
    basis = [group_diagonal(G, g).to_dense() for g in G.elements()]
    for p in positions:
        p = G.check_element(p)
        for g in G.elements():
            F = np.zeros((G.order, G.order))
            F[g, p] = 1.0
            basis.append(m_of(DiagonalBasisForm(G, F)))
    return basis


def ldr_project_params(M: np.ndarray, G: FiniteGroup, positions: Sequence[int]) -> LDRKernel:
    """
    Least-squares LDR parameters for a dense matrix.

    Row g of F(M) is fitted by b_g outside the free columns; the free columns
    absorb the remainder exactly.
    """
    positions = tuple(G.check_element(p) for p in positions)
    F = f_of(M, G).F
    fixed = np.setdiff1d(np.arange(G.order), positions)
    b = F[:, fixed].mean(axis=1) if fixed.size else np.zeros(G.order)
    a_vectors = (F[:, list(positions)] - b[:, None]).T if positions else np.zeros((0, G.order))
    return LDRKernel(G, b, a_vectors, positions)
