"""
Group diagonals, group matrices and the diagonal-basis reshuffle F(M).

A group matrix over G is M = sum_g phi(g) B_g where B_g is the permutation with
(B_g)[h, h'] = 1 iff h = g h'. Equivalently M[h, h'] = phi(h h'^-1). Group
diagonals are stored as index arrays and only densified on request.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from gmconv.config import Settings, get_settings
from gmconv.exceptions import (
    AccuracyError,
    GroupMismatchError,
    InvalidRestrictionError,
    NoInverseError,
    ShapeError,
)
from gmconv.groups import FiniteGroup, Subgroup, direct_product


@dataclass(frozen=True, eq=False)
class GroupDiagonal:
    """B_g as the column index of the single 1 in every row."""

    group: FiniteGroup
    g: int
    col_of_row: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        """B_g x along the last axis."""
        return np.asarray(x)[..., self.col_of_row]

    def apply_transpose(self, y: np.ndarray) -> np.ndarray:
        """B_g^T y = B_{g^-1} y along the last axis."""
        return np.asarray(y)[..., self.group.mul_table[self.g]]

    def to_dense(self) -> np.ndarray:
        n = self.group.order
        dense = np.zeros((n, n))
        dense[np.arange(n), self.col_of_row] = 1.0
        return dense


@dataclass(frozen=True, eq=False)
class GroupMatrix:
    """sum_g coeffs[g] * B_g over ``group``."""

    group: FiniteGroup
    coeffs: np.ndarray

    def to_dense(self) -> np.ndarray:
        return densify(self)


@dataclass(frozen=True, eq=False)
class DiagonalBasisForm:
    """
    F(M): row g holds the entries of M on the support of B_g.

    ``F[g, h] = M[h, g^-1 h]`` so that M = sum_g diag(F[g]) B_g.
    """

    group: FiniteGroup
    F: np.ndarray


class GroupMatrixCheck(NamedTuple):
    is_group_matrix: bool
    deviation: float


def _require_same_group(first: FiniteGroup, second: FiniteGroup) -> None:
    if not first.is_same(second):
        raise GroupMismatchError(f"operands live on {first.name} and {second.name}")


def _require_square(M: np.ndarray, G: FiniteGroup) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.shape != (G.order, G.order):
        raise ShapeError(f"expected a {G.order}x{G.order} matrix for {G.name}, got {M.shape}")
    return M


def group_diagonal(G: FiniteGroup, g: int) -> GroupDiagonal:
    """
    B_g with ``col_of_row[h] = g^-1 h``.

    Raises:
        ElementError: If g is not an element id.
    """
    g = G.check_element(g)
    col_of_row = G.inverse_shift[g].astype(np.intp)
    col_of_row.setflags(write=False)
    return GroupDiagonal(G, g, col_of_row)


def semidirect_diagonal(
    G: FiniteGroup, H: FiniteGroup, phi: np.ndarray, g: int, h: int
) -> np.ndarray:
    """
    Dense B_{(g,h)} over G x|_phi H, assembled as (B_g P_h) kron B_h.

    P_h is the permutation matrix of the automorphism phi_h, (P_h)[a, b] = 1 iff a = phi_h(b).
    """
    action = np.asarray(phi, dtype=np.intp)
    n_g = G.order
    P = np.zeros((n_g, n_g))
    P[action[H.check_element(h)], np.arange(n_g)] = 1.0
    return np.kron(group_diagonal(G, g).to_dense() @ P, group_diagonal(H, h).to_dense())


def gm_from_coeffs(G: FiniteGroup, phi: np.ndarray) -> GroupMatrix:
    """
    Raises:
        ShapeError: If phi does not have one coefficient per element.
    """
    coeffs = np.asarray(phi, dtype=float)
    if coeffs.shape != (G.order,):
        raise ShapeError(f"expected {G.order} coefficients for {G.name}, got shape {coeffs.shape}")
    return GroupMatrix(G, coeffs)


def densify(M: GroupMatrix) -> np.ndarray:
    """Dense |G|x|G| form: entry [h, h'] is phi(h h'^-1)."""
    return M.coeffs[M.group.diagonal_pattern]


def gm_transpose(M: GroupMatrix) -> GroupMatrix:
    return GroupMatrix(M.group, M.coeffs[M.group.inv_table])


def gm_multiply(M: GroupMatrix, N: GroupMatrix) -> GroupMatrix:
    """
    Product of group matrices; coefficients are the group convolution phi * psi.

    Raises:
        GroupMismatchError: If M and N live on different groups.
    """
    _require_same_group(M.group, N.group)
    G = M.group
    coeffs = np.bincount(
        G.mul_table.ravel(),
        weights=np.outer(M.coeffs, N.coeffs).ravel(),
        minlength=G.order,
    )
    return GroupMatrix(G, coeffs)


def gm_inverse(M: GroupMatrix, settings: Settings | None = None) -> GroupMatrix:
    """
    Invert densely by LU and read the coefficients back.

    Raises:
        NoInverseError: If the matrix is singular or its condition number exceeds
            ``settings.max_condition``.
        AccuracyError: If the dense inverse is not a group matrix to working accuracy.
    """
    settings = settings or get_settings()
    dense = densify(M)
    cond = float(np.linalg.cond(dense))
    if not np.isfinite(cond) or cond > settings.max_condition:
        raise NoInverseError(f"group matrix over {M.group.name} has condition number {cond:.3g}")
    try:
        lu_piv = scipy.linalg.lu_factor(dense)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NoInverseError(f"LU factorization failed: {exc}") from exc
    inverse = scipy.linalg.lu_solve(lu_piv, np.eye(M.group.order))
    coeffs, _ = _pattern_mean(inverse, M.group)
    deviation = float(np.abs(inverse - coeffs[M.group.diagonal_pattern]).max())
    bound = 1e-8 * cond * max(1.0, float(np.abs(coeffs).max()))
    if deviation > bound:
        raise AccuracyError(
            f"inverse deviates from a group matrix by {deviation:.3g} > {bound:.3g}"
        )
    return GroupMatrix(M.group, coeffs)


def gm_kronecker(
    M: GroupMatrix, N: GroupMatrix, product: FiniteGroup | None = None
) -> GroupMatrix:
    """
    M kron N as a group matrix over G x H, coefficient of (g, h) = phi(g) psi(h).

    Args:
        M: Group matrix over G
        N: Group matrix over H
        product: Prebuilt direct_product(G, H); built on demand if omitted

    Raises:
        CapacityError: If |G||H| exceeds the configured maximum.
    """
    product = product or direct_product(M.group, N.group)
    if product.order != M.group.order * N.group.order:
        raise GroupMismatchError(f"{product.name} is not {M.group.name}x{N.group.name}")
    return GroupMatrix(product, np.outer(M.coeffs, N.coeffs).ravel())


def restrict_to_subgroup(B: GroupDiagonal, H: Subgroup) -> GroupDiagonal:
    """
    The H-rows and H-columns of B_g as a group diagonal of H (local ids).

    Raises:
        GroupMismatchError: If H is not a subgroup of B's group.
        InvalidRestrictionError: If g is not in H.
    """
    _require_same_group(H.parent, B.group)
    if not H.contains(B.g):
        raise InvalidRestrictionError(f"element {B.g} is not in the subgroup")
    cols = H.local_index[B.col_of_row[H.members]]
    if np.any(cols < 0):
        raise AccuracyError("an H-row of the diagonal points outside H")
    cols.setflags(write=False)
    return GroupDiagonal(H.as_group, int(H.local_index[B.g]), cols)


def restrict_matrix(M: np.ndarray, H: Subgroup) -> np.ndarray:
    """Drop every row and column indexed by G minus H."""
    M = _require_square(M, H.parent)
    return M[np.ix_(H.members, H.members)]


def f_of(M: np.ndarray, G: FiniteGroup) -> DiagonalBasisForm:
    """
    Reshuffle a dense matrix into its diagonal-basis form.

    Raises:
        ShapeError: If M is not |G|x|G|.
    """
    M = _require_square(M, G)
    F = M[np.arange(G.order)[None, :], G.inverse_shift]
    return DiagonalBasisForm(G, F)


def m_of(form: DiagonalBasisForm) -> np.ndarray:
    """Exact inverse of ``f_of``."""
    G = form.group
    F = np.asarray(form.F, dtype=float)
    if F.shape != (G.order, G.order):
        raise ShapeError(f"expected a {G.order}x{G.order} form, got {F.shape}")
    M = np.empty_like(F)
    M[np.arange(G.order)[None, :], G.inverse_shift] = F
    return M


def _pattern_mean(M: np.ndarray, G: FiniteGroup) -> tuple[np.ndarray, np.ndarray]:
    pattern = G.diagonal_pattern.ravel()
    coeffs = np.bincount(pattern, weights=M.ravel(), minlength=G.order) / G.order
    return coeffs, pattern


def is_group_matrix(M: np.ndarray, G: FiniteGroup, tol: float | None = None) -> GroupMatrixCheck:
    """
    Whether every B_g pattern of M is constant within ``tol``.

    The deviation is the largest max-minus-min spread over the patterns.
    """
    tol = get_settings().atol if tol is None else tol
    F = f_of(M, G).F
    deviation = float((F.max(axis=1) - F.min(axis=1)).max())
    return GroupMatrixCheck(deviation <= tol, deviation)


def project_to_group_matrices(M: np.ndarray, G: FiniteGroup) -> GroupMatrix:
    """Orthogonal projection: phi(g) is the mean of M over the support of B_g."""
    coeffs, _ = _pattern_mean(_require_square(M, G), G)
    return GroupMatrix(G, coeffs)
