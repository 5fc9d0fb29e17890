"""Tests for displacement operators, ranks, class dimensions, distance bounds and LDR kernels."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from gmconv.displacement import (
    BoundMode,
    LDRKernel,
    PermutationFamily,
    check_class_dimensions,
    check_distance_bounds,
    cyclic_shift,
    displacement_d,
    displacement_d_family,
    displacement_dimension,
    displacement_of,
    distance_to_gm,
    ldr_build,
    ldr_class_basis,
    ldr_form,
    ldr_project_params,
    numerical_rank,
    shift_residual,
    span_dimension,
    stein_displacement,
    sylvester_displacement,
)
from gmconv.exceptions import (
    DuplicatePositionError,
    ElementError,
    GroupMismatchError,
    InvalidFamilyError,
    InvalidKernelError,
    ShapeError,
)
from gmconv.group_spec import parse_group
from gmconv.groups import make_cyclic, make_dihedral, word_ball
from gmconv.matrices import densify, f_of, gm_from_coeffs, group_diagonal


def _random_gm_dense(G, seed):
    return densify(gm_from_coeffs(G, np.random.default_rng(seed).standard_normal(G.order)))


def _ldr_kernel(G, r, seed):
    rng = np.random.default_rng(seed)
    positions = tuple(int(p) for p in word_ball(G, G.diameter)[:r])
    return LDRKernel(G, rng.standard_normal(G.order), rng.standard_normal((r, G.order)), positions)


class TestClassicalDisplacement:
    def test_sylvester_of_commuting_pair(self):
        C = _random_gm_dense(make_cyclic(5), 0)
        P = cyclic_shift(5)

        assert_allclose(sylvester_displacement(P, P, C), np.zeros((5, 5)), atol=1e-14)

    def test_stein_of_circulant(self):
        C = _random_gm_dense(make_cyclic(6), 1)
        P = cyclic_shift(6)

        assert_allclose(stein_displacement(P, P.T, C), np.zeros((6, 6)), atol=1e-14)

    def test_rectangular_operands(self):
        M = np.ones((2, 3))

        assert sylvester_displacement(np.eye(2), np.eye(3), M).shape == (2, 3)

    def test_nonconformable(self):
        with pytest.raises(ShapeError):
            sylvester_displacement(np.eye(3), np.eye(2), np.ones((3, 3)))
        with pytest.raises(ShapeError):
            stein_displacement(np.eye(2), np.eye(2), np.ones((3, 3)))

    def test_cyclic_shift_is_generator_diagonal(self):
        assert_array_equal(cyclic_shift(7), group_diagonal(make_cyclic(7), 1).to_dense())


class TestNumericalRank:
    def test_zero_matrix(self):
        assert numerical_rank(np.zeros((4, 4))).rank == 0

    def test_entries_below_atol(self):
        assert numerical_rank(np.full((3, 3), 1e-12)).rank == 0

    def test_outer_product(self):
        rng = np.random.default_rng(2)
        A = np.outer(rng.standard_normal(6), rng.standard_normal(5))

        assert numerical_rank(A).rank == 1

    def test_full_rank(self):
        assert numerical_rank(np.eye(7)).rank == 7

    def test_tolerance_scales_with_norm(self):
        result = numerical_rank(100 * np.eye(3), rtol=1e-6)

        assert result.tol == pytest.approx(1e-6 * 100 * np.sqrt(3))

    def test_span_dimension(self):
        a, b = np.eye(3), np.ones((3, 3))

        assert span_dimension([a, b, a + 2 * b]) == 2
        assert span_dimension([]) == 0


class TestDisplacementOperator:
    @pytest.mark.parametrize("spec", ["C1", "C8", "D4", "S3", "C4xC4"])
    def test_group_matrices_have_zero_displacement(self, spec):
        G = parse_group(spec)
        result = displacement_of(_random_gm_dense(G, 3), G)

        assert result.rank == 0
        assert_array_equal(result.residual, np.zeros((G.order, G.order)))

    def test_generic_matrix_has_rank_n_minus_one(self):
        G = make_dihedral(3)
        M = np.random.default_rng(4).standard_normal((6, 6))

        assert displacement_of(M, G).rank == 5

    def test_residual_is_column_cycle_difference(self):
        F = np.arange(12.0).reshape(3, 4) ** 2

        assert_array_equal(shift_residual(F), F - F[:, [1, 2, 3, 0]])

    def test_single_entry_has_rank_one(self):
        G = make_cyclic(8)
        M = _random_gm_dense(G, 5)
        M[3, 6] += 1.0

        assert displacement_of(M, G).rank == 1


class TestPermutationFamily:
    def test_canonical_reproduces_displacement(self):
        G = make_dihedral(4)
        form = f_of(np.random.default_rng(6).standard_normal((8, 8)), G)

        family = displacement_d_family(form, PermutationFamily.canonical(8))

        assert_array_equal(family.residual, displacement_d(form).residual)

    def test_random_family_is_valid(self):
        family = PermutationFamily.random(9, np.random.default_rng(7))

        assert family.size == 9

    def test_group_matrices_vanish_for_every_family(self):
        G = make_cyclic(6)
        form = f_of(_random_gm_dense(G, 8), G)

        result = displacement_d_family(form, PermutationFamily.random(6, np.random.default_rng(9)))

        assert result.rank == 0

    def test_perturbation_is_detected(self):
        G = make_cyclic(6)
        M = _random_gm_dense(G, 10)
        M[0, 2] += 0.5
        family = PermutationFamily.random(6, np.random.default_rng(11))

        assert displacement_d_family(f_of(M, G), family).rank == 1

    def test_short_cycle_rejected(self):
        sigmas = np.tile([1, 0, 3, 2], (4, 1))

        with pytest.raises(InvalidFamilyError, match="full cycle"):
            PermutationFamily(sigmas)

    def test_non_permutation_rejected(self):
        with pytest.raises(InvalidFamilyError, match="permutation"):
            PermutationFamily(np.zeros((3, 3), dtype=int))

    def test_non_square_rejected(self):
        with pytest.raises(InvalidFamilyError):
            PermutationFamily(np.zeros((2, 3), dtype=int))

    def test_size_mismatch(self):
        form = f_of(np.eye(4), make_cyclic(4))

        with pytest.raises(ShapeError):
            displacement_d_family(form, PermutationFamily.canonical(5))


class TestDisplacementDimension:
    def test_group_matrix_class_is_zero(self):
        G = make_dihedral(4)
        basis = [group_diagonal(G, g).to_dense() for g in G.elements()]

        assert displacement_dimension(basis, G) == 0

    def test_empty_class(self):
        assert displacement_dimension([], make_cyclic(4)) == 0

    def test_all_matrices(self):
        G = make_cyclic(4)
        basis = [np.outer(np.eye(4)[i], np.eye(4)[j]) for i in range(4) for j in range(4)]

        assert displacement_dimension(basis, G) == 16 - 4

    @pytest.mark.parametrize(("spec", "r"), [("C8", 1), ("C8", 2), ("C12", 1), ("C4xC4", 3)])
    def test_ldr_class_dimension(self, spec, r):
        G = parse_group(spec)
        positions = word_ball(G, G.diameter)[:r]

        assert displacement_dimension(ldr_class_basis(G, positions), G) == G.order * r


class TestDistance:
    def test_group_matrix_distance_is_zero(self):
        G = make_cyclic(5)
        M = _random_gm_dense(G, 12)

        result = distance_to_gm(M, G)

        assert result.distance == pytest.approx(0.0, abs=1e-12)
        assert_allclose(densify(result.projection), M)

    def test_single_entry_distance(self):
        G = make_cyclic(4)
        M = np.zeros((4, 4))
        M[0, 0] = 1.0

        # the B_0 pattern has mean 1/4, so three entries miss by 1/4 and one by 3/4
        assert distance_to_gm(M, G).distance == pytest.approx(np.sqrt(3 / 16 + 9 / 16))


class TestDistanceBounds:
    @pytest.fixture
    def operands(self):
        G = make_dihedral(3)
        rng = np.random.default_rng(13)
        M = _random_gm_dense(G, 14) + 0.1 * rng.standard_normal((6, 6))
        N = _random_gm_dense(G, 15) + 0.1 * rng.standard_normal((6, 6))
        return G, M, N

    def test_transpose_is_equal(self, operands):
        G, M, _ = operands

        report = check_distance_bounds(M, None, G, "transpose")

        assert report.mode is BoundMode.TRANSPOSE
        assert report.holds
        assert report.lhs == pytest.approx(report.rhs)

    def test_product_bound(self, operands):
        G, M, N = operands

        assert check_distance_bounds(M, N, G, BoundMode.PRODUCT).holds

    def test_kronecker_bound(self, operands):
        G, M, _ = operands
        H = make_cyclic(2)
        N = _random_gm_dense(H, 16) + 0.1 * np.random.default_rng(17).standard_normal((2, 2))

        report = check_distance_bounds(M, N, G, "kronecker", other_group=H)

        assert report.holds
        assert 0 < report.lhs <= report.rhs

    def test_missing_operand(self, operands):
        G, M, _ = operands

        with pytest.raises(ShapeError):
            check_distance_bounds(M, None, G, "product")

    def test_kronecker_needs_second_group(self, operands):
        G, M, N = operands

        with pytest.raises(GroupMismatchError):
            check_distance_bounds(M, N, G, "kronecker")

    def test_unknown_mode(self, operands):
        G, M, _ = operands

        with pytest.raises(ValueError):
            check_distance_bounds(M, None, G, "sum")


class TestClassDimensionBounds:
    def test_transpose_preserves_dimension(self):
        G = make_cyclic(8)

        report = check_class_dimensions("transpose", ldr_class_basis(G, [1]), G)

        assert report.dims == {"d_M": 8, "d_transpose": 8}
        assert report.holds
        assert report.equality

    def test_sum_of_generic_singletons(self):
        G = make_cyclic(4)
        rng = np.random.default_rng(18)
        first, second = [rng.standard_normal((4, 4))], [rng.standard_normal((4, 4))]

        report = check_class_dimensions("sum", first, G, second)

        assert report.dims == {"d_M": 1, "d_M2": 1, "d_sum": 2}
        assert report.holds
        assert report.equality

    def test_sum_with_shared_matrix_is_strict(self):
        G = make_cyclic(4)
        M = np.random.default_rng(19).standard_normal((4, 4))

        report = check_class_dimensions("sum", [M], G, [M])

        assert report.dims["d_sum"] == 1
        assert report.holds
        assert not report.equality

    def test_kronecker_of_group_matrix_classes(self):
        G, H = make_cyclic(2), make_cyclic(3)
        first = [group_diagonal(G, g).to_dense() for g in G.elements()]
        second = [group_diagonal(H, h).to_dense() for h in H.elements()]

        report = check_class_dimensions("kronecker", first, G, second, H)

        assert report.dims["d_kron"] == 0
        assert report.holds

    def test_kronecker_with_singleton_exceeds_sum_bound(self):
        G = make_cyclic(2)
        first = [group_diagonal(G, g).to_dense() for g in G.elements()]
        second = [np.array([[1.0, 2.0], [3.0, 5.0]])]

        report = check_class_dimensions("kronecker", first, G, second, G)

        assert report.dims == {"d_M": 0, "d_N": 1, "d_kron": 2, "n_M": 2, "n_N": 1}
        assert report.bound == 1
        assert not report.holds
        assert report.general_bound == 2
        assert report.general_holds
        assert report.notes

    def test_second_class_required(self):
        with pytest.raises(GroupMismatchError):
            check_class_dimensions("sum", [np.eye(3)], make_cyclic(3))


class TestLDRKernel:
    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_build_has_rank_r(self, r):
        G = make_cyclic(8)
        kernel = _ldr_kernel(G, r, 20 + r)

        M = ldr_build(kernel)

        assert displacement_of(M, G).rank == r

    def test_zero_budget_is_group_matrix(self):
        G = make_dihedral(3)
        kernel = LDRKernel(G, np.arange(6.0), np.zeros((0, 6)), ())

        assert_allclose(ldr_build(kernel), densify(gm_from_coeffs(G, np.arange(6.0))))

    def test_form_layout(self):
        G = make_cyclic(4)
        kernel = LDRKernel(G, np.ones(4), np.array([[1.0, 2.0, 3.0, 4.0]]), (2,))

        F = ldr_form(kernel).F

        assert_array_equal(F[:, 2], [2.0, 3.0, 4.0, 5.0])
        assert_array_equal(F[:, [0, 1, 3]], np.ones((4, 3)))

    def test_constant_a_vector_has_rank_one(self):
        G = make_cyclic(5)
        kernel = LDRKernel(G, np.zeros(5), np.full((1, 5), 2.0), (1,))

        assert displacement_of(ldr_build(kernel), G).rank == 1

    def test_projection_recovers_parameters(self):
        G = parse_group("C2xC3")
        kernel = _ldr_kernel(G, 2, 24)

        recovered = ldr_project_params(ldr_build(kernel), G, kernel.positions)

        assert_allclose(recovered.b, kernel.b)
        assert_allclose(recovered.a_vectors, kernel.a_vectors, atol=1e-12)

    def test_duplicate_positions(self):
        G = make_cyclic(4)

        with pytest.raises(DuplicatePositionError):
            LDRKernel(G, np.zeros(4), np.zeros((2, 4)), (1, 1))

    def test_budget_below_order(self):
        G = make_cyclic(3)

        with pytest.raises(InvalidKernelError):
            LDRKernel(G, np.zeros(3), np.zeros((3, 3)), (0, 1, 2))

    def test_position_out_of_range(self):
        G = make_cyclic(3)

        with pytest.raises(ElementError):
            LDRKernel(G, np.zeros(3), np.zeros((1, 3)), (5,))

    def test_wrong_shapes(self):
        G = make_cyclic(3)

        with pytest.raises(ShapeError):
            LDRKernel(G, np.zeros(4), np.zeros((1, 3)), (1,))
        with pytest.raises(ShapeError):
            LDRKernel(G, np.zeros(3), np.zeros((2, 3)), (1,))
