from __future__ import annotations

import numpy as np
import pytest

from gomp_lab.errors import DimensionMismatch, RankDeficient
from gomp_lab.harness.generators import gen_gaussian
from gomp_lab.harness.rng import make_rng
from gomp_lab.linalg import (
    as_index_set,
    correlations,
    gram_extreme_eigs,
    least_squares,
    orthogonalize_against,
    project_residual,
)


def normal_equations(A, y):
    return np.linalg.solve(A.T @ A, A.T @ y)


class TestLeastSquares:
    def test_identity(self):
        np.testing.assert_allclose(least_squares(np.eye(2), [3.0, 4.0]), [3.0, 4.0])

    def test_single_unit_column(self):
        A = np.array([[1.0], [1.0]]) / np.sqrt(2.0)
        np.testing.assert_allclose(least_squares(A, [1.0, 1.0]), [np.sqrt(2.0)], rtol=1e-14)

    def test_matches_normal_equations(self):
        rng = make_rng(3, "ls")
        A = rng.standard_normal((4, 2))
        y = rng.standard_normal(4)
        np.testing.assert_allclose(least_squares(A, y), normal_equations(A, y), atol=1e-8)

    def test_residual_orthogonal(self):
        rng = make_rng(4, "ls")
        A = rng.standard_normal((10, 4))
        y = rng.standard_normal(10)
        r = y - A @ least_squares(A, y)
        assert np.max(np.abs(A.T @ r)) <= 1e-10 * np.linalg.norm(y)

    def test_rank_deficient(self):
        A = np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]])
        with pytest.raises(RankDeficient):
            least_squares(A, [1.0, 0.0, 0.0])

    def test_wide_rejected(self):
        with pytest.raises(DimensionMismatch):
            least_squares(np.ones((2, 3)), [1.0, 1.0])

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            least_squares(np.eye(3), [1.0, 2.0])

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            least_squares(np.array([[np.nan], [1.0]]), [1.0, 1.0])


class TestProjectResidual:
    def test_coordinate_projection(self):
        np.testing.assert_allclose(project_residual(np.eye(3), [0], [5.0, 1.0, 2.0]), [0, 1, 2])

    def test_in_span(self):
        Phi = gen_gaussian(8, 12, seed=1)
        y = Phi[:, [3, 5]] @ np.array([1.5, -2.0])
        r = project_residual(Phi, [3, 5], y)
        assert np.linalg.norm(r) <= 1e-10 * np.linalg.norm(y)

    def test_matches_normal_equations(self):
        Phi = gen_gaussian(8, 12, seed=2)
        y = make_rng(2, "y").standard_normal(8)
        S = [2, 7]
        A = Phi[:, S]
        expected = y - A @ normal_equations(A, y)
        np.testing.assert_allclose(project_residual(Phi, S, y), expected, atol=1e-8)

    def test_orthogonal_to_support(self):
        Phi = gen_gaussian(8, 12, seed=5)
        y = make_rng(5, "y").standard_normal(8)
        S = [0, 4, 9]
        r = project_residual(Phi, S, y)
        assert np.max(np.abs(Phi[:, S].T @ r)) <= 1e-9 * np.linalg.norm(y)

    def test_empty_support_returns_copy(self):
        y = np.array([1.0, 2.0])
        r = project_residual(np.eye(2), [], y)
        np.testing.assert_array_equal(r, y)
        assert r is not y


class TestCorrelations:
    def test_identity(self):
        np.testing.assert_array_equal(correlations(np.eye(3), [-2.0, 1.0, 0.0]), [2, 1, 0])

    def test_zero_residual(self):
        np.testing.assert_array_equal(correlations(gen_gaussian(4, 6, 0), np.zeros(4)), 0)

    def test_loop_oracle(self):
        Phi = gen_gaussian(8, 12, seed=6)
        r = make_rng(6, "r").standard_normal(8)
        loop = [abs(sum(Phi[i, j] * r[i] for i in range(8))) for j in range(12)]
        np.testing.assert_allclose(correlations(Phi, r), loop, rtol=0, atol=1e-12)


class TestGramExtremeEigs:
    def test_orthonormal(self):
        lo, hi = gram_extreme_eigs(np.eye(5), [0, 2, 4])
        assert lo == pytest.approx(1.0, abs=1e-14) and hi == pytest.approx(1.0, abs=1e-14)

    def test_duplicate_columns(self):
        Phi = np.array([[1.0, 1.0], [0.0, 0.0]])
        lo, hi = gram_extreme_eigs(Phi, [0, 1])
        assert lo == pytest.approx(0.0, abs=1e-14) and hi == pytest.approx(2.0, abs=1e-14)

    def test_characteristic_polynomial_oracle(self):
        A = make_rng(7, "eig").standard_normal((6, 3))
        G = A.T @ A
        # roots of det(G - t I) from the trace/minor coefficients
        c2 = -np.trace(G)
        c1 = 0.5 * (np.trace(G) ** 2 - np.trace(G @ G))
        c0 = -np.linalg.det(G)
        roots = np.sort(np.roots([1.0, c2, c1, c0]).real)
        lo, hi = gram_extreme_eigs(A, [0, 1, 2])
        assert lo == pytest.approx(roots[0], abs=1e-9)
        assert hi == pytest.approx(roots[-1], abs=1e-9)

    def test_too_many_columns(self):
        with pytest.raises(DimensionMismatch):
            gram_extreme_eigs(np.ones((2, 3)), [0, 1, 2])


class TestOrthogonalizeAgainst:
    def test_empty_set(self):
        Phi = gen_gaussian(5, 7, 0)
        np.testing.assert_array_equal(orthogonalize_against(Phi, []), Phi)

    def test_identity(self):
        A = orthogonalize_against(np.eye(3), [0])
        np.testing.assert_allclose(A, np.diag([0.0, 1.0, 1.0]), atol=1e-15)

    def test_per_column_oracle(self):
        Phi = gen_gaussian(8, 12, seed=8)
        A = orthogonalize_against(Phi, [1, 4])
        for j in range(12):
            np.testing.assert_allclose(A[:, j], project_residual(Phi, [1, 4], Phi[:, j]),
                                       atol=1e-10)
        assert np.max(np.abs(A[:, [1, 4]])) <= 1e-9

    def test_idempotent(self):
        Phi = gen_gaussian(8, 12, seed=9)
        once = orthogonalize_against(Phi, [0, 3, 5])
        twice = orthogonalize_against(np.column_stack([once, Phi[:, [0, 3, 5]]]), [12, 13, 14])
        np.testing.assert_allclose(twice[:, :12], once, atol=1e-9)

    def test_symmetric_and_pythagoras(self):
        Phi = gen_gaussian(8, 12, seed=10)
        rng = make_rng(10, "ab")
        I1 = [2, 6]
        a, b = rng.standard_normal(8), rng.standard_normal(8)
        M = np.column_stack([Phi, a, b])
        P = orthogonalize_against(M, I1)
        Pa, Pb = P[:, 12], P[:, 13]
        assert abs(Pa @ b - a @ Pb) <= 1e-9 * np.linalg.norm(a) * np.linalg.norm(b)
        u = np.zeros(12)
        u[[0, 9]] = rng.standard_normal(2)
        Phi_u = Phi @ u
        perp = P[:, :12] @ u
        par = Phi_u - perp
        assert Phi_u @ Phi_u == pytest.approx(par @ par + perp @ perp, rel=1e-9)

    def test_rank_deficient(self):
        Phi = np.column_stack([np.ones(3), np.ones(3), np.arange(3.0)])
        with pytest.raises(RankDeficient):
            orthogonalize_against(Phi, [0, 1])


def test_index_set_validation():
    np.testing.assert_array_equal(as_index_set([3, 1]), [1, 3])
    with pytest.raises(ValueError):
        as_index_set([1, 1])
    with pytest.raises(IndexError):
        as_index_set([4], n=4)
