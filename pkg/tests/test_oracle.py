import numpy as np
import pytest

from ekcg import (
    contiguous_partition,
    dense_enlarged_basis,
    gen_poisson2d,
    krylov_basis,
    projection_solution,
    span_equal,
)
from ekcg.oracle import span_contains
from conftest import random_spd, sparse_from_dense


class TestDenseEnlargedBasis:
    def test_k_one_is_the_split(self, rng):
        A = gen_poisson2d(4, 4)
        r0 = rng.standard_normal(16)
        p = contiguous_partition(16, 4)
        assert np.array_equal(dense_enlarged_basis(A, r0, p, 1), p.split(r0))

    def test_t_one_is_classical_krylov(self, rng):
        A = gen_poisson2d(4, 4)
        r0 = rng.standard_normal(16)
        p = contiguous_partition(16, 1)
        B = dense_enlarged_basis(A, r0, p, 5)
        assert B == pytest.approx(krylov_basis(A.to_dense(), r0, 5), rel=1e-13)

    def test_row_sums_recover_powers(self, rng):
        A = gen_poisson2d(4, 4)
        r0 = rng.standard_normal(16)
        p = contiguous_partition(16, 4)
        B = dense_enlarged_basis(A, r0, p, 3)
        Ad = A.to_dense()
        v = r0.copy()
        for i in range(3):
            group = B[:, 4 * i:4 * (i + 1)].sum(axis=1)
            assert group == pytest.approx(v, rel=1e-12, abs=1e-12)
            v = Ad @ v

    def test_size_guards(self, rng):
        A = gen_poisson2d(4, 4)
        p = contiguous_partition(16, 4)
        with pytest.raises(ValueError, match="exceeds"):
            dense_enlarged_basis(A, np.ones(16), p, 5)  # k*t = 20 > 16


class TestProjectionSolution:
    def test_full_basis_gives_exact_solution(self, rng):
        D = random_spd(12, rng)
        A = sparse_from_dense(D)
        b = rng.standard_normal(12)
        x = projection_solution(A, b, None, np.eye(12))
        assert x == pytest.approx(np.linalg.solve(D, b), rel=1e-10)

    def test_single_column_steepest_descent(self, rng):
        D = random_spd(10, rng)
        A = sparse_from_dense(D)
        b = rng.standard_normal(10)
        x0 = rng.standard_normal(10)
        r0 = b - D @ x0
        x = projection_solution(A, b, x0, r0[:, None])
        alpha = (r0 @ r0) / (r0 @ D @ r0)
        assert x == pytest.approx(x0 + alpha * r0, rel=1e-12)

    def test_invariant_under_right_multiplication(self, rng):
        D = random_spd(14, rng)
        A = sparse_from_dense(D)
        b = rng.standard_normal(14)
        B = rng.standard_normal((14, 4))
        M = rng.standard_normal((4, 4)) + 4.0 * np.eye(4)
        x1 = projection_solution(A, b, None, B)
        x2 = projection_solution(A, b, None, B @ M)
        assert np.linalg.norm(x1 - x2) <= 1e-10 * np.linalg.norm(x1)

    def test_dependent_columns_dropped(self, rng):
        D = random_spd(10, rng)
        A = sparse_from_dense(D)
        b = rng.standard_normal(10)
        B = rng.standard_normal((10, 3))
        Bdup = np.hstack([B, B[:, :1]])
        x1 = projection_solution(A, b, None, B)
        x2 = projection_solution(A, b, None, Bdup)
        assert x2 == pytest.approx(x1, rel=1e-10)

    def test_empty_after_dropping(self, rng):
        A = sparse_from_dense(random_spd(6, rng))
        with pytest.raises(ValueError, match="empty"):
            projection_solution(A, np.ones(6), None, np.zeros((6, 2)))


class TestSpanEqual:
    def test_same_block(self, rng):
        B = rng.standard_normal((8, 3))
        assert span_equal(B, B, 1e-12)

    def test_different_axes(self):
        e1 = np.eye(4)[:, :1]
        e2 = np.eye(4)[:, 1:2]
        assert not span_equal(e1, e2, 1e-10)

    def test_scaled_and_mixed(self, rng):
        B = rng.standard_normal((9, 3))
        M = rng.standard_normal((3, 3)) + 3.0 * np.eye(3)
        assert span_equal(B, B @ M, 1e-10)

    def test_containment_one_way(self, rng):
        B = rng.standard_normal((9, 3))
        assert span_contains(B, B[:, :2], 1e-10)
        assert not span_equal(B, B[:, :2], 1e-10)
