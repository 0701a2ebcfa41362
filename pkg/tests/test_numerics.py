"""Tests for the dense linear-algebra kernels."""

import numpy as np
import pytest

from beamtrack import numerics
from beamtrack.errors import (
    DimensionMismatch,
    IndefiniteMatrix,
    NotSymmetric,
    SingularB,
    ZeroMatrix,
)
from beamtrack.numerics import (
    KroneckerFactorDims,
    complex_to_real_stacked,
    generalized_eig_sym,
    kron_rearrange,
    matrix_sqrt_psd,
    rank_one_factor,
    vec,
)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestVec:
    def test_column_major(self):
        A = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(vec(A), [1.0, 3.0, 2.0, 4.0])

    def test_kron_identity(self):
        # vec(A X B) = (B^T kron A) vec(X), the convention everything relies on
        rng = np.random.default_rng(3)
        A = random_complex(rng, (3, 2))
        X = random_complex(rng, (2, 4))
        B = random_complex(rng, (4, 5))
        lhs = vec(A @ X @ B)
        rhs = np.kron(B.T, A) @ vec(X)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


class TestMatrixSqrtPsd:
    def test_identity(self):
        np.testing.assert_allclose(matrix_sqrt_psd(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        S = matrix_sqrt_psd(np.diag([4.0, 9.0]))
        np.testing.assert_allclose(S @ S.T, np.diag([4.0, 9.0]), atol=1e-14)
        np.testing.assert_allclose(np.abs(S), np.diag([2.0, 3.0]), atol=1e-14)

    def test_random_pd_reconstruction(self):
        rng = np.random.default_rng(42)
        M = rng.standard_normal((6, 6))
        R = M @ M.T
        S = matrix_sqrt_psd(R)
        assert np.linalg.norm(S @ S.T - R) / np.linalg.norm(R) < 1e-10

    def test_singular_psd_uses_eigh_fallback(self):
        # rank-deficient: Cholesky fails, eigendecomposition path must take over
        rng = np.random.default_rng(7)
        M = rng.standard_normal((6, 3))
        R = M @ M.T
        S = matrix_sqrt_psd(R)
        assert np.linalg.norm(S @ S.T - R) <= 1e-8 * max(1.0, np.linalg.norm(R))

    def test_reconstruction_tolerance_sweep(self):
        rng = np.random.default_rng(11)
        for k in range(20):
            n = rng.integers(2, 12)
            M = rng.standard_normal((n, n))
            R = M @ M.T
            S = matrix_sqrt_psd(R)
            assert np.linalg.norm(S @ S.T - R) <= 1e-8 * max(1.0, np.linalg.norm(R))

    def test_rejects_asymmetric(self):
        R = np.array([[1.0, 0.5], [0.0, 1.0]])
        with pytest.raises(NotSymmetric):
            matrix_sqrt_psd(R)

    def test_rejects_indefinite(self):
        with pytest.raises(IndefiniteMatrix):
            matrix_sqrt_psd(np.diag([1.0, -1e-6]))


class TestGeneralizedEigSym:
    @staticmethod
    def residual_ok(A, B, w, V):
        for lam, v in zip(w, V.T):
            res = np.linalg.norm(A @ v - lam * B @ v)
            bound = 1e-8 * (np.linalg.norm(A) + abs(lam) * np.linalg.norm(B))
            assert res <= bound, (lam, res, bound)

    def test_identity_b_reduces_to_standard(self):
        w, V = generalized_eig_sym(np.diag([3.0, 1.0]), np.eye(2), 1)
        np.testing.assert_allclose(w, [3.0], atol=1e-12)
        np.testing.assert_allclose(np.abs(V[:, 0]), [1.0, 0.0], atol=1e-12)

    def test_degenerate_pair(self):
        # diag pencil: eigenvalues a_ii / b_ii = (2, 2); only residuals checked
        A = np.diag([2.0, 8.0])
        B = np.diag([1.0, 4.0])
        w, V = generalized_eig_sym(A, B, 2)
        np.testing.assert_allclose(w, [2.0, 2.0], atol=1e-12)
        self.residual_ok(A, B, w, V)

    def test_seeded_random_residuals(self):
        rng = np.random.default_rng(12)
        M = rng.standard_normal((12, 12))
        A = M @ M.T
        N = rng.standard_normal((12, 12))
        B = N @ N.T + 12 * np.eye(12)
        w, V = generalized_eig_sym(A, B, 12)
        assert np.all(np.diff(w) <= 1e-12)  # non-increasing
        self.residual_ok(A, B, w, V)
        np.testing.assert_allclose(np.linalg.norm(V, axis=0), 1.0, atol=1e-12)

    def test_rejects_singular_b(self):
        with pytest.raises(SingularB):
            generalized_eig_sym(np.eye(3), np.diag([1.0, 1.0, 0.0]), 1)

    def test_rejects_mismatched_shapes(self):
        with pytest.raises(DimensionMismatch):
            generalized_eig_sym(np.eye(3), np.eye(4), 1)


class TestKronRearrange:
    def test_exact_kronecker_becomes_outer_product(self):
        B = np.array([[1.0, 2.0], [3.0, 4.0]])
        C = np.array([[0.0, 1.0], [1.0, 0.0]])
        R = kron_rearrange(np.kron(B, C), KroneckerFactorDims(2, 2, 2, 2))
        np.testing.assert_array_equal(R, np.outer(vec(B), vec(C)))

    def test_scalar_left_factor_passthrough(self):
        rng = np.random.default_rng(5)
        V = random_complex(rng, (3, 4))
        R = kron_rearrange(V, (1, 1, 3, 4))
        np.testing.assert_array_equal(R, vec(V)[None, :])

    def test_frobenius_identity_random_pairs(self):
        rng = np.random.default_rng(77)
        V = random_complex(rng, (4, 4))
        dims = KroneckerFactorDims(2, 2, 2, 2)
        R = kron_rearrange(V, dims)
        for _ in range(10):
            B = random_complex(rng, (2, 2))
            C = random_complex(rng, (2, 2))
            lhs = np.linalg.norm(V - np.kron(B, C))
            rhs = np.linalg.norm(R - np.outer(vec(B), vec(C)))
            assert abs(lhs - rhs) < 1e-12

    def test_bijection_roundtrip(self):
        # un-rearranging = rearranging the transpose with swapped factor roles
        rng = np.random.default_rng(9)
        m1, n1, m2, n2 = 2, 3, 4, 5
        V = random_complex(rng, (m1 * m2, n1 * n2))
        R = kron_rearrange(V, (m1, n1, m2, n2))
        V_back = kron_rearrange(R.T, (n2, n1, m2, m1)).T
        np.testing.assert_array_equal(V_back, V)

    def test_rejects_bad_dims(self):
        with pytest.raises(DimensionMismatch):
            kron_rearrange(np.zeros((4, 4)), (2, 2, 2, 3))


class TestRankOneFactor:
    def test_exact_rank_one_input(self):
        rng = np.random.default_rng(21)
        x = random_complex(rng, 4)
        x /= np.linalg.norm(x)
        y = random_complex(rng, 3)
        y /= np.linalg.norm(y)
        R = np.outer(x, y.conj())
        u, s, v = rank_one_factor(R)
        assert np.linalg.norm(R - s * np.outer(u, v.conj())) < 1e-12
        # equal to the inputs up to a common phase
        assert abs(abs(np.vdot(u, x)) - 1.0) < 1e-12
        assert abs(abs(np.vdot(v, y)) - 1.0) < 1e-12
        assert abs(s - 1.0) < 1e-12

    def test_diagonal(self):
        u, s, v = rank_one_factor(np.diag([5.0, 1.0]))
        assert abs(s - 5.0) < 1e-14
        np.testing.assert_allclose(np.abs(u), [1.0, 0.0], atol=1e-14)
        np.testing.assert_allclose(np.abs(v), [1.0, 0.0], atol=1e-14)

    def test_energy_identity_vs_full_svd(self):
        rng = np.random.default_rng(33)
        R = random_complex(rng, (6, 6))
        u, s, v = rank_one_factor(R)
        resid_sq = np.linalg.norm(R - s * np.outer(u, v.conj())) ** 2
        sigmas = np.linalg.svd(R, compute_uv=False)
        assert abs(resid_sq - np.sum(sigmas[1:] ** 2)) < 1e-10

    def test_optimality_vs_random_pairs(self):
        rng = np.random.default_rng(55)
        for _ in range(50):
            R = random_complex(rng, (5, 4))
            u, s, v = rank_one_factor(R)
            best = np.linalg.norm(R - s * np.outer(u, v.conj()))
            up = random_complex(rng, 5)
            up /= np.linalg.norm(up)
            vp = random_complex(rng, 4)
            vp /= np.linalg.norm(vp)
            c = np.vdot(up, R @ vp)  # optimal complex scale for this pair
            assert np.linalg.norm(R - c * np.outer(up, vp.conj())) >= best - 1e-12

    def test_rejects_zero(self):
        with pytest.raises(ZeroMatrix):
            rank_one_factor(np.zeros((3, 3)))


class TestComplexToRealStacked:
    def test_imaginary_unit(self):
        np.testing.assert_array_equal(
            complex_to_real_stacked(np.array([[1j]])), [[0.0, -1.0], [1.0, 0.0]]
        )

    def test_complex_identity(self):
        np.testing.assert_array_equal(
            complex_to_real_stacked(np.eye(2, dtype=complex)), np.eye(4)
        )

    def test_action_matches_complex_product(self):
        rng = np.random.default_rng(8)
        G = random_complex(rng, (2, 3))
        h = random_complex(rng, 3)
        stacked_h = np.concatenate([h.real, h.imag])
        out = complex_to_real_stacked(G) @ stacked_h
        ref = G @ h
        np.testing.assert_allclose(out, np.concatenate([ref.real, ref.imag]), atol=1e-14)

    def test_ring_homomorphism_on_square(self):
        rng = np.random.default_rng(13)
        G1 = random_complex(rng, (4, 4))
        G2 = random_complex(rng, (4, 4))
        lhs = complex_to_real_stacked(G1 @ G2)
        rhs = complex_to_real_stacked(G1) @ complex_to_real_stacked(G2)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)
