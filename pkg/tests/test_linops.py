import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from canonfock import linops
from canonfock.errors import NotSymmetric, ShapeMismatch, Singular, ValidationError

from strategies import rng_of, seeds, symmetric_matrices


def _series_blocks(Xi, terms=60):
    # cosh and sinh(sqrt(X Xbar))/sqrt(X Xbar) as power series in X Xbar
    P = Xi @ Xi.conj()
    n = Xi.shape[0]
    U = np.zeros((n, n), dtype=complex)
    S = np.zeros((n, n), dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(terms):
        U += term / _fact(2 * k)
        S += term / _fact(2 * k + 1)
        term = term @ P
    return U, S @ Xi


def _fact(k):
    out = 1.0
    for i in range(2, k + 1):
        out *= i
    return out


class TestTakagi:
    def test_zero_matrix(self):
        fac = linops.takagi(np.zeros((2, 2)))
        np.testing.assert_array_equal(fac.d, [0, 0])
        np.testing.assert_allclose(fac.W, np.eye(2))

    def test_real_diagonal(self):
        fac = linops.takagi(np.diag([0.3, 0.1]))
        np.testing.assert_allclose(fac.d, [0.3, 0.1])
        np.testing.assert_allclose(fac.W, np.eye(2))

    def test_diagonal_sorted_with_permutation(self):
        fac = linops.takagi(np.diag([0.1, 0.3j]))
        np.testing.assert_allclose(fac.d, [0.3, 0.1])
        np.testing.assert_allclose(fac.reconstruct(), np.diag([0.1, 0.3j]), atol=1e-15)

    def test_random_3x3(self, rng):
        A = linops.random_symmetric(rng, 3)
        fac = linops.takagi(A)
        assert np.linalg.norm(A - fac.reconstruct()) <= 1e-10

    def test_not_symmetric(self):
        with pytest.raises(NotSymmetric):
            linops.takagi(np.array([[0, 1], [0, 0]]))

    def test_deterministic(self, rng):
        A = linops.random_symmetric(rng, 4)
        f1, f2 = linops.takagi(A), linops.takagi(A.copy())
        np.testing.assert_array_equal(f1.W, f2.W)
        np.testing.assert_array_equal(f1.d, f2.d)

    def test_degenerate_values(self, rng):
        # a unitary congruence of 0.4 * I has a two-fold degenerate Takagi value
        Q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        A = 0.4 * Q @ Q.T
        fac = linops.takagi(A)
        np.testing.assert_allclose(fac.d, [0.4, 0.4])
        assert np.linalg.norm(A - fac.reconstruct()) <= 1e-12

    def test_rank_deficient(self, rng):
        v = rng.normal(size=3) + 1j * rng.normal(size=3)
        A = np.outer(v, v)
        fac = linops.takagi(A)
        assert fac.d[1] < 1e-12 and fac.d[2] < 1e-12
        assert np.linalg.norm(A - fac.reconstruct()) <= 1e-10 * max(1, np.linalg.norm(A, 2))

    @given(symmetric_matrices(max_n=8, scale=2.0))
    def test_reconstruction_property(self, A):
        fac = linops.takagi(A)
        scale = max(1.0, np.linalg.norm(A, 2))
        assert np.linalg.norm(A - fac.reconstruct()) <= 1e-10 * scale
        np.testing.assert_allclose(fac.W @ fac.W.conj().T, np.eye(A.shape[0]), atol=1e-10)
        assert np.all(fac.d >= 0)
        assert np.all(np.diff(fac.d) <= 0)

    @given(symmetric_matrices(max_n=8))
    def test_values_are_singular_values(self, A):
        np.testing.assert_allclose(linops.takagi(A).d, np.linalg.svd(A, compute_uv=False), atol=1e-12)


class TestSqueezeBlocks:
    def test_zero(self):
        U, V = linops.squeeze_blocks(np.zeros((3, 3)))
        np.testing.assert_allclose(U, np.eye(3))
        np.testing.assert_allclose(V, 0)

    def test_scalar(self):
        U, V = linops.squeeze_blocks(np.array([[0.7]]))
        np.testing.assert_allclose(U, [[np.cosh(0.7)]], rtol=1e-14)
        np.testing.assert_allclose(V, [[np.sinh(0.7)]], rtol=1e-14)

    def test_against_power_series(self, rng):
        Xi = linops.random_symmetric(rng, 2)
        U, V = linops.squeeze_blocks(Xi)
        Us, Vs = _series_blocks(Xi)
        np.testing.assert_allclose(U, Us, atol=1e-10)
        np.testing.assert_allclose(V, Vs, atol=1e-10)

    @given(symmetric_matrices(max_n=6))
    def test_block_identities(self, Xi):
        U, V = linops.squeeze_blocks(Xi)
        n = Xi.shape[0]
        np.testing.assert_allclose(U @ U.conj().T - V @ V.conj().T, np.eye(n), atol=1e-10)
        np.testing.assert_allclose(U @ V.T, V @ U.T, atol=1e-10)
        np.testing.assert_allclose(V, V.T, atol=1e-12)
        assert np.linalg.eigvalsh(0.5 * (U + U.conj().T)).min() >= 1 - 1e-12


class TestDenseUtilities:
    def test_det_identity(self):
        assert linops.det(np.eye(3)) == pytest.approx(1.0)

    def test_hs_norm(self):
        assert linops.hs_norm(np.diag([3.0, 4.0])) == pytest.approx(5.0)

    def test_spectral_norm(self):
        assert linops.spectral_norm(np.diag([3.0, -4.0])) == pytest.approx(4.0)

    def test_inverse_residual(self, rng):
        A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) + 3 * np.eye(3)
        assert np.linalg.norm(A @ linops.inverse(A) - np.eye(3)) <= 1e-12

    def test_singular_inverse(self):
        with pytest.raises(Singular):
            linops.inverse(np.array([[1.0, 2.0], [2.0, 4.0]]))

    def test_singular_det(self):
        with pytest.raises(Singular):
            linops.det(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-16]]))

    def test_logdet_matches_det(self, rng):
        A = np.eye(3) + 0.3 * (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
        assert np.exp(linops.logdet(A)) == pytest.approx(np.linalg.det(A), rel=1e-12)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValidationError):
            linops.as_matrix(np.array([[np.nan]]))

    def test_non_square_rejected(self):
        with pytest.raises(ShapeMismatch):
            linops.as_square(np.zeros((2, 3)))

    @given(seeds, st.integers(1, 5))
    def test_random_symmetric_is_symmetric(self, seed, n):
        A = linops.random_symmetric(rng_of(seed), n)
        assert linops.is_symmetric(A)
        H = linops.random_hermitian(rng_of(seed), n)
        assert linops.is_hermitian(H)
