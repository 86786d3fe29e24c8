import numpy as np
import pytest
from hypothesis import given

from canonfock import linops, symplectic
from canonfock.errors import ShapeMismatch, Singular, ValidationError
from canonfock.symplectic import RotationGenerator, SqueezeGenerator, SymplecticPair

from strategies import canonical_pairs, complex_vectors, rng_of, seeds, symmetric_matrices

TOL = 1e-10


def _pair(u, v):
    return SymplecticPair(np.atleast_2d(u), np.atleast_2d(v))


class TestIsCanonical:
    def test_identity(self):
        assert symplectic.is_canonical(SymplecticPair.identity(3))

    def test_hyperbolic(self):
        assert symplectic.is_canonical(_pair(np.cosh(1.0), np.sinh(1.0)))

    def test_violation(self):
        assert not symplectic.is_canonical(_pair(1.0, 1.0))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            SymplecticPair(np.eye(2), np.zeros((3, 3)))

    def test_default_tolerance_scales_with_n(self):
        g = SymplecticPair(np.eye(4) * (1 + 1.5e-10), np.zeros((4, 4)))
        assert symplectic.is_canonical(g)
        assert not symplectic.is_canonical(g, tol=1e-10)

    def test_blocks_read_only(self):
        g = SymplecticPair.identity(2)
        with pytest.raises(ValueError):
            g.U[0, 0] = 2


class TestCompose:
    def test_identity_left(self, rng):
        g = symplectic.random_canonical(rng, 2)
        assert symplectic.compose(SymplecticPair.identity(2), g).allclose(g, 1e-14)

    def test_one_parameter_subgroup(self):
        g = symplectic.compose(symplectic.from_squeeze([[0.3]]), symplectic.from_squeeze([[0.5]]))
        assert g.allclose(symplectic.from_squeeze([[0.8]]), 1e-14)

    def test_action_homomorphism_two_modes(self, rng):
        g2, g1 = symplectic.random_canonical(rng, 2), symplectic.random_canonical(rng, 2)
        f = rng.normal(size=2) + 1j * rng.normal(size=2)
        g = symplectic.compose(g2, g1)
        assert symplectic.is_canonical(g)
        np.testing.assert_allclose(symplectic.apply(g, f), symplectic.apply(g2, symplectic.apply(g1, f)), atol=TOL)

    def test_mode_mismatch(self):
        with pytest.raises(ShapeMismatch):
            symplectic.compose(SymplecticPair.identity(2), SymplecticPair.identity(3))

    @given(canonical_pairs(), seeds, seeds)
    def test_closure_and_associativity(self, g1, s2, s3):
        n = g1.n
        g2 = symplectic.random_canonical(rng_of(s2), n)
        g3 = symplectic.random_canonical(rng_of(s3), n)
        g21 = symplectic.compose(g2, g1)
        assert symplectic.is_canonical(g21)
        left = symplectic.compose(g3, g21)
        right = symplectic.compose(symplectic.compose(g3, g2), g1)
        assert left.allclose(right, TOL)

    @given(canonical_pairs(n=3), seeds)
    def test_homomorphism_property(self, g1, seed):
        r = rng_of(seed)
        g2 = symplectic.random_canonical(r, 3)
        f = r.normal(size=3) + 1j * r.normal(size=3)
        np.testing.assert_allclose(
            symplectic.apply(symplectic.compose(g2, g1), f),
            symplectic.apply(g2, symplectic.apply(g1, f)),
            atol=TOL,
        )


class TestInverse:
    def test_identity(self):
        assert symplectic.inverse(SymplecticPair.identity(2)).allclose(SymplecticPair.identity(2), 0)

    def test_squeeze_subgroup(self, rng):
        Xi = linops.random_symmetric(rng, 2, 0.5)
        inv = symplectic.inverse(symplectic.from_squeeze(Xi))
        assert inv.allclose(symplectic.from_squeeze(-Xi), 1e-12)

    @given(canonical_pairs())
    def test_round_trip(self, g):
        eye = SymplecticPair.identity(g.n)
        assert symplectic.compose(symplectic.inverse(g), g).allclose(eye, TOL)
        assert symplectic.compose(g, symplectic.inverse(g)).allclose(eye, TOL)


class TestGenerators:
    def test_rotation_zero(self):
        assert symplectic.from_rotation(np.zeros((2, 2))).allclose(SymplecticPair.identity(2), 0)

    def test_rotation_pi(self):
        g = symplectic.from_rotation([[np.pi]])
        np.testing.assert_allclose(g.U, [[-1]], atol=1e-15)
        np.testing.assert_array_equal(g.V, [[0]])

    def test_rotation_unitary(self, rng):
        U = symplectic.from_rotation(linops.random_hermitian(rng, 3)).U
        np.testing.assert_allclose(U @ U.conj().T, np.eye(3), atol=1e-12)

    def test_rotation_rejects_non_hermitian(self):
        with pytest.raises(ValidationError):
            RotationGenerator(np.array([[0, 1], [0, 0]]))

    def test_squeeze_zero(self):
        assert symplectic.from_squeeze(np.zeros((2, 2))).allclose(SymplecticPair.identity(2), 0)

    def test_squeeze_real_scalar(self):
        g = symplectic.from_squeeze(SqueezeGenerator.single_mode(0.4))
        np.testing.assert_allclose(g.U, [[np.cosh(0.4)]], rtol=1e-14)
        np.testing.assert_allclose(g.V, [[np.sinh(0.4)]], rtol=1e-14)

    def test_squeeze_rejects_non_symmetric(self):
        with pytest.raises(ValidationError):
            SqueezeGenerator(np.array([[0, 1], [0, 0]]))

    @given(symmetric_matrices(max_n=4))
    def test_squeeze_canonical(self, Xi):
        g = symplectic.from_squeeze(Xi)
        assert symplectic.is_canonical(g)
        np.testing.assert_allclose(g.V, g.V.T, atol=1e-12)
        H = g.U - np.eye(g.n)
        assert np.linalg.eigvalsh(0.5 * (H + H.conj().T)).min() >= -1e-12


class TestApply:
    def test_identity(self, rng):
        f = rng.normal(size=3) + 1j * rng.normal(size=3)
        np.testing.assert_array_equal(symplectic.apply(SymplecticPair.identity(3), f), f)

    def test_real_contraction(self):
        r = 0.6
        g = _pair(np.cosh(r), -np.sinh(r))
        np.testing.assert_allclose(symplectic.apply(g, [1.5]), [np.exp(-r) * 1.5], rtol=1e-14)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            symplectic.apply(SymplecticPair.identity(2), np.ones(3))

    @given(canonical_pairs(), seeds)
    def test_round_trip(self, g, seed):
        r = rng_of(seed)
        f = r.normal(size=g.n) + 1j * r.normal(size=g.n)
        np.testing.assert_allclose(symplectic.apply(symplectic.inverse(g), symplectic.apply(g, f)), f, atol=1e-12)


class TestSiegel:
    def test_identity(self, rng):
        A = linops.random_symmetric(rng, 2)
        A = 0.5 * A / linops.spectral_norm(A)
        np.testing.assert_allclose(symplectic.siegel_action(SymplecticPair.identity(2), A), A, atol=1e-15)

    def test_squeeze_vacuum_tanh(self):
        Z = symplectic.siegel_action(symplectic.from_squeeze([[0.7]]), np.zeros((1, 1)))
        np.testing.assert_allclose(Z, [[np.tanh(0.7)]], rtol=1e-14)

    def test_outside_disc_rejected(self):
        with pytest.raises(ValidationError):
            symplectic.siegel_action(SymplecticPair.identity(1), np.array([[1.0]]))

    def test_near_boundary_image_singular(self):
        with pytest.raises(Singular):
            symplectic.siegel_action(symplectic.from_squeeze([[12.0]]), np.zeros((1, 1)))

    @given(canonical_pairs(), seeds, seeds)
    def test_composition_law_and_stability(self, g1, s2, sa):
        n = g1.n
        g2 = symplectic.random_canonical(rng_of(s2), n)
        A = linops.random_symmetric(rng_of(sa), n)
        A = 0.9 * A / linops.spectral_norm(A)
        Z1 = symplectic.siegel_action(g1, A)
        assert linops.spectral_norm(Z1) < 1
        lhs = symplectic.siegel_action(symplectic.compose(g2, g1), A)
        rhs = symplectic.siegel_action(g2, Z1)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)
        np.testing.assert_allclose(lhs, lhs.T, atol=0)


class TestConjugateAndReduce:
    def test_phi_zero(self, rng):
        Xi = linops.random_symmetric(rng, 2)
        out = symplectic.conjugate_squeeze(np.zeros((2, 2)), Xi)
        np.testing.assert_allclose(out.Xi, Xi, atol=1e-15)

    def test_single_mode_half_angle(self):
        r, theta = 0.4, 1.2
        out = symplectic.conjugate_squeeze([[theta / 2]], SqueezeGenerator.single_mode(r, theta))
        np.testing.assert_allclose(out.Xi, [[r]], atol=1e-15)

    def test_symplectic_level_identity(self, rng):
        Phi = linops.random_hermitian(rng, 2)
        Xi = linops.random_symmetric(rng, 2, 0.5)
        R = symplectic.from_rotation(Phi)
        lhs = symplectic.compose(symplectic.inverse(R), symplectic.compose(symplectic.from_squeeze(Xi), R))
        rhs = symplectic.from_squeeze(symplectic.conjugate_squeeze(Phi, Xi))
        assert lhs.allclose(rhs, 1e-10)

    def test_reduce_real_diagonal(self):
        Phi, d = symplectic.reduce_to_single_modes(np.diag([0.5, 0.2]))
        np.testing.assert_allclose(d, [0.5, 0.2])
        np.testing.assert_allclose(linops.expm(-1j * Phi.Psi), np.eye(2), atol=1e-14)

    def test_reduce_single_mode(self):
        Phi, d = symplectic.reduce_to_single_modes(SqueezeGenerator.single_mode(0.4, 1.2))
        np.testing.assert_allclose(d, [0.4])
        np.testing.assert_allclose(Phi.Psi, [[0.6]], atol=1e-14)

    @given(symmetric_matrices(max_n=4))
    def test_reduce_reconstruction(self, Xi):
        Phi, d = symplectic.reduce_to_single_modes(Xi)
        reduced = symplectic.conjugate_squeeze(Phi, Xi).Xi
        assert np.max(np.abs(reduced - np.diag(d))) <= 1e-10
