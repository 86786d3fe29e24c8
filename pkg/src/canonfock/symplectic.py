r"""Linear canonical (Bogoliubov) transformations at the one-particle level.

A transformation is stored as the pair :math:`(U, V)` acting on
:math:`\mathbb{C}^n` as the real-linear map :math:`f \mapsto Uf + V\bar f`.
Canonicity is the pair of conditions

.. math::
    UU^\dagger - VV^\dagger = I, \quad UV^T = VU^T, \qquad
    U^\dagger U - V^T\bar V = I, \quad U^T\bar V = V^\dagger U.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from canonfock import linops
from canonfock.errors import ShapeMismatch, Singular, ValidationError

CANONICAL_TOL = 1e-10
SIEGEL_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class SymplecticPair:
    """The pair ``(U, V)`` of complex ``n x n`` blocks."""

    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        U = linops.as_square(self.U, "U")
        V = linops.as_square(self.V, "V")
        if U.shape != V.shape:
            raise ShapeMismatch(f"U {U.shape} and V {V.shape} differ in shape")
        U.setflags(write=False)
        V.setflags(write=False)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)

    @property
    def n(self):
        return self.U.shape[0]

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n, dtype=complex), np.zeros((n, n), dtype=complex))

    def block_matrix(self):
        r""":math:`\hat G = \begin{pmatrix} U & V \\ \bar V & \bar U\end{pmatrix}`."""
        return np.block([[self.U, self.V], [self.V.conj(), self.U.conj()]])

    def allclose(self, other, atol=CANONICAL_TOL):
        return bool(
            np.allclose(self.U, other.U, rtol=0, atol=atol)
            and np.allclose(self.V, other.V, rtol=0, atol=atol)
        )


@dataclass(frozen=True, eq=False)
class RotationGenerator:
    """Hermitian generator ``Psi`` of the rotation ``U = exp(i Psi)``."""

    Psi: np.ndarray

    def __post_init__(self):
        P = linops.as_square(self.Psi, "Psi")
        if not linops.is_hermitian(P, rtol=1e-10):
            raise ValidationError("Psi must be Hermitian")
        object.__setattr__(self, "Psi", P)

    @property
    def n(self):
        return self.Psi.shape[0]


@dataclass(frozen=True, eq=False)
class SqueezeGenerator:
    """Complex symmetric squeeze generator ``Xi``."""

    Xi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Xi", linops.check_symmetric(self.Xi, "Xi", rtol=1e-10))

    @property
    def n(self):
        return self.Xi.shape[0]

    @classmethod
    def single_mode(cls, r, theta=0.0):
        """``xi = r exp(i theta)`` on one mode."""
        return cls(np.array([[r * np.exp(1j * theta)]]))

    @classmethod
    def diagonal(cls, r):
        return cls(np.diag(np.asarray(r, dtype=complex)))


def _as_pair(g):
    if not isinstance(g, SymplecticPair):
        raise TypeError(f"expected SymplecticPair, got {type(g).__name__}")
    return g


def _same_n(*pairs):
    ns = {g.n for g in pairs}
    if len(ns) != 1:
        raise ShapeMismatch(f"mode counts differ: {sorted(ns)}")


def canonical_residuals(pair):
    """Max-abs residuals of the four canonicity conditions, keyed by name."""
    U, V = pair.U, pair.V
    eye = np.eye(pair.n)
    res = {
        "UUh-VVh-I": U @ U.conj().T - V @ V.conj().T - eye,
        "UVt-VUt": U @ V.T - V @ U.T,
        "UhU-VtVbar-I": U.conj().T @ U - V.T @ V.conj() - eye,
        "UtVbar-VhU": U.T @ V.conj() - V.conj().T @ U,
    }
    return {k: float(np.max(np.abs(v))) for k, v in res.items()}


def is_canonical(pair, tol=None):
    """True iff both condition sets hold entrywise within ``tol``.

    The default tolerance is ``1e-10 * n``.
    """
    pair = _as_pair(pair)
    if tol is None:
        tol = CANONICAL_TOL * pair.n
    return all(v <= tol for v in canonical_residuals(pair).values())


def compose(g2, g1):
    r"""The product :math:`G_2 G_1` (apply ``g1`` first)."""
    _same_n(_as_pair(g2), _as_pair(g1))
    U = g2.U @ g1.U + g2.V @ g1.V.conj()
    V = g2.U @ g1.V + g2.V @ g1.U.conj()
    return SymplecticPair(U, V)


def compose_all(*pairs):
    """``compose_all(g3, g2, g1) == compose(g3, compose(g2, g1))``."""
    out = pairs[-1]
    for g in reversed(pairs[:-1]):
        out = compose(g, out)
    return out


def inverse(g):
    g = _as_pair(g)
    return SymplecticPair(g.U.conj().T, -g.V.T)


def from_rotation(gen):
    if not isinstance(gen, RotationGenerator):
        gen = RotationGenerator(gen)
    U = linops.expm(1j * gen.Psi)
    return SymplecticPair(U, np.zeros_like(U))


def from_squeeze(gen):
    if not isinstance(gen, SqueezeGenerator):
        gen = SqueezeGenerator(gen)
    U, V = linops.squeeze_blocks(gen.Xi)
    return SymplecticPair(U, V)


def apply(g, f):
    r"""The real-linear action :math:`f \mapsto Uf + V\bar f`."""
    g = _as_pair(g)
    f = np.asarray(f, dtype=complex)
    if f.shape[0] != g.n:
        raise ShapeMismatch(f"vector of length {f.shape[0]} for {g.n} modes")
    return g.U @ f + g.V @ f.conj()


def in_siegel_disc(A, eps=SIEGEL_EPS):
    A = np.asarray(A)
    return linops.is_symmetric(A, rtol=1e-10) and linops.spectral_norm(A) < 1 - eps


def siegel_action(g, A):
    r"""Group action on the Siegel disc, :math:`\zeta(G;A) = (U^\dagger + AV^\dagger)^{-1}(V^T + AU^T)`."""
    g = _as_pair(g)
    A = linops.as_square(A, "A")
    if A.shape[0] != g.n:
        raise ShapeMismatch(f"A has shape {A.shape} for {g.n} modes")
    if not in_siegel_disc(A):
        raise ValidationError("A is not in the open Siegel disc")
    M = g.U.conj().T + A @ g.V.conj().T
    Z = linops.solve(M, g.V.T + A @ g.U.T)
    Z = 0.5 * (Z + Z.T)
    if linops.spectral_norm(Z) >= 1 - SIEGEL_EPS:
        raise Singular("image lies on the Siegel-disc boundary")
    return Z


def conjugate_squeeze(Phi, Xi):
    r"""Squeeze generator of :math:`T^\dagger(\Phi) S(\Xi) T(\Phi)`, i.e. :math:`e^{-i\Phi}\Xi e^{-i\Phi^T}`."""
    if not isinstance(Phi, RotationGenerator):
        Phi = RotationGenerator(Phi)
    if not isinstance(Xi, SqueezeGenerator):
        Xi = SqueezeGenerator(Xi)
    if Phi.n != Xi.n:
        raise ShapeMismatch("Phi and Xi differ in size")
    E = linops.expm(-1j * Phi.Psi)
    out = E @ Xi.Xi @ E.T
    return SqueezeGenerator(0.5 * (out + out.T))


def reduce_to_single_modes(Xi):
    """Rotation ``Phi`` and Takagi values ``d`` with ``conjugate_squeeze(Phi, Xi) == diag(d)``.

    ``exp(-i Phi)`` is the adjoint of the Takagi unitary of ``Xi``; ``Phi``
    is taken from the principal logarithm, eigenphases in ``(-pi, pi]``.
    """
    if not isinstance(Xi, SqueezeGenerator):
        Xi = SqueezeGenerator(Xi)
    fac = linops.takagi(Xi.Xi)
    Wh = fac.W.conj().T
    T, Z = scipy.linalg.schur(Wh, output="complex")
    theta = np.angle(np.diag(T))
    Phi = -(Z * theta) @ Z.conj().T
    return RotationGenerator(0.5 * (Phi + Phi.conj().T)), fac.d


def random_canonical(rng, n, squeeze_scale=0.5, rotation_scale=1.0):
    """Random canonical pair ``R(Psi1) S(Xi) R(Psi2)``; exact group member by construction."""
    R1 = from_rotation(linops.random_hermitian(rng, n, rotation_scale))
    S = from_squeeze(linops.random_symmetric(rng, n, squeeze_scale))
    R2 = from_rotation(linops.random_hermitian(rng, n, rotation_scale))
    return compose_all(R1, S, R2)
