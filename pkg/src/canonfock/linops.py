r"""Dense complex linear algebra shared by the rest of the package.

The centrepiece is the Takagi (Autonne) factorization of a complex symmetric
matrix, :math:`A = W\,\mathrm{diag}(d)\,W^T` with unitary :math:`W` and
:math:`d \ge 0`, and the squeeze blocks built from it.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from canonfock.errors import ConvergenceFailure, NotSymmetric, ShapeMismatch, Singular, ValidationError

ATOL = 1e-10
SYMMETRY_RTOL = 1e-12
MAX_CONDITION = 1e14


def as_matrix(a, name="matrix"):
    """Coerce ``a`` to a finite 2-D complex array."""
    m = np.atleast_2d(np.asarray(a, dtype=complex))
    if m.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} has non-finite entries")
    return m


def as_square(a, name="matrix"):
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {m.shape}")
    return m


def is_symmetric(a, rtol=SYMMETRY_RTOL):
    a = np.asarray(a)
    scale = max(1.0, np.linalg.norm(a))
    return bool(np.linalg.norm(a - a.T) <= rtol * scale)


def is_hermitian(a, rtol=SYMMETRY_RTOL):
    a = np.asarray(a)
    scale = max(1.0, np.linalg.norm(a))
    return bool(np.linalg.norm(a - a.conj().T) <= rtol * scale)


def check_symmetric(a, name="matrix", rtol=SYMMETRY_RTOL):
    m = as_square(a, name)
    if not is_symmetric(m, rtol):
        raise NotSymmetric(f"{name} is not symmetric (A != A^T)")
    return m


@dataclass(frozen=True)
class TakagiFactorization:
    """Result of :func:`takagi`: ``A == W @ diag(d) @ W.T``."""

    W: np.ndarray
    d: np.ndarray

    def reconstruct(self):
        return (self.W * self.d) @ self.W.T


def _fix_column_phases(W, d, zero_tol):
    # d_k > 0 leaves only a sign free per column; d_k == 0 leaves a full phase.
    W = W.copy()
    for k in range(W.shape[1]):
        col = W[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-8)
        if idx.size == 0:
            continue
        lead = col[idx[0]]
        if d[k] <= zero_tol:
            W[:, k] = col * (abs(lead) / lead)
        elif lead.real < 0 or (lead.real == 0 and lead.imag < 0):
            W[:, k] = -col
    return W


def takagi(a, rtol=SYMMETRY_RTOL, atol=ATOL):
    r"""Takagi factorization of a complex symmetric matrix.

    Uses the SVD :math:`A = X \Sigma Y^\dagger`. For symmetric :math:`A` the
    matrix :math:`Q = X^\dagger \bar Y` is unitary and block diagonal over
    the singular-value multiplets, so :math:`W = X Q^{1/2}` satisfies
    :math:`A = W \Sigma W^T`.

    Args:
        a: Square complex symmetric matrix.
        rtol: Relative tolerance of the symmetry check.
        atol: Reconstruction tolerance, scaled by ``max(1, ||A||)``.

    Returns:
        TakagiFactorization with ``d`` sorted in descending order.

    Raises:
        NotSymmetric: ``A`` differs from ``A.T`` beyond ``rtol``.
        ConvergenceFailure: the SVD failed or the reconstruction residual is
            above tolerance.
    """
    A = check_symmetric(a, "A", rtol)
    n = A.shape[0]
    scale = max(1.0, np.linalg.norm(A, 2))

    if np.count_nonzero(A - np.diag(np.diag(A))) == 0:
        diag = np.diag(A)
        order = np.argsort(-np.abs(diag), kind="stable")
        d = np.abs(diag)[order]
        phases = np.where(d > 0, np.exp(0.5j * np.angle(diag[order])), 1.0)
        W = np.zeros((n, n), dtype=complex)
        W[order, np.arange(n)] = phases
        return TakagiFactorization(W, d)

    try:
        X, s, Yh = np.linalg.svd(A)
        Q = X.conj().T @ Yh.T
        sqrtQ = _unitary_sqrt(Q)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"SVD did not converge: {exc}") from exc

    W = _fix_column_phases(X @ sqrtQ, s, zero_tol=atol * scale)
    residual = np.linalg.norm(A - (W * s) @ W.T)
    if residual > atol * scale or not np.allclose(W @ W.conj().T, np.eye(n), atol=1e-10):
        raise ConvergenceFailure(f"Takagi reconstruction residual {residual:.3e} above tolerance")
    return TakagiFactorization(W, s)


def _unitary_sqrt(Q):
    """Principal square root of a unitary matrix, via its Schur form."""
    T, Z = scipy.linalg.schur(Q, output="complex")
    lam = np.diag(T)
    lam = lam / np.abs(lam)
    return (Z * np.sqrt(lam)) @ Z.conj().T


def squeeze_blocks(xi):
    r"""Blocks :math:`(U, V)` of the squeeze transformation generated by ``xi``.

    With :math:`\Xi = W\,\mathrm{diag}(d)\,W^T`,

    .. math::
        U = \cosh\sqrt{\Xi\bar\Xi} = W \cosh(d) W^\dagger, \qquad
        V = \frac{\sinh\sqrt{\Xi\bar\Xi}}{\sqrt{\Xi\bar\Xi}}\,\Xi = W \sinh(d) W^T.
    """
    fac = takagi(xi)
    W, d = fac.W, fac.d
    U = (W * np.cosh(d)) @ W.conj().T
    V = (W * np.sinh(d)) @ W.T
    U = 0.5 * (U + U.conj().T)
    V = 0.5 * (V + V.T)
    return U, V


def det(a):
    m = as_square(a)
    if np.linalg.cond(m) > MAX_CONDITION:
        raise Singular("matrix is numerically singular")
    return np.linalg.det(m)


def logdet(a):
    r"""Continuous-branch :math:`\log\det` of a matrix whose spectrum avoids :math:`(-\infty, 0]`.

    Sums principal logarithms of the eigenvalues. Every determinant that
    enters the ultracoherent formulas has the form :math:`\det(I - X)` with
    :math:`\|X\| < 1`, whose eigenvalues lie in the open right half plane,
    so this choice agrees with analytic continuation from :math:`X = 0`.
    """
    m = as_square(a)
    if np.linalg.cond(m) > MAX_CONDITION:
        raise Singular("matrix is numerically singular")
    return complex(np.sum(np.log(np.linalg.eigvals(m).astype(complex))))


def hs_norm(a):
    return float(np.linalg.norm(as_matrix(a), "fro"))


def spectral_norm(a):
    return float(np.linalg.norm(as_matrix(a), 2))


def inverse(a):
    m = as_square(a)
    if np.linalg.cond(m) > MAX_CONDITION:
        raise Singular("matrix is numerically singular")
    return np.linalg.inv(m)


def solve(a, b):
    """``inverse(a) @ b`` without forming the inverse."""
    m = as_square(a)
    if np.linalg.cond(m) > MAX_CONDITION:
        raise Singular("matrix is numerically singular")
    return np.linalg.solve(m, b)


def expm(a):
    return scipy.linalg.expm(as_square(a))


def random_symmetric(rng, n, scale=1.0):
    """Random complex symmetric matrix with entries of order ``scale``."""
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (g + g.T)


def random_hermitian(rng, n, scale=1.0):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (g + g.conj().T)
