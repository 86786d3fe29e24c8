r"""Closed-form Fock-space calculus on ultracoherent vectors.

An ultracoherent vector :math:`c\,\exp(\Omega(Z) + f)` is stored as
``(log_amp, Z, f)`` with :math:`c = e^{\text{log\_amp}}`, :math:`Z` complex
symmetric inside the Siegel disc and :math:`f \in \mathbb{C}^n`. In the
occupation basis it is :math:`c\exp(\tfrac12 b^\dagger Z b^\dagger + b^\dagger(f))`
applied to the vacuum.

Bilinear brackets follow the convention :math:`\langle x|y\rangle = \sum_\mu x_\mu y_\mu`
and sesquilinear ones :math:`(x|y) = \sum_\mu \bar x_\mu y_\mu`.

Amplitudes live in the log domain. Determinant factors
:math:`\det(\cdot)^{-1/2}` are evaluated as sums of principal eigenvalue
logarithms (see :func:`canonfock.linops.logdet`); the resulting phase
convention is internally consistent but the projective multiplier
:math:`\omega(G_2, G_1)` it produces is only meaningful up to that choice.
"""

from dataclasses import dataclass

import numpy as np

from canonfock import linops
from canonfock.errors import ShapeMismatch, Singular, ValidationError
from canonfock.symplectic import (
    SIEGEL_EPS,
    SqueezeGenerator,
    SymplecticPair,
    compose,
    from_squeeze,
    siegel_action,
)


def _bil(x, y):
    return complex(np.dot(x, y))


def _ses(x, y):
    return complex(np.vdot(x, y))


@dataclass(frozen=True, eq=False)
class UltracoherentVector:
    """``exp(log_amp) * exp(Omega(Z) + f)``."""

    log_amp: complex
    Z: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        Z = linops.check_symmetric(self.Z, "Z", rtol=1e-10)
        f = np.atleast_1d(np.asarray(self.f, dtype=complex))
        if f.ndim != 1 or f.shape[0] != Z.shape[0]:
            raise ShapeMismatch(f"f has shape {f.shape} for Z of shape {Z.shape}")
        if not np.all(np.isfinite(f)):
            raise ValidationError("f has non-finite entries")
        if linops.spectral_norm(Z) >= 1 - SIEGEL_EPS:
            raise ValidationError("Z is not inside the Siegel disc")
        Z.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "log_amp", complex(self.log_amp))

    @property
    def n(self):
        return self.Z.shape[0]

    @property
    def amplitude(self):
        return np.exp(self.log_amp)

    @classmethod
    def vacuum(cls, n):
        return cls(0.0, np.zeros((n, n), dtype=complex), np.zeros(n, dtype=complex))

    @classmethod
    def exponential(cls, f):
        """The exponential vector ``exp f``."""
        f = np.atleast_1d(np.asarray(f, dtype=complex))
        return cls(0.0, np.zeros((f.size, f.size), dtype=complex), f)

    @classmethod
    def coherent(cls, f):
        """The normalized coherent state ``exp(f - ||f||^2 / 2)``."""
        f = np.atleast_1d(np.asarray(f, dtype=complex))
        return cls(-0.5 * np.vdot(f, f).real, np.zeros((f.size, f.size), dtype=complex), f)

    def scaled(self, log_factor):
        return UltracoherentVector(self.log_amp + log_factor, self.Z, self.f)


@dataclass(frozen=True, eq=False)
class WeylDisplacement:
    """Argument ``h`` of the Weyl operator ``W(h) = exp(b^+(h) - b(h*))``."""

    h: np.ndarray

    def __post_init__(self):
        h = np.atleast_1d(np.asarray(self.h, dtype=complex))
        if not np.all(np.isfinite(h)):
            raise ValidationError("h has non-finite entries")
        object.__setattr__(self, "h", h)


def _as_h(h):
    return h.h if isinstance(h, WeylDisplacement) else np.atleast_1d(np.asarray(h, dtype=complex))


def _check_same_n(u1, u2):
    if u1.n != u2.n:
        raise ShapeMismatch(f"mode counts differ: {u1.n} vs {u2.n}")


def log_inner(u1, u2):
    r"""Logarithm of :math:`(u_1|u_2)`, continuous branch.

    With :math:`A = Z_1`, :math:`B = Z_2`, :math:`f = f_1`, :math:`g = f_2`:

    .. math::
        \bar c_1 c_2 \det(I - A^\dagger B)^{-1/2}
        \exp\{\tfrac12\langle \bar f|C\bar f\rangle
        + \langle \bar f|(I - BA^\dagger)^{-1} g\rangle
        + \tfrac12\langle g|D g\rangle\}

    with :math:`C = (I - BA^\dagger)^{-1}B` and :math:`D = A^\dagger(I - BA^\dagger)^{-1}`.
    """
    _check_same_n(u1, u2)
    n = u1.n
    A, B = u1.Z, u2.Z
    Ah = A.conj().T
    eye = np.eye(n)
    M = eye - B @ Ah
    fbar = u1.f.conj()
    g = u2.f
    try:
        C = linops.solve(M, B)
        Mg = linops.solve(M, g)
        D = Ah @ linops.inverse(M)
        ld = linops.logdet(eye - Ah @ B)
    except Singular as exc:
        raise Singular("inner product undefined near the Siegel boundary") from exc
    exponent = 0.5 * _bil(fbar, C @ fbar) + _bil(fbar, Mg) + 0.5 * _bil(g, D @ g)
    return np.conj(u1.log_amp) + u2.log_amp - 0.5 * ld + exponent


def inner(u1, u2):
    """Fock inner product ``(u1 | u2)``, antilinear in ``u1``."""
    return complex(np.exp(log_inner(u1, u2)))


def norm(u):
    return float(np.sqrt(np.exp(log_inner(u, u).real)))


def log_bargmann(u, z):
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.shape != (u.n,):
        raise ShapeMismatch(f"z has shape {z.shape} for {u.n} modes")
    zb = z.conj()
    return u.log_amp + 0.5 * _bil(zb, u.Z @ zb) + _bil(zb, u.f)


def bargmann(u, z):
    r"""Bargmann-Fock representative :math:`(\exp z | u) = c\,e^{\frac12\langle\bar z|Z\bar z\rangle + \langle\bar z|f\rangle}`."""
    return complex(np.exp(log_bargmann(u, z)))


def from_bargmann(points, values):
    """Recover the ultracoherent vector whose Bargmann function takes ``values`` at ``points``.

    ``log`` of the Bargmann function is a quadratic polynomial in the
    conjugated probe point, so this is a linear least-squares problem for
    ``(log_amp, f, Z)``. Logarithms are taken relative to the first probe
    point; the exponent must vary by less than ``pi`` in phase across the
    probes, which holds for probe points of small modulus.
    """
    points = np.asarray(points, dtype=complex)
    values = np.asarray(values, dtype=complex)
    m, n = points.shape
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    if m < 1 + n + len(pairs):
        raise ValidationError(f"need at least {1 + n + len(pairs)} probe points, got {m}")
    zb = points.conj()
    design = np.empty((m, 1 + n + len(pairs)), dtype=complex)
    design[:, 0] = 1.0
    design[:, 1 : 1 + n] = zb
    for k, (i, j) in enumerate(pairs):
        design[:, 1 + n + k] = zb[:, i] * zb[:, j] * (0.5 if i == j else 1.0)
    logs = np.log(values[0]) + np.log(values / values[0])
    coef, *_ = np.linalg.lstsq(design, logs, rcond=None)
    Z = np.zeros((n, n), dtype=complex)
    for k, (i, j) in enumerate(pairs):
        Z[i, j] = Z[j, i] = coef[1 + n + k]
    return UltracoherentVector(coef[0], Z, coef[1 : 1 + n])


def weyl_apply(h, u):
    r"""Action of the Weyl operator on an ultracoherent vector.

    :math:`Z` is unchanged, :math:`f \to f + h - Z\bar h`, and the amplitude
    picks up :math:`-\tfrac12\|h\|^2 + \tfrac12\langle\bar h|Z\bar h - 2f\rangle`.
    """
    h = _as_h(h)
    if h.shape != (u.n,):
        raise ShapeMismatch(f"h has shape {h.shape} for {u.n} modes")
    hb = h.conj()
    shift = -0.5 * np.vdot(h, h).real + 0.5 * _bil(hb, u.Z @ hb - 2 * u.f)
    return UltracoherentVector(u.log_amp + shift, u.Z, u.f + h - u.Z @ hb)


def weyl_matrix_element(f, h, g):
    """``(exp f | W(h) exp g) = exp((f|g) + (f|h) - (h|g) - ||h||^2 / 2)``."""
    f = np.atleast_1d(np.asarray(f, dtype=complex))
    g = np.atleast_1d(np.asarray(g, dtype=complex))
    h = _as_h(h)
    if not f.shape == g.shape == h.shape:
        raise ShapeMismatch("f, h and g must have the same length")
    return complex(np.exp(_ses(f, g) + _ses(f, h) - _ses(h, g) - 0.5 * np.vdot(h, h).real))


def transform(g, u):
    r"""Apply the Fock-space representative :math:`T(G)` to an ultracoherent vector.

    .. math::
        T(G)\,e^{\Omega(A)+f} = \det|U|^{-1/2}\det(I + V^\dagger U^{\dagger-1}A)^{-1/2}
        \exp\{\Omega(\zeta(G;A)) + (U^\dagger + AV^\dagger)^{-1}f
        - \tfrac12\langle f|V^\dagger(U^\dagger + AV^\dagger)^{-1}f\rangle\}

    where :math:`\det|U| = \det(I + VV^\dagger)^{1/2}`.

    Raises:
        Singular: the mapped ``Z`` reaches the Siegel boundary or
            :math:`U^\dagger + AV^\dagger` is numerically singular.
    """
    if not isinstance(g, SymplecticPair):
        raise TypeError("g must be a SymplecticPair")
    if g.n != u.n:
        raise ShapeMismatch(f"{g.n}-mode transformation on {u.n}-mode vector")
    U, V, A, f = g.U, g.V, u.Z, u.f
    Uh, Vh = U.conj().T, V.conj().T
    eye = np.eye(g.n)
    M = Uh + A @ Vh
    Z_new = siegel_action(g, A)
    f_new = linops.solve(M, f)
    ld_absU = 0.5 * linops.logdet(eye + V @ Vh).real
    ld_second = linops.logdet(eye + Vh @ linops.solve(Uh, A))
    quad = _bil(f, Vh @ f_new)
    log_amp = u.log_amp - 0.5 * ld_absU - 0.5 * ld_second - 0.5 * quad
    return UltracoherentVector(log_amp, Z_new, f_new)


def squeeze_vacuum(Xi):
    """Squeezed vacuum ``S(Xi) 1_vac``."""
    if not isinstance(Xi, SqueezeGenerator):
        Xi = SqueezeGenerator(Xi)
    return transform(from_squeeze(Xi), UltracoherentVector.vacuum(Xi.n))


def ratio(u1, u2, atol=1e-9):
    """Scalar ``w`` with ``u1 == w * u2``; raises if the two are not proportional."""
    _check_same_n(u1, u2)
    scale = 1 + max(np.abs(u1.f).max(initial=0), np.abs(u1.Z).max(initial=0))
    if not (
        np.allclose(u1.Z, u2.Z, rtol=0, atol=atol * scale)
        and np.allclose(u1.f, u2.f, rtol=0, atol=atol * scale)
    ):
        raise ValidationError("vectors are not proportional")
    return complex(np.exp(u1.log_amp - u2.log_amp))


def multiplier(g2, g1, probe=None):
    r"""Projective multiplier :math:`\omega` with :math:`T(G_2)T(G_1) = \omega\,T(G_2G_1)`.

    Evaluated on ``probe`` (the vacuum by default). :math:`\omega` does not
    depend on the probe; tests confirm this over several probe vectors.
    """
    if probe is None:
        probe = UltracoherentVector.vacuum(g1.n)
    lhs = transform(g2, transform(g1, probe))
    rhs = transform(compose(g2, g1), probe)
    return ratio(lhs, rhs)


def distance_sq(u1, u2):
    """``||u1 - u2||^2`` from inner products; subject to cancellation near zero."""
    return (
        np.exp(log_inner(u1, u1).real)
        + np.exp(log_inner(u2, u2).real)
        - 2 * inner(u1, u2).real
    )


def random_ultracoherent(rng, n, z_scale=0.5, f_scale=1.0):
    """Random vector with ``||Z||_2 <= z_scale`` and ``||f|| <= f_scale``."""
    Zr = linops.random_symmetric(rng, n)
    Z = Zr * (z_scale * rng.uniform(0.2, 1.0) / max(linops.spectral_norm(Zr), 1e-300))
    f = rng.normal(size=n) + 1j * rng.normal(size=n)
    f = f * (f_scale * rng.uniform(0.2, 1.0) / np.linalg.norm(f))
    log_amp = complex(rng.normal(scale=0.3), rng.uniform(-np.pi, np.pi))
    return UltracoherentVector(log_amp, Z, f)
