"""Brute-force truncated Fock space, used as the independent oracle.

Occupation tuples ``(n_0, ..., n_{k-1})`` with ``0 <= n_i <= cutoff`` are
flattened row-major, mode 0 slowest (``numpy.ravel_multi_index`` order).
Operators are assembled from truncated ladder matrices; quadratic generators
are built from products of those matrices, never from the closed-form
results they are meant to check.
"""

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from canonfock import fockrep, linops
from canonfock.errors import (
    CutoffTooSmall,
    DimensionTooLarge,
    IndexOutOfRange,
    InvalidParameters,
    Overflow,
    ShapeMismatch,
    ValidationError,
)
from canonfock.fockrep import UltracoherentVector
from canonfock.symplectic import SymplecticPair, compose, from_rotation, from_squeeze

DEFAULT_MAX_DIM = 250_000
TRUNCATION_TOL = 1e-8
MAX_EXP_NORM = 1e3


def max_dim():
    return int(os.environ.get("CANONFOCK_MAX_DIM", DEFAULT_MAX_DIM))


@dataclass(frozen=True)
class FockBasis:
    n_modes: int
    cutoff: int

    def __post_init__(self):
        if self.n_modes < 1 or self.cutoff < 1:
            raise InvalidParameters("n_modes and cutoff must be positive")
        if self.dim > max_dim():
            raise DimensionTooLarge(f"Fock dimension {self.dim} exceeds cap {max_dim()}")

    @property
    def shape(self):
        return (self.cutoff + 1,) * self.n_modes

    @property
    def dim(self):
        return (self.cutoff + 1) ** self.n_modes

    def index(self, occupations):
        return int(np.ravel_multi_index(tuple(occupations), self.shape))

    def occupations(self):
        """``(dim, n_modes)`` array of occupation numbers in basis order."""
        return np.array(np.unravel_index(np.arange(self.dim), self.shape)).T

    def safe_mask(self, margin=1):
        """States whose every occupation is at most ``cutoff - margin``."""
        return np.all(self.occupations() <= self.cutoff - margin, axis=1)

    def basis_vector(self, occupations):
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(occupations)] = 1.0
        return FockVector(self, v)


@dataclass(frozen=True, eq=False)
class FockVector:
    basis: FockBasis
    coeffs: np.ndarray
    truncation_weight: float = 0.0

    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def vdot(self, other):
        return complex(np.vdot(self.coeffs, other.coeffs))

    def as_array(self):
        """Coefficients reshaped to one axis per mode."""
        return self.coeffs.reshape(self.basis.shape)


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Truncated operator; stored sparse, densified on demand."""

    basis: FockBasis
    matrix: sp.csr_matrix = field(repr=False)

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=complex)
        if m.shape != (self.basis.dim, self.basis.dim):
            raise ShapeMismatch(f"operator shape {m.shape} for dimension {self.basis.dim}")
        object.__setattr__(self, "matrix", m)

    @cached_property
    def dense(self):
        return self.matrix.toarray()

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(self.basis, self.matrix @ other.matrix)
        if isinstance(other, FockVector):
            return FockVector(self.basis, self.matrix @ other.coeffs)
        return self.matrix @ other

    def __add__(self, other):
        return FockOperator(self.basis, self.matrix + other.matrix)

    def __sub__(self, other):
        return FockOperator(self.basis, self.matrix - other.matrix)

    def __mul__(self, scalar):
        return FockOperator(self.basis, self.matrix * scalar)

    __rmul__ = __mul__

    def adjoint(self):
        return FockOperator(self.basis, self.matrix.conj().T)


def commutator(a, b):
    return a @ b - b @ a


def identity(basis):
    return FockOperator(basis, sp.identity(basis.dim, dtype=complex, format="csr"))


def _single_mode_annihilator(cutoff):
    return sp.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1, format="csr", dtype=complex)


def ladder(basis, mode):
    """Truncated ``(a, a^+)`` for ``mode``; ``<n-1|a|n> = sqrt(n)``."""
    if not 0 <= mode < basis.n_modes:
        raise IndexOutOfRange(f"mode {mode} outside 0..{basis.n_modes - 1}")
    eye = sp.identity(basis.cutoff + 1, dtype=complex, format="csr")
    a = None
    for k in range(basis.n_modes):
        factor = _single_mode_annihilator(basis.cutoff) if k == mode else eye
        a = factor if a is None else sp.kron(a, factor, format="csr")
    a = FockOperator(basis, a)
    return a, a.adjoint()


def _ladders(basis):
    return [ladder(basis, k) for k in range(basis.n_modes)]


def _check_matrix(basis, M, name):
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.shape != (basis.n_modes, basis.n_modes):
        raise ShapeMismatch(f"{name} has shape {M.shape} for {basis.n_modes} modes")
    return M


def number_operator(basis, mode=None):
    modes = range(basis.n_modes) if mode is None else [mode]
    total = FockOperator(basis, sp.csr_matrix((basis.dim, basis.dim), dtype=complex))
    for k in modes:
        a, ad = ladder(basis, k)
        total = total + ad @ a
    return total


def quad_rotation_gen(basis, Psi):
    """``K_Psi = sum Psi_{mu nu} b+_mu b_nu``."""
    Psi = _check_matrix(basis, Psi, "Psi")
    ops = _ladders(basis)
    K = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for mu, (_, adm) in enumerate(ops):
        for nu, (an, _) in enumerate(ops):
            if Psi[mu, nu] != 0:
                K = K + Psi[mu, nu] * (adm.matrix @ an.matrix)
    return FockOperator(basis, K)


def quad_squeeze_gen(basis, Xi):
    """``K_Xi = (b+ Xi b+ - b conj(Xi) b) / 2``."""
    Xi = _check_matrix(basis, Xi, "Xi")
    ops = _ladders(basis)
    K = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for mu, (am, adm) in enumerate(ops):
        for nu, (an, adn) in enumerate(ops):
            x = Xi[mu, nu]
            if x != 0:
                K = K + 0.5 * (x * (adm.matrix @ adn.matrix) - np.conj(x) * (am.matrix @ an.matrix))
    return FockOperator(basis, K)


def weyl_gen(basis, h):
    """``b+(h) - b(h*)``."""
    h = np.atleast_1d(np.asarray(h, dtype=complex))
    if h.shape != (basis.n_modes,):
        raise ShapeMismatch(f"h has shape {h.shape} for {basis.n_modes} modes")
    K = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for k, (a, ad) in enumerate(_ladders(basis)):
        K = K + h[k] * ad.matrix - np.conj(h[k]) * a.matrix
    return FockOperator(basis, K)


def raising_gen(basis, Z, f):
    """The raising-only operator ``b+ Z b+ / 2 + b+(f)``."""
    Z = _check_matrix(basis, Z, "Z")
    f = np.atleast_1d(np.asarray(f, dtype=complex))
    ops = _ladders(basis)
    K = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for mu, (_, adm) in enumerate(ops):
        if f[mu] != 0:
            K = K + f[mu] * adm.matrix
        for nu, (_, adn) in enumerate(ops):
            if Z[mu, nu] != 0:
                K = K + 0.5 * Z[mu, nu] * (adm.matrix @ adn.matrix)
    return FockOperator(basis, K)


def _check_exp_norm(op, scale=1.0):
    norm1 = sp.linalg.norm(op.matrix, 1) * abs(scale)
    if norm1 > MAX_EXP_NORM:
        raise Overflow(f"operator 1-norm {norm1:.3g} exceeds safe exponential bound {MAX_EXP_NORM}")


def mat_exp(op):
    """Dense matrix exponential (scaling and squaring with Pade approximants)."""
    _check_exp_norm(op)
    return FockOperator(op.basis, scipy.linalg.expm(op.dense))


def exp_apply(op, vec, scale=1.0):
    """``exp(scale * op) @ vec`` without forming the exponential."""
    _check_exp_norm(op, scale)
    return FockVector(vec.basis, expm_multiply(scale * op.matrix, vec.coeffs))


def vacuum(basis):
    return basis.basis_vector((0,) * basis.n_modes)


def embed(u, basis, tol=TRUNCATION_TOL):
    """Truncated image of an ultracoherent vector.

    Sums the exponential series of the raising-only generator on the vacuum.
    The generator is nilpotent on the truncated space, so the series is
    exact for every kept occupation. The truncation weight
    ``1 - ||P u||^2 / ||u||^2`` uses the closed-form norm.

    Raises:
        CutoffTooSmall: truncation weight above ``tol``.
    """
    if u.n != basis.n_modes:
        raise ShapeMismatch(f"{u.n}-mode vector in {basis.n_modes}-mode basis")
    X = raising_gen(basis, u.Z, u.f).matrix
    term = vacuum(basis).coeffs
    total = term.copy()
    for k in range(1, basis.n_modes * basis.cutoff + 1):
        term = X @ term / k
        if not np.any(term):
            break
        total += term
    total = total * np.exp(u.log_amp)
    exact_sq = np.exp(fockrep.log_inner(u, u).real)
    weight = float(max(0.0, 1.0 - np.vdot(total, total).real / exact_sq))
    if tol is not None and weight > tol:
        raise CutoffTooSmall(f"truncation weight {weight:.3e} at cutoff {basis.cutoff} exceeds {tol:g}")
    return FockVector(basis, total, weight)


# --- closed form vs brute force ------------------------------------------

STEP_KINDS = ("rotation", "squeeze", "weyl")
SAFE_SQUEEZE = 0.5
SAFE_DISPLACEMENT = 1.0
SAFE_MODES = 2


@dataclass(frozen=True, eq=False)
class OracleCase:
    """A state and a sequence of operations, applied left to right.

    ``steps`` holds ``(kind, data)`` pairs: ``("rotation", Psi)`` for
    ``exp(i b+ Psi b)``, ``("squeeze", Xi)`` for ``S(Xi)`` and
    ``("weyl", h)`` for ``W(h)``. With ``kind == "inner"`` the case instead
    compares ``(state | other)``.
    """

    name: str
    state: UltracoherentVector
    steps: tuple = ()
    other: UltracoherentVector = None

    @property
    def kind(self):
        return "inner" if self.other is not None else "operator"


@dataclass(frozen=True)
class OracleReport:
    case: str
    cutoff: int
    overlap_error: float
    norm_error: float
    truncation_weight: float

    def to_dict(self):
        return {
            "case": self.case,
            "cutoff": self.cutoff,
            "overlap_error": self.overlap_error,
            "norm_error": self.norm_error,
            "truncation_weight": self.truncation_weight,
        }


def _check_steps(steps, n):
    for kind, data in steps:
        if kind not in STEP_KINDS:
            raise ValidationError(f"unknown step kind {kind!r}")
        if np.asarray(data).shape[0] != n:
            raise ShapeMismatch(f"{kind} step has wrong size for {n} modes")


def analytic_result(case):
    """Closed-form image of ``case.state``; consecutive symplectic steps are fused into one pair."""
    u = case.state
    pending = None

    def flush(u, pending):
        return u if pending is None else fockrep.transform(pending, u)

    for kind, data in case.steps:
        if kind == "weyl":
            u = fockrep.weyl_apply(data, flush(u, pending))
            pending = None
            continue
        g = from_rotation(data) if kind == "rotation" else from_squeeze(data)
        pending = g if pending is None else compose(g, pending)
    return flush(u, pending)


def brute_result(case, basis):
    vec = embed(case.state, basis)
    for kind, data in case.steps:
        if kind == "rotation":
            vec = exp_apply(quad_rotation_gen(basis, data), vec, 1j)
        elif kind == "squeeze":
            vec = exp_apply(quad_squeeze_gen(basis, data), vec)
        else:
            vec = exp_apply(weyl_gen(basis, data), vec)
    return vec


def overlap_error(a, b):
    """``1 - |<a|b>| / (||a|| ||b||)``, clipped at zero."""
    value = 1.0 - abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b))
    return float(max(value, 0.0))


def oracle_compare(case, cutoff=40, tol=TRUNCATION_TOL):
    """Compare the closed-form result of ``case`` with the truncated-Fock brute force.

    Both sides are compared inside the truncated space: the analytic state
    is embedded (projected) before the overlap is taken, so truncation error
    and formula error stay separate.
    """
    basis = FockBasis(case.state.n, cutoff)
    if case.kind == "inner":
        a = embed(case.state, basis, tol)
        b = embed(case.other, basis, tol)
        exact = fockrep.inner(case.state, case.other)
        brute = np.vdot(a.coeffs, b.coeffs)
        rel = abs(exact - brute) / abs(brute)
        norm_err = abs(fockrep.norm(case.state) - a.norm()) / a.norm()
        return OracleReport(
            case.name, cutoff, float(rel), float(norm_err),
            max(a.truncation_weight, b.truncation_weight),
        )
    _check_steps(case.steps, case.state.n)
    analytic = analytic_result(case)
    a = embed(analytic, basis, tol)
    b = brute_result(case, basis)
    norm_err = abs(fockrep.norm(analytic) - b.norm()) / b.norm()
    start = embed(case.state, basis, tol)
    return OracleReport(
        case.name, cutoff, overlap_error(a.coeffs, b.coeffs), float(norm_err),
        max(start.truncation_weight, a.truncation_weight),
    )


def _random_vec(rng, n, max_norm):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v * (max_norm * rng.uniform(0.2, 1.0) / np.linalg.norm(v))


def _random_squeeze(rng, n, max_r=SAFE_SQUEEZE):
    Xi = linops.random_symmetric(rng, n)
    return Xi * (max_r * rng.uniform(0.2, 1.0) / linops.spectral_norm(Xi))


def random_case(rng, kind, n_modes, name=None):
    """Random oracle case inside the safe ranges.

    ``kind`` is one of ``transform``, ``weyl``, ``inner``,
    ``squeeze_vacuum``. Squeeze amplitudes (Takagi values) stay below 0.5
    and displacements below norm 1.
    """
    n = n_modes
    if not 1 <= n <= SAFE_MODES:
        raise ValidationError(f"oracle cases support 1..{SAFE_MODES} modes")
    name = name or f"{kind}-{n}mode"
    if kind == "squeeze_vacuum":
        return OracleCase(name, UltracoherentVector.vacuum(n), (("squeeze", _random_squeeze(rng, n)),))
    if kind == "transform":
        u = fockrep.random_ultracoherent(rng, n, z_scale=0.15, f_scale=0.7)
        steps = (
            ("rotation", linops.random_hermitian(rng, n)),
            ("squeeze", _random_squeeze(rng, n)),
            ("rotation", linops.random_hermitian(rng, n)),
        )
        return OracleCase(name, u, steps)
    if kind == "weyl":
        u = fockrep.squeeze_vacuum(_random_squeeze(rng, n, 0.3))
        u = fockrep.weyl_apply(_random_vec(rng, n, 0.5), u)
        return OracleCase(name, u, (("weyl", _random_vec(rng, n, SAFE_DISPLACEMENT)),))
    if kind == "inner":
        u1 = fockrep.random_ultracoherent(rng, n, z_scale=0.5, f_scale=SAFE_DISPLACEMENT)
        u2 = fockrep.random_ultracoherent(rng, n, z_scale=0.5, f_scale=SAFE_DISPLACEMENT)
        return OracleCase(name, u1, other=u2)
    raise ValidationError(f"unknown case kind {kind!r}")


CASE_KINDS = ("transform", "weyl", "inner", "squeeze_vacuum")
