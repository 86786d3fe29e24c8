r"""Decoherence probe for the van Hove model on a discretized frequency grid.

The bath one-particle space is reduced to a radial frequency grid
:math:`\omega_j` with real couplings :math:`h_j` (the measure is absorbed
into :math:`h_j^2`). For a reference state :math:`\rho_R` the magnitude of
the decoherence function is a Weyl-operator expectation evaluated at
:math:`\tilde k = \Delta\alpha\,k(t)`,

.. math::
    k_j(t) = (e^{i\omega_j t} - 1)\,h_j / \omega_j .

The phase of :math:`\chi` is never computed; all outputs are magnitudes.
"""

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from canonfock import symplectic
from canonfock.errors import InvalidReference, ShapeMismatch, ValidationError, WindowTooNarrow

REFERENCES = ("vacuum", "thermal", "squeezed_vacuum", "squeezed_thermal")


class SemiboundednessWarning(UserWarning):
    """Coupling violates ``4 * sum(h^2 / omega) <= 1``."""


@dataclass(frozen=True, eq=False)
class BathGrid:
    """Frequencies, real couplings and inverse temperature (``beta == 0`` means zero temperature)."""

    omegas: np.ndarray
    h: np.ndarray
    beta: float = 0.0

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float)
        h = np.asarray(self.h)
        if np.iscomplexobj(h):
            if np.any(np.abs(h.imag) > 0):
                raise ValidationError("couplings h must be real")
            h = h.real
        h = h.astype(float)
        if omegas.ndim != 1 or omegas.shape != h.shape:
            raise ShapeMismatch("omegas and h must be 1-D of equal length")
        if np.any(omegas <= 0):
            raise ValidationError("all frequencies must be strictly positive")
        if np.any(np.diff(omegas) <= 0):
            raise ValidationError("frequencies must be strictly increasing")
        if self.beta < 0:
            raise ValidationError("beta must be non-negative")
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def size(self):
        return self.omegas.size

    def semibound(self):
        r""":math:`4\sum_j h_j^2/\omega_j`, which must not exceed 1 for a semibounded Hamiltonian."""
        return float(4 * np.sum(self.h**2 / self.omegas))

    def check_semibounded(self):
        value = self.semibound()
        if value > 1:
            warnings.warn(
                f"4 * sum(h^2/omega) = {value:.4g} > 1; Hamiltonian not semibounded",
                SemiboundednessWarning,
                stacklevel=2,
            )
        return value <= 1

    def occupation(self):
        """Bose occupation ``1 / (exp(beta omega) - 1)``; zero when ``beta == 0``."""
        if self.beta == 0:
            return np.zeros_like(self.omegas)
        # expm1 overflows to inf at large beta*omega; 1/inf = 0 is the right limit
        with np.errstate(over="ignore"):
            return 1.0 / np.expm1(self.beta * self.omegas)


@dataclass(frozen=True)
class CouplingFamily:
    r"""Power-law couplings :math:`h_j^2 = \text{normalization}\,\omega_j^s\,\Delta\omega_j` on a log grid.

    In the continuum, :math:`s > 0` puts :math:`h` in the domain of
    :math:`M^{-1/2}` and :math:`s \le 1` takes it out of the domain of
    :math:`M^{-1}`; ``0 < s <= 1`` is the infrared-divergent window.
    """

    s: float
    omega_min: float = 1e-4
    omega_max: float = 1e3
    n_points: int = 2000
    normalization: float = 1.0

    def __post_init__(self):
        if not 0 < self.omega_min < self.omega_max:
            raise ValidationError("need 0 < omega_min < omega_max")
        if self.n_points < 2:
            raise ValidationError("need at least two grid points")

    def weights(self):
        """Frequencies and quadrature widths of the log-spaced grid."""
        edges = np.geomspace(self.omega_min, self.omega_max, self.n_points + 1)
        omegas = np.sqrt(edges[:-1] * edges[1:])
        return omegas, np.diff(edges)

    def grid(self, beta=0.0):
        omegas, widths = self.weights()
        h = np.sqrt(self.normalization * omegas**self.s * widths)
        return BathGrid(omegas, h, beta)


def k_of_t(grid, t):
    r"""The vector :math:`k(t) = (e^{iMt} - I)M^{-1}h`, componentwise."""
    if t < 0:
        raise ValidationError("t must be non-negative")
    w = grid.omegas
    return (np.cos(w * t) - 1) * grid.h / w + 1j * np.sin(w * t) * grid.h / w


def norm_kt_sq(grid, t):
    r""":math:`\|k(t)\|^2 = \sum_j 2(1 - \cos\omega_j t)\,h_j^2/\omega_j^2`."""
    if t < 0:
        raise ValidationError("t must be non-negative")
    w = grid.omegas
    # 1 - cos(x) = 2 sin^2(x/2) avoids cancellation at small x
    return float(np.sum(4 * np.sin(0.5 * w * t) ** 2 * grid.h**2 / w**2))


def squeeze_transform(grid, Xi):
    r"""The canonical map :math:`G = G(\cosh\Xi, -\sinh\Xi) = G_\Xi^{-1}`.

    ``Xi`` is either a 1-D array of per-frequency squeeze amplitudes
    (diagonal, mode-local squeezing) or a full complex symmetric matrix on
    the grid. Returns a function ``k -> G k``.
    """
    Xi = np.asarray(Xi)
    if Xi.ndim == 1:
        if Xi.shape != (grid.size,):
            raise ShapeMismatch(f"diagonal Xi has length {Xi.size}, grid has {grid.size}")
        r = np.abs(Xi)
        phase = np.exp(1j * np.angle(Xi))
        ch, sh = np.cosh(r), np.sinh(r) * phase
        return lambda k: ch * k - sh * np.conj(k)
    if Xi.shape != (grid.size, grid.size):
        raise ShapeMismatch(f"Xi has shape {Xi.shape}, grid has {grid.size} points")
    g = symplectic.inverse(symplectic.from_squeeze(Xi))
    return lambda k: symplectic.apply(g, k)


def squeezed_norm_sq(grid, t, Xi, dalpha=1.0):
    r""":math:`\Delta\alpha^2\,\|(\cosh\Xi)k(t) - (\sinh\Xi)\bar k(t)\|^2`."""
    G = squeeze_transform(grid, Xi)
    return float(dalpha**2 * np.sum(np.abs(G(k_of_t(grid, t))) ** 2))


def _reference_kind(reference):
    kind = reference if isinstance(reference, str) else reference.get("kind")
    if kind not in REFERENCES:
        raise InvalidReference(f"unknown reference state {kind!r}; expected one of {REFERENCES}")
    return kind


def log_chi_magnitude(grid, t, dalpha=1.0, reference="vacuum", Xi=None):
    r"""Logarithm of :math:`|\chi(\alpha,\beta;t)|`; see :func:`chi_magnitude`.

    Stays finite where :math:`|\chi|` itself underflows to zero.
    """
    kind = _reference_kind(reference)
    k = dalpha * k_of_t(grid, t)
    if kind.startswith("squeezed"):
        if Xi is None:
            raise InvalidReference(f"{kind} reference requires Xi")
        k = squeeze_transform(grid, Xi)(k)
    weight = np.abs(k) ** 2
    if kind.endswith("thermal"):
        if grid.beta <= 0:
            raise InvalidReference("thermal references require beta > 0")
        return float(-np.sum(weight * (grid.occupation() + 0.5)))
    return float(-0.5 * np.sum(weight))


def chi_magnitude(grid, t, dalpha=1.0, reference="vacuum", Xi=None):
    r"""Magnitude of the decoherence function :math:`|\chi(\alpha,\beta;t)|`.

    Args:
        grid: Bath grid; ``grid.beta`` is used by the thermal references.
        t: Time, ``t >= 0``.
        dalpha: Spectral separation :math:`\alpha - \beta` of the system sectors.
        reference: ``"vacuum"``, ``"thermal"``, ``"squeezed_vacuum"`` or
            ``"squeezed_thermal"``.
        Xi: Squeeze generator for the squeezed references (1-D diagonal or
            full symmetric matrix).

    Returns:
        A float in ``[0, 1]``, exactly 1 at ``t = 0``. Values below about
        ``1e-308`` underflow to 0; use :func:`log_chi_magnitude` there.

    Raises:
        InvalidReference: unknown reference, missing ``Xi``, or
            ``beta <= 0`` for a thermal reference.
    """
    return float(np.exp(log_chi_magnitude(grid, t, dalpha, reference, Xi)))


@dataclass(frozen=True)
class SweepRow:
    t: float
    norm_kt_sq: float
    squeezed_norm_sq: float
    chi: float


def sweep(grid, ts, dalpha=1.0, reference="vacuum", Xi=None, workers=None):
    """Evaluate the decoherence observables at each time, in input order.

    Each time is evaluated independently, so results do not depend on
    ``workers``.
    """
    zero = np.zeros(grid.size) if Xi is None else Xi

    def row(t):
        return SweepRow(
            float(t),
            norm_kt_sq(grid, t),
            squeezed_norm_sq(grid, t, zero, dalpha),
            chi_magnitude(grid, t, dalpha, reference, Xi),
        )

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(row, ts))
    return [row(t) for t in ts]


@dataclass(frozen=True)
class DivergenceReport:
    fitted_exponent: float
    classified: str
    n_points: int
    t_min: float
    t_max: float
    slope_linear: float

    def to_dict(self):
        return dict(self.__dict__)


MIN_WINDOW_POINTS = 10
DIVERGENT_EXPONENT = 0.1


def usable_times(family, t_grid):
    """Times inside the resolvable window ``10/omega_max <= t <= 0.1/omega_min``."""
    t = np.asarray(t_grid, dtype=float)
    keep = (t > 0) & (t <= 0.1 / family.omega_min) & (t * family.omega_max >= 10)
    return t[keep]


def divergence_probe(family, t_grid):
    r"""Classify :math:`\|k(t)\|^2` growth for a coupling family by a log-log fit.

    The family is ``divergent`` when the fitted exponent is at least 0.1 and
    the values grow monotonically over the window; ``bounded`` otherwise.
    For ``0 <= s < 1`` the continuum growth is :math:`t^{1-s}`.

    Raises:
        WindowTooNarrow: fewer than 10 usable times.
    """
    t = usable_times(family, t_grid)
    if t.size < MIN_WINDOW_POINTS:
        raise WindowTooNarrow(f"only {t.size} usable times in the resolvable window")
    grid = family.grid()
    vals = np.array([norm_kt_sq(grid, ti) for ti in t])
    exponent, _ = np.polyfit(np.log(t), np.log(vals), 1)
    slope, _ = np.polyfit(t, vals, 1)
    monotone = bool(np.all(np.diff(vals) > 0))
    divergent = exponent >= DIVERGENT_EXPONENT and monotone
    return DivergenceReport(
        float(exponent), "divergent" if divergent else "bounded", int(t.size),
        float(t[0]), float(t[-1]), float(slope),
    )
