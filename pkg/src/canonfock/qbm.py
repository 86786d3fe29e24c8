r"""Harmonic oscillator in a squeezed thermal Ohmic bath, high-temperature limit.

The reduced Wigner function obeys

.. math::
    \partial_t W = -\tfrac1M\partial_x(pW) + M\Omega_{ren}^2\partial_p(xW)
    + 2\Gamma\partial_p(pW) - \hbar D_{pp}\partial_p^2 W
    - \hbar(D_{xp} + D_{px})\partial_x\partial_p W - \hbar D_{xx}\partial_x^2 W

with time-dependent coefficients given in closed form by :func:`coeffs`.
Gaussian states stay Gaussian, so :func:`propagate_gaussian` integrates the
first and second moments only.
"""

from dataclasses import dataclass, replace

import numpy as np

from canonfock.errors import InvalidParameters, NearResonance, StepTooLarge

SIN_GUARD = 1e-6
ENVELOPE_SLACK = 1e-4


@dataclass(frozen=True)
class QbmParams:
    """Oscillator and bath parameters.

    ``a`` is the slope of the squeeze phase ``theta(omega) = a * omega``
    (units of time). Only the underdamped regime ``Omega > 2 * gamma0`` is
    supported.
    """

    M: float = 1.0
    Omega: float = 1.0
    gamma0: float = 0.1
    T: float = 1.0
    r: float = 0.0
    a: float = 0.0
    hbar: float = 1.0
    kB: float = 1.0

    def __post_init__(self):
        if self.M <= 0 or self.T <= 0 or self.gamma0 <= 0:
            raise InvalidParameters("M, T and gamma0 must be positive")
        if self.r < 0:
            raise InvalidParameters("squeeze amplitude r must be non-negative")
        if self.hbar <= 0 or self.kB <= 0:
            raise InvalidParameters("hbar and kB must be positive")
        if not self.Omega > 2 * self.gamma0:
            raise InvalidParameters(
                "overdamped regime (Omega <= 2 gamma0) is not supported; zeta would be imaginary"
            )

    @property
    def p(self):
        return 4 * self.gamma0

    @property
    def zeta(self):
        return float(np.sqrt(self.Omega**2 - self.p**2 / 4))

    @property
    def K1(self):
        return float(np.cosh(2 * self.r))

    @property
    def K2bar(self):
        return float(np.sinh(2 * self.r))

    def with_(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class WignerCoeffs:
    omega_ren_sq: float
    gamma: float
    dxx: float
    dxp: float
    dpx: float
    dpp: float

    def as_tuple(self):
        return (self.omega_ren_sq, self.gamma, self.dxx, self.dxp, self.dpx, self.dpp)


def thermal_dpp(params):
    """``D_pp`` of the unsqueezed bath, ``-2 M kB T gamma0 K1 / hbar`` with ``K1 = 1``."""
    return -2 * params.M * params.kB * params.T * params.gamma0 / params.hbar


def coeffs(params, t, sin_guard=SIN_GUARD):
    r"""Wigner-equation coefficients at time ``t``.

    With :math:`p = 4\gamma_0`, :math:`\zeta = (\Omega^2 - p^2/4)^{1/2}`,
    :math:`K_1 = \cosh 2r`, :math:`\bar K_2 = \sinh 2r` and
    :math:`E = \bar K_2 e^{-p(t-a)}`:

    .. math::
        \Omega_{ren}^2 &= p^2/4 + \zeta^2, \qquad \Gamma = p/2, \\
        D_{xx} &= \frac{2k_BT\gamma_0}{\hbar M\zeta^2} E \sin\zeta t\,\sin\zeta(t-2a), \\
        D_{xp} = D_{px} &= \frac{2k_BT\gamma_0}{\hbar\zeta^2}\Big[\zeta\cot\zeta t - \frac p2\Big]
            E \sin\zeta t\,\sin\zeta(t-2a), \\
        D_{pp} &= -\frac{2Mk_BT\gamma_0}{\hbar}\Big[K_1 - E\Big\{\cos^2\zeta t
            + \frac{p^2}{4\zeta^2}\sin^2\zeta t - \frac{p}{2\zeta}\sin 2\zeta t - 1\Big\}
            \frac{\sin\zeta(t-2a)}{\sin\zeta t}\Big].

    Raises:
        NearResonance: ``|sin(zeta t)| <= sin_guard``.
    """
    if t <= 0:
        raise InvalidParameters("t must be positive")
    p, zeta, a = params.p, params.zeta, params.a
    kT = params.kB * params.T
    s, c = np.sin(zeta * t), np.cos(zeta * t)
    if abs(s) <= sin_guard:
        raise NearResonance(f"|sin(zeta t)| = {abs(s):.2e} at t = {t}; coefficients singular at t = m pi / zeta")
    shifted = np.sin(zeta * (t - 2 * a))
    envelope = params.K2bar * np.exp(-p * (t - a))
    pref = 2 * kT * params.gamma0 / params.hbar

    dxx = pref / (params.M * zeta**2) * envelope * s * shifted
    dxp = pref / zeta**2 * (zeta * c / s - p / 2) * envelope * s * shifted
    bracket = c**2 + p**2 / (4 * zeta**2) * s**2 - p / (2 * zeta) * np.sin(2 * zeta * t)
    dpp = -pref * params.M * (params.K1 - envelope * (bracket - 1) * shifted / s)
    return WignerCoeffs(
        omega_ren_sq=float(p**2 / 4 + zeta**2),
        gamma=float(p / 2),
        dxx=float(dxx),
        dxp=float(dxp),
        dpx=float(dxp),
        dpp=float(dpp),
    )


def singular_times(params, t_max):
    """Times ``m pi / zeta`` in ``(0, t_max]``."""
    m = np.arange(1, int(np.floor(t_max * params.zeta / np.pi)) + 1)
    return m * np.pi / params.zeta


# --- envelope analysis -----------------------------------------------------


@dataclass(frozen=True)
class EnvelopeReport:
    squeezed: bool
    decay_rate_dxx: float | None
    decay_rate_dxp: float | None
    expected_rate: float
    envelope_constant: float | None
    bound_holds: bool
    thermalization_time: float | None

    def to_dict(self):
        return dict(self.__dict__)


def _peak_decay_rate(t, values):
    """Decay rate of the local maxima of ``|values|``, by a log-linear fit."""
    mag = np.abs(values)
    inner = (mag[1:-1] > mag[:-2]) & (mag[1:-1] >= mag[2:])
    idx = np.flatnonzero(inner) + 1
    if idx.size < 3:
        return None
    # parabolic refinement of each peak on the log scale
    tp, lp = [], []
    dt = t[1] - t[0]
    for i in idx:
        y0, y1, y2 = np.log(mag[i - 1 : i + 2])
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        tp.append(t[i] + shift * dt)
        lp.append(y1 - 0.25 * (y0 - y2) * shift)
    slope, _ = np.polyfit(tp, lp, 1)
    return float(-slope)


def envelope_check(params, t_grid, threshold=0.01):
    r"""Check the :math:`e^{-p(t-a)}` envelope of the squeezing-induced terms.

    Args:
        params: Model parameters.
        t_grid: Uniform, increasing times avoiding ``m pi / zeta``.
        threshold: Fraction of the thermal ``|D_pp|`` that defines thermalization.

    Returns:
        EnvelopeReport with the fitted peak decay rates of ``D_xx`` and
        ``D_xp`` (expected: ``p = 4 gamma0``), the envelope constant ``C``
        fitted on the first quarter of the grid, whether
        ``|D(t)| <= C e^{-p(t-a)}`` holds on the whole grid, and the last
        grid time at which ``max(|D_xx|, |D_xp|)`` is at least
        ``threshold * |D_pp^thermal|``.
    """
    t = np.asarray(t_grid, dtype=float)
    cs = [coeffs(params, ti) for ti in t]
    dxx = np.array([c.dxx for c in cs])
    dxp = np.array([c.dxp for c in cs])
    p = params.p
    if params.r == 0:
        return EnvelopeReport(False, None, None, p, 0.0, True, None)
    decay = np.exp(-p * (t - params.a))
    worst = np.maximum(np.abs(dxx), np.abs(dxp)) / decay
    early = t <= t[0] + 0.25 * (t[-1] - t[0])
    C = float(worst[early].max())
    # slack covers peaks falling between grid points
    bound_holds = bool(np.all(worst <= C * (1 + ENVELOPE_SLACK)))
    above = np.flatnonzero(np.maximum(np.abs(dxx), np.abs(dxp)) >= threshold * abs(thermal_dpp(params)))
    t_therm = float(t[above[-1]]) if above.size else float(t[0])
    return EnvelopeReport(
        True,
        _peak_decay_rate(t, dxx),
        _peak_decay_rate(t, dxp),
        p,
        C,
        bound_holds,
        t_therm,
    )


# --- Gaussian moment propagation ------------------------------------------


@dataclass(frozen=True)
class GaussianState:
    mean_x: float
    mean_p: float
    cov_xx: float
    cov_xp: float
    cov_pp: float

    def validate(self):
        if self.cov_xx <= 0 or self.cov_pp <= 0 or self.cov_xx * self.cov_pp - self.cov_xp**2 <= 0:
            raise InvalidParameters("covariance matrix must be positive definite")
        return self

    @property
    def covariance(self):
        return np.array([[self.cov_xx, self.cov_xp], [self.cov_xp, self.cov_pp]])

    def is_physical(self, hbar=1.0):
        """Uncertainty indicator ``det(cov) >= (hbar/2)^2``; reported, never enforced."""
        return bool(np.linalg.det(self.covariance) >= (hbar / 2) ** 2 * (1 - 1e-12))

    def as_array(self):
        return np.array([self.mean_x, self.mean_p, self.cov_xx, self.cov_xp, self.cov_pp])

    @classmethod
    def from_array(cls, y):
        return cls(*(float(v) for v in y))


def moment_rhs(params, t, y):
    r"""Time derivative of ``(<x>, <p>, s_xx, s_xp, s_pp)`` under the Wigner equation.

    .. math::
        \dot{\langle x\rangle} &= \langle p\rangle/M, \qquad
        \dot{\langle p\rangle} = -M\Omega_{ren}^2\langle x\rangle - 2\Gamma\langle p\rangle, \\
        \dot\sigma_{xx} &= 2\sigma_{xp}/M - 2\hbar D_{xx}, \\
        \dot\sigma_{xp} &= \sigma_{pp}/M - M\Omega_{ren}^2\sigma_{xx} - 2\Gamma\sigma_{xp}
            - \hbar(D_{xp} + D_{px}), \\
        \dot\sigma_{pp} &= -2M\Omega_{ren}^2\sigma_{xp} - 4\Gamma\sigma_{pp} - 2\hbar D_{pp}.
    """
    c = coeffs(params, t)
    M, hb = params.M, params.hbar
    x, p, sxx, sxp, spp = y
    w2 = c.omega_ren_sq
    return np.array([
        p / M,
        -M * w2 * x - 2 * c.gamma * p,
        2 * sxp / M - 2 * hb * c.dxx,
        spp / M - M * w2 * sxx - 2 * c.gamma * sxp - hb * (c.dxp + c.dpx),
        -2 * M * w2 * sxp - 4 * c.gamma * spp - 2 * hb * c.dpp,
    ])


def _energy_like(params, y):
    x, p, sxx, _, spp = y
    M, w2 = params.M, params.Omega**2
    return M * w2 * (x**2 + sxx) + (p**2 + spp) / M


def propagate_gaussian(params, initial, t0, t1, steps):
    """Fixed-step classical RK4 integration of the moment equations.

    Returns ``(times, states)`` with ``steps + 1`` entries each.

    Raises:
        NearResonance: a stage time falls on a singular time of the coefficients.
        StepTooLarge: the energy-like norm grows more than 1e3-fold in one step.
    """
    if t0 <= 0 or t1 <= t0 or steps < 1:
        raise InvalidParameters("need 0 < t0 < t1 and steps >= 1")
    times = np.linspace(t0, t1, steps + 1)
    y = initial.validate().as_array()
    out = [initial]
    for i in range(steps):
        t, h = times[i], times[i + 1] - times[i]
        k1 = moment_rhs(params, t, y)
        k2 = moment_rhs(params, t + h / 2, y + h / 2 * k1)
        k3 = moment_rhs(params, t + h / 2, y + h / 2 * k2)
        k4 = moment_rhs(params, t + h, y + h * k3)
        y_new = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if _energy_like(params, y_new) > 1e3 * max(_energy_like(params, y), 1e-300):
            raise StepTooLarge(f"moment norm grew over 1e3-fold in step at t = {t:.6g}")
        y = y_new
        out.append(GaussianState.from_array(y))
    return times, out


def stationary_moments(params):
    """Fixed point of the moment equations for constant (unsqueezed) coefficients.

    Only defined when ``r == 0``, where every coefficient is time independent.
    """
    if params.r != 0:
        raise InvalidParameters("stationary moments need r == 0")
    gamma = params.p / 2
    spp = -params.hbar * thermal_dpp(params) / (2 * gamma)
    sxx = spp / (params.M**2 * params.Omega**2)
    return GaussianState(0.0, 0.0, sxx, 0.0, spp)
