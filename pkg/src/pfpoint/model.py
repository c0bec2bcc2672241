"""Physical parameters, mass renormalization and the spectral data.

Everything here is unit-generic; the defaults are natural units
m = c = omega0 = hbar = 1 with charge e = 0.3.
"""

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import optimize

from .errors import DomainError, SingularConfigurationError

RESIDUAL_TOL = 1e-12
DEGENERATE_TOL = 1e-14


@dataclass(frozen=True)
class PhysicalParams:
    """Charge, mass, light speed, oscillator frequency and Planck constant.

    ``e = 0`` is accepted as the decoupled limit; every other field must
    be strictly positive.
    """

    e: float = 0.3
    m: float = 1.0
    c: float = 1.0
    omega0: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m", "c", "omega0", "hbar"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")
        if not (math.isfinite(self.e) and self.e >= 0):
            raise DomainError(f"charge must be non-negative and finite, got {self.e!r}")

    @property
    def tau(self):
        """Radiation-reaction coefficient 2e^2/(3c^3)."""
        return 2.0 * self.e**2 / (3.0 * self.c**3)

    @property
    def tau0(self):
        """Radiation time 2e^2/(3mc^3)."""
        return self.tau / self.m

    @property
    def alpha(self):
        """Spring constant m omega0^2."""
        return self.m * self.omega0**2

    @property
    def decoupled(self):
        return self.e == 0.0


def shell_self_energy(r, c=1.0):
    """<(-c^2 Laplacian)^{-1} rho_r, rho_r> for the uniform shell of radius r."""
    if not r > 0:
        raise DomainError(f"shell radius must be positive, got {r!r}")
    return 1.0 / (4.0 * math.pi * c**2 * r)


def renormalized_mass_split(params, r):
    """Split the physical mass into (bare, electromagnetic) at shell radius r.

    The electromagnetic part is (8 pi/3) e^2 <(-c^2 Laplacian)^{-1} rho_r, rho_r>
    = 2e^2/(3c^2 r). The bare mass goes negative below the critical radius;
    that is reported, not rejected.
    """
    em = (8.0 * math.pi / 3.0) * params.e**2 * shell_self_energy(r, params.c)
    return params.m - em, em


def critical_radius(params):
    """Radius at which the bare mass vanishes."""
    if params.decoupled:
        return 0.0
    return 2.0 * params.e**2 / (3.0 * params.c**2 * params.m)


def runaway_cubic(lam, params):
    """tau lam^3 - m (omega0^2 + lam^2); its positive root is lambda_e."""
    return params.tau * lam**3 - params.m * (params.omega0**2 + lam**2)


def solve_lambda_e(params):
    """Unique positive root of tau lam^3 = m (omega0^2 + lam^2).

    Brent on the sign-change bracket [1/tau0, 2/tau0 + omega0^2 tau0],
    then Newton polish. Returns inf in the decoupled limit e = 0.
    """
    if params.decoupled:
        return math.inf
    tau0 = params.tau0
    lo, hi = 1.0 / tau0, 2.0 / tau0 + params.omega0**2 * tau0
    f = lambda x: runaway_cubic(x, params)
    assert f(lo) < 0 < f(hi), "runaway root bracket lost its sign change"
    lam = optimize.brentq(f, lo, hi, xtol=1e-15 * hi, rtol=4 * np.finfo(float).eps, maxiter=200)
    for _ in range(3):
        df = 3 * params.tau * lam**2 - 2 * params.m * lam
        step = f(lam) / df
        lam -= step
        if abs(step) <= 1e-16 * lam:
            break
    resid = abs(f(lam)) / (params.m * (params.omega0**2 + lam**2))
    assert lam > 0 and resid < RESIDUAL_TOL, f"runaway root residual {resid:.3e}"
    return lam


def cubic_residual(lam, params):
    """Relative residual of the runaway cubic at lam."""
    return abs(runaway_cubic(lam, params)) / (params.m * (params.omega0**2 + lam**2))


class ResonancePair(NamedTuple):
    z_plus: complex
    z_minus: complex
    degenerate: bool = False


def _q_coeffs(params, lambda_e):
    # q(z) = tau z^2 + i k' z - k' lambda_e, k' = m omega0^2 / lambda_e^2
    kp = params.alpha / lambda_e**2
    return params.tau, 1j * kp, -kp * lambda_e


def solve_resonances(params, lambda_e):
    """The two roots of q(z), ordered so that Re z_plus >= Re z_minus.

    Both lie in the lower half-plane. ``degenerate`` flags a vanishing
    discriminant (double root).
    """
    if params.decoupled or math.isinf(lambda_e):
        return ResonancePair(complex(params.omega0), complex(-params.omega0), False)
    a, b, c0 = _q_coeffs(params, lambda_e)
    disc = b * b - 4 * a * c0
    sq = np.sqrt(complex(disc))
    scale = abs(b) ** 2 + abs(4 * a * c0)
    degenerate = abs(disc) < DEGENERATE_TOL * scale
    if degenerate:
        warnings.warn("resonance discriminant vanishes: double root", RuntimeWarning, stacklevel=2)
    r1 = (-b + sq) / (2 * a)
    r2 = (-b - sq) / (2 * a)
    zp, zm = (r1, r2) if r1.real >= r2.real else (r2, r1)
    return ResonancePair(complex(zp), complex(zm), bool(degenerate))


def companion_roots(params, lambda_e):
    """Roots of i tau z^3 - m (omega0^2 - z^2) by companion-matrix eigenvalues."""
    coeffs = [1j * params.tau, params.m, 0.0, -params.alpha]
    return np.roots(coeffs)


def perturbative_resonances(params):
    """Truncated small-charge expansions of (omega_e, gamma_e) as published.

    These are reference values only; they do not match the exact roots
    of q (see ``discrepancy_report``).
    """
    e, m, c, w0 = params.e, params.m, params.c, params.omega0
    omega = w0 + 28.0 * w0**3 * e**4 / (3.0 * m**2 * c**6)
    gamma = 2.0 * w0**2 * e**2 / (3.0 * m * c**3)
    return omega, gamma


def leading_order_resonances(params):
    """Leading small-charge behaviour of the exact roots of q.

    gamma_e ~ e^2 omega0^2 / (3 m c^3) and omega_e - omega0 ~ -(5/18) omega0^3 e^4/(m^2 c^6).
    """
    e, m, c, w0 = params.e, params.m, params.c, params.omega0
    gamma = e**2 * w0**2 / (3.0 * m * c**3)
    omega = w0 - (5.0 / 18.0) * w0**3 * e**4 / (m**2 * c**6)
    return omega, gamma


@dataclass(frozen=True)
class SpectralData:
    lambda_e: float
    z_plus: complex
    z_minus: complex
    omega_e: float
    gamma_e: float
    kappa0: float
    kappa1: float
    kappa2: float
    kappa: float
    kappa_published: float
    degenerate: bool = False

    @property
    def eigen_weight(self):
        """kappa0/kappa^2: weight of (0, zeta) on the runaway eigenvector."""
        return self.kappa0 / self.kappa**2

    @property
    def ac_weight(self):
        """Normalized weight of (0, zeta) on the absolutely continuous subspace."""
        return 1.0 - self.eigen_weight

    @property
    def survival_prefactor(self):
        """2 kappa0 kappa2 / (3 kappa^2), the factor multiplying I(t) in S(t)."""
        return 2.0 * self.kappa0 * self.kappa2 / (3.0 * self.kappa**2)


def derived_constants(params, lambda_e):
    """Populate the normalization constants for the solved runaway root.

    kappa comes from normalizing the runaway eigenvector,
    kappa^2 = kappa1^2 (2/3) / (8 pi c^3 lambda_e) + kappa0;
    the published closed form is kept alongside for comparison.
    """
    m, c, w0, e = params.m, params.c, params.omega0, params.e
    zp, zm, degenerate = solve_resonances(params, lambda_e)
    kappa0 = 4.0 * math.pi * c**2 / (m * w0**2)
    if math.isinf(lambda_e):
        inf = math.inf
        return SpectralData(inf, zp, zm, zp.real, 0.0 - zp.imag, kappa0, inf, inf, inf, inf, degenerate)
    kappa1 = (e / c) * lambda_e**2 * kappa0
    kappa2 = 4.0 * math.pi * e**2 * lambda_e**2 / (m**2 * w0**4 * c)
    kappa_sq = kappa1**2 * (2.0 / 3.0) / (8.0 * math.pi * c**3 * lambda_e) + kappa0
    kappa_pub = math.sqrt(2.0 * math.pi * e**2 * lambda_e**3 / (m**2 * w0**4 * c) + kappa0)
    return SpectralData(
        lambda_e=lambda_e,
        z_plus=zp,
        z_minus=zm,
        omega_e=zp.real,
        gamma_e=-zp.imag,
        kappa0=kappa0,
        kappa1=kappa1,
        kappa2=kappa2,
        kappa=math.sqrt(kappa_sq),
        kappa_published=kappa_pub,
        degenerate=degenerate,
    )


def spectrum(params):
    """Solve lambda_e and return the full SpectralData."""
    return derived_constants(params, solve_lambda_e(params))


def discrepancy_report(params, spectral=None):
    """Exact versus published expansion values of omega_e and gamma_e."""
    sp = spectral if spectral is not None else spectrum(params)
    w_pub, g_pub = perturbative_resonances(params)
    w_lo, g_lo = leading_order_resonances(params)
    return {
        "omega_e": sp.omega_e,
        "gamma_e": sp.gamma_e,
        "omega_e_published": w_pub,
        "gamma_e_published": g_pub,
        "omega_e_leading": w_lo,
        "gamma_e_leading": g_lo,
        "gamma_ratio_published_over_exact": g_pub / sp.gamma_e if sp.gamma_e > 0 else None,
        "shift_exact": sp.omega_e - params.omega0,
        "shift_published": w_pub - params.omega0,
    }


def check_bare_mass(params, r):
    """Bare mass at radius r, raising at the critical radius."""
    bare, _ = renormalized_mass_split(params, r)
    if abs(bare) < 1e-14 * params.m:
        raise SingularConfigurationError(f"bare mass vanishes at r = {r!r}")
    return bare
