"""Complex-analytic ingredients of the point-limit resolvent.

Public functions taking a ``BranchedPoint`` validate their input and guard
poles and cuts. The lower-case helpers working on raw complex arrays
(``coupling``, ``q``, ``chi_parts``, ...) are what the amplitude and
quadrature layers call in their inner loops.

All matrix elements are scalar factors; the polarization geometry
(zeta1* . zeta2 or k . (zeta1* x zeta2)) is applied by the caller.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import CutError, DomainError, PoleError, SingularConfigurationError
from .model import renormalized_mass_split

UPPER = "upper"
LOWER = "lower"

POLE_HARD = 1e-13
POLE_WARN = 1e-8
CUT_GUARD = 1e-6


@dataclass(frozen=True)
class BranchedPoint:
    """A spectral parameter z together with the half-plane branch it lives on.

    ``boundary=True`` marks a real z read as the limit from the branch side
    (lam + i0 for the upper branch, lam - i0 for the lower one).
    ``continued=True`` allows z on the far side, i.e. the analytic
    continuation of the branch formula.
    """

    z: complex
    branch: str = UPPER
    boundary: bool = False
    continued: bool = False

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        if self.branch not in (UPPER, LOWER):
            raise DomainError(f"branch must be 'upper' or 'lower', got {self.branch!r}")
        im = self.z.imag
        if self.boundary:
            if im != 0.0:
                raise DomainError("boundary values must sit on the real axis")
        elif not self.continued and (im == 0.0 or (im > 0) != (self.branch == UPPER)):
            raise DomainError(f"Im z = {im!r} does not match the {self.branch} branch")

    @classmethod
    def boundary_value(cls, lam, side=+1):
        """lam_+ (side=+1) or lam_- (side=-1)."""
        return cls(complex(float(lam)), UPPER if side > 0 else LOWER, boundary=True)

    @classmethod
    def on(cls, z):
        """Point with the branch chosen from the sign of Im z."""
        z = complex(z)
        return cls(z, UPPER if z.imag > 0 else LOWER)

    @property
    def sign(self):
        return 1 if self.branch == UPPER else -1

    @property
    def upper_argument(self):
        """The argument w = sign*z at which the upper-branch formulas are evaluated."""
        return self.sign * self.z

    def reflected(self):
        """conj(z) on the opposite branch."""
        other = LOWER if self.branch == UPPER else UPPER
        return BranchedPoint(self.z.conjugate(), other, self.boundary, self.continued)


@dataclass(frozen=True)
class PhotonSpec:
    """Photon frequency, regularization, propagation direction and polarization."""

    nu: float
    eps: float
    k: tuple = (0.0, 0.0, 1.0)
    zeta: tuple = (1.0, 0.0, 0.0)
    _k: np.ndarray = field(init=False, repr=False, compare=False)
    _zeta: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.nu) and self.nu > 0):
            raise DomainError(f"photon frequency must be positive, got {self.nu!r}")
        if not (math.isfinite(self.eps) and self.eps >= 0):
            raise DomainError(f"regularization must be non-negative, got {self.eps!r}")
        k = np.asarray(self.k, dtype=float)
        zeta = np.asarray(self.zeta, dtype=complex)
        if k.shape != (3,) or zeta.shape != (3,):
            raise DomainError("k and zeta must be 3-vectors")
        if abs(np.linalg.norm(k) - 1.0) > 1e-12:
            raise DomainError("propagation direction k must be a unit vector")
        object.__setattr__(self, "_k", k)
        object.__setattr__(self, "_zeta", zeta)

    @property
    def kvec(self):
        return self._k.copy()

    @property
    def zvec(self):
        return self._zeta.copy()

    def with_eps(self, eps):
        return PhotonSpec(self.nu, eps, tuple(self._k), tuple(self._zeta))

    def norm_squared(self, c=1.0):
        """||phi^eps||^2 = (pi c^3/eps^3)(|k x zeta|^2 + (2/3)(eps/nu)^2 |zeta|^2)."""
        if self.eps == 0:
            return math.inf
        kz = np.cross(self._k, self._zeta)
        trans = float(np.vdot(kz, kz).real)
        full = float(np.vdot(self._zeta, self._zeta).real)
        return math.pi * c**3 / self.eps**3 * (trans + (2.0 / 3.0) * (self.eps / self.nu) ** 2 * full)


class ChiValue(NamedTuple):
    rational: complex
    logarithmic: complex
    total: complex


# raw analytic pieces -------------------------------------------------------


def inverse_coupling(z, params, sign=1):
    """Lambda_pm(z)^{-1} = +-i tau z^3 - m (omega0^2 - z^2)."""
    z = np.asarray(z, dtype=complex)
    return sign * 1j * params.tau * z**3 - params.m * (params.omega0**2 - z**2)


def coupling(z, params, sign=1):
    return 1.0 / inverse_coupling(z, params, sign)


def p(z, params, lambda_e):
    """p(z) = (tau lambda_e/2) z + i (m/lambda_e)(omega0^2 + lambda_e^2/2)."""
    z = np.asarray(z, dtype=complex)
    lam = lambda_e
    return 0.5 * params.tau * lam * z + 1j * (params.m / lam) * (params.omega0**2 + 0.5 * lam**2)


def q(z, params, lambda_e):
    """q(z) = tau z^2 + i (m omega0^2/lambda_e^2)(z + i lambda_e)."""
    z = np.asarray(z, dtype=complex)
    kp = params.alpha / lambda_e**2
    return params.tau * z**2 + 1j * kp * (z + 1j * lambda_e)


def q_prime(z, params, lambda_e):
    z = np.asarray(z, dtype=complex)
    return 2.0 * params.tau * z + 1j * params.alpha / lambda_e**2


def char_polys(z, params, lambda_e):
    """(p(z), q(z)) at a complex z."""
    return complex(p(z, params, lambda_e)), complex(q(z, params, lambda_e))


def _scale(z, params):
    az = abs(z)
    return params.tau * az**3 + params.m * (params.omega0**2 + az**2)


def _nearest(z, roots):
    roots = list(roots)
    return min(roots, key=lambda r: abs(r - z))


def _coupling_roots(spectral, sign):
    roots = (1j * spectral.lambda_e, spectral.z_plus, spectral.z_minus)
    return tuple(sign * r for r in roots)


def lambda_pm(point, params, spectral):
    """Lambda_pm(z) = 1/(+-i tau z^3 - m(omega0^2 - z^2)) on the point's branch."""
    inv = complex(inverse_coupling(point.z, params, point.sign))
    rel = abs(inv) / _scale(point.z, params)
    if rel < POLE_HARD:
        root = _nearest(point.z, _coupling_roots(spectral, point.sign))
        raise PoleError(f"Lambda has a pole at z = {root}", nearest_root=root)
    if rel < POLE_WARN:
        warnings.warn(f"z = {point.z} is within {rel:.1e} of a pole of Lambda", RuntimeWarning, stacklevel=2)
    return 1.0 / inv


def green_overlap(point, spectral, params):
    """<G^-+_{z*}, G_{lambda_e}> = 1/(4 pi c^3 (lambda_e -+ i z))."""
    den = spectral.lambda_e - point.sign * 1j * point.z
    if abs(den) <= POLE_HARD * max(spectral.lambda_e, abs(point.z)):
        root = -1j * point.sign * spectral.lambda_e
        raise PoleError(f"Green overlap pole at z = {root}", nearest_root=root)
    return 1.0 / (4.0 * math.pi * params.c**3 * den)


# bound-state element --------------------------------------------------------


def bound_unprojected(w, spectral, params):
    """Upper-branch <(0,zeta),(L - w^2)^{-1}(0,zeta)> before projection.

    -kappa0 Lambda_+(w)(m + i tau w), built from the raw coupling cubic.
    """
    w = np.asarray(w, dtype=complex)
    return -spectral.kappa0 * (params.m + 1j * params.tau * w) / inverse_coupling(w, params, 1)


def eigen_term(w, spectral):
    """kappa0^2/(kappa^2 (w^2 + lambda_e^2)), the runaway projection term."""
    w = np.asarray(w, dtype=complex)
    return spectral.kappa0**2 / spectral.kappa**2 / (w**2 + spectral.lambda_e**2)


def bound_reduced(w, spectral, params):
    """f(w) = p(w)/((w + i lambda_e) q(w))."""
    w = np.asarray(w, dtype=complex)
    lam = spectral.lambda_e
    return p(w, params, lam) / ((w + 1j * lam) * q(w, params, lam))


def _check_point(point, spectral, params, allow_iy=True):
    w = point.upper_argument
    lam = spectral.lambda_e
    if abs(w - 1j * lam) < POLE_HARD * lam * 1e3:
        raise PoleError("projected element evaluated at the eigenvalue point", nearest_root=point.sign * 1j * lam)
    if abs(w + 1j * lam) < POLE_HARD * lam * 1e3:
        raise PoleError("element pole at w = -i lambda_e", nearest_root=-point.sign * 1j * lam)
    return w


def bound_bound_resolvent(point, spectral, params):
    """Projected bound element from the coupling cubic (no use of p or q).

    Equals the unprojected element plus the runaway projection term.
    """
    w = _check_point(point, spectral, params)
    inv = complex(inverse_coupling(w, params, 1))
    if abs(inv) / _scale(w, params) < POLE_HARD:
        root = _nearest(point.z, _coupling_roots(spectral, point.sign))
        raise PoleError("bound element at a pole of Lambda", nearest_root=root)
    return complex(bound_unprojected(w, spectral, params) + eigen_term(w, spectral))


def bound_bound_element(point, spectral, params):
    """Projected bound element in factored form.

    -(2 kappa0 kappa2/(3 kappa^2)) p(w)/((w + i lambda_e) q(w)) with w = +-z
    on the upper/lower branch. Agrees with ``bound_bound_resolvent``.
    """
    w = _check_point(point, spectral, params)
    qq = complex(q(w, params, spectral.lambda_e))
    if abs(qq) < POLE_HARD * _scale(w, params) / max(abs(w) + spectral.lambda_e, 1.0):
        root = _nearest(w, (spectral.z_plus, spectral.z_minus))
        raise PoleError("bound element at a resonance pole", nearest_root=point.sign * root)
    return complex(-spectral.survival_prefactor * bound_reduced(w, spectral, params))


def bound_jump(lam, spectral, params):
    """Element(lam_+) - element(lam_-) on the real axis, via the coupling cubic.

    Vectorized; the projection term is even and drops out.
    """
    lam = np.asarray(lam, dtype=float)
    return bound_unprojected(lam, spectral, params) - bound_unprojected(-lam, spectral, params)


# photon overlap ----------------------------------------------------------------


def chi_parts(w, nu, eps):
    """Rational and logarithmic parts of chi at the upper-branch argument w.

    With zeta = w + i eps:
        chi_r = (1 - i eps zeta/nu^2)/(nu^2 - zeta^2)
        chi_l = -(eps/nu^3)(i/2)(log(zeta + nu) - log(nu - zeta) - i pi)
    The cuts sit at zeta real, |zeta| >= nu, i.e. w = +-nu + u - i eps.
    """
    w = np.asarray(w, dtype=complex)
    zeta = w + 1j * eps
    rat = (1.0 - 1j * eps * zeta / nu**2) / (nu**2 - zeta**2)
    if eps == 0:
        return rat, np.zeros_like(rat)
    logp = np.log(zeta + nu) - np.log(nu - zeta) - 1j * np.pi
    return rat, -(eps / nu**3) * 0.5j * logp


def chi(w, nu, eps):
    r, l = chi_parts(w, nu, eps)
    return r + l


def cut_distance(w, nu, eps):
    """Distance of the upper-branch argument w from the cut (or the poles at eps=0)."""
    zeta = complex(w) + 1j * eps
    x, y = abs(zeta.real), abs(zeta.imag)
    if eps == 0:
        return abs(x - nu) if y == 0 else math.hypot(x - nu, y)
    return y if x >= nu else math.hypot(nu - x, y)


def chi_eps(point, photon):
    """chi^eps(+-z) split into rational and logarithmic parts."""
    w = point.upper_argument
    dist = cut_distance(w, photon.nu, photon.eps)
    if dist < CUT_GUARD * photon.nu:
        if photon.eps == 0:
            raise PoleError("chi evaluated at a photon pole", nearest_root=point.sign * math.copysign(photon.nu, w.real))
        raise CutError(f"chi evaluated {dist:.2e} from its logarithmic cut", distance=dist)
    r, l = chi_parts(w, photon.nu, photon.eps)
    r, l = complex(r), complex(l)
    return ChiValue(r, l, r + l)


def photon_green(w, spectral, params):
    """G(w) = i 4 pi e c/((w - i lambda_e) q(w)) = -4 pi e c Lambda_+(w)."""
    w = np.asarray(w, dtype=complex)
    return -4.0 * math.pi * params.e * params.c / inverse_coupling(w, params, 1)


def photon_unprojected(w, spectral, params, photon):
    """Upper-branch photon-bound element before projection: G(w) chi(w)."""
    return photon_green(w, spectral, params) * chi(w, photon.nu, photon.eps)


def photon_eigen_term(w, spectral, photon):
    """kappa0 kappa1 chi(i lambda_e)/(kappa^2 (w^2 + lambda_e^2))."""
    w = np.asarray(w, dtype=complex)
    lam = spectral.lambda_e
    chi_l = chi(1j * lam, photon.nu, photon.eps)
    return spectral.kappa0 * spectral.kappa1 * chi_l / spectral.kappa**2 / (w**2 + lam**2)


def photon_bound_element(point, spectral, photon, params):
    """Projected photon-bound element <(phi^eps,0),(L - z^2)^{-1}(0,zeta)^+>, scalar part."""
    w = _check_point(point, spectral, params)
    chi_eps(point, photon)
    inv = complex(inverse_coupling(w, params, 1))
    if abs(inv) / _scale(w, params) < POLE_HARD:
        root = _nearest(point.z, _coupling_roots(spectral, point.sign))
        raise PoleError("photon element at a pole of Lambda", nearest_root=root)
    return complex(photon_unprojected(w, spectral, params, photon) - photon_eigen_term(w, spectral, photon))


def photon_jump(lam, spectral, params, photon):
    """Photon element(lam_+) - element(lam_-), vectorized."""
    lam = np.asarray(lam, dtype=float)
    return photon_unprojected(lam, spectral, params, photon) - photon_unprojected(-lam, spectral, params, photon)


def published_jump_kernel(lam, spectral, photon, params):
    """g(lam) = ((2 lam + i lambda_e)/(lam + i lambda_e)) chi(lam)/q(lam), as printed.

    Reference only: g(lam) - g(-lam) is not proportional to the exact jump.
    """
    lam = np.asarray(lam, dtype=complex)
    le = spectral.lambda_e
    return (2 * lam + 1j * le) / (lam + 1j * le) * chi(lam, photon.nu, photon.eps) / q(lam, params, le)


# regularized (finite radius) family ------------------------------------------


class RegularizedCoeffs(NamedTuple):
    k1r: complex
    k2r: complex
    lambda_r: complex
    green_bracket: complex
    bare_mass: float


def shell_bracket(z, r, c=1.0, sign=1):
    """<(-c^2 Laplacian - z^2)^{-1} rho_r, rho_r> for the uniform shell.

    sin(kr) e^{ikr}/(4 pi c^2 k r^2), k = +-z/c, which is 1/(4 pi c^2 r) at z = 0.
    """
    if not r > 0:
        raise DomainError(f"shell radius must be positive, got {r!r}")
    x = sign * complex(z) / c * r
    if abs(x) < 1e-4:
        g = 1.0 + 1j * x - (2.0 / 3.0) * x**2 - (1j / 3.0) * x**3
    else:
        g = np.sin(x) * np.exp(1j * x) / x
    return complex(g / (4.0 * math.pi * c**2 * r))


def regularized_coeffs(point, r, params):
    """k1^r, k2^r, Lambda^r and the shell bracket at radius r.

    k1^r = 1 + (8 pi/3)(e^2/m_r) <bracket>, k2^r = -z^2 + alpha/(m_r k1^r),
    Lambda^r = -1/(m_r k1^r k2^r).
    """
    bare, _ = renormalized_mass_split(params, r)
    if abs(bare) < 1e-14 * params.m:
        raise SingularConfigurationError(f"bare mass vanishes at r = {r!r}")
    br = shell_bracket(point.z, r, params.c, point.sign)
    mk1 = bare + (8.0 * math.pi / 3.0) * params.e**2 * br
    k1 = mk1 / bare
    k2 = -point.z**2 + params.alpha / mk1
    lam_r = -1.0 / (mk1 * k2)
    return RegularizedCoeffs(complex(k1), complex(k2), complex(lam_r), br, bare)


def regularized_bound_element(point, r, spectral, params):
    """Finite-radius bound element -kappa0 Lambda^r m_r k1^r (no projection)."""
    co = regularized_coeffs(point, r, params)
    return -spectral.kappa0 * co.lambda_r * co.bare_mass * co.k1r
