"""Survival and photon-emission amplitudes, closed-form fits and Fock amplitudes.

The half-line spectral integral of each amplitude is rotated onto the
imaginary axis. What is left is a short list of residues, one
principal-value Laplace integral (evaluated two independent ways), and,
for regularized photons, one integral along the logarithmic cut.

Positive and negative times use the lower and upper quarter-planes
respectively for the photon amplitude; for the survival amplitude the
identity S(-t) = conj(S(t)) is used.
"""

import math
from dataclasses import dataclass, field
from math import factorial
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize

from . import kernels, resolvent
from .errors import AccuracyError, ConditioningError, DomainError, SizeError
from .special import pv_laplace_pole, scaled_ei

DUAL_PATH_TOL = 1e-7
QUAD_EPSABS = 1e-14
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 400
TAIL_DECAY = 60.0
MAX_PERMANENT = 12


# quadrature helpers -------------------------------------------------------


def _quad_real(f, a, b, **kw):
    val, err, *info = integrate.quad(
        f, a, b, epsabs=kw.get("epsabs", QUAD_EPSABS), epsrel=kw.get("epsrel", QUAD_EPSREL),
        limit=kw.get("limit", QUAD_LIMIT), points=kw.get("points"), full_output=1,
    )
    if len(info) > 1:
        tol = max(kw.get("epsabs", QUAD_EPSABS), kw.get("epsrel", QUAD_EPSREL) * abs(val))
        if not err <= 1e3 * tol:
            raise AccuracyError(f"quadrature on [{a}, {b}] failed: {info[1]}", estimate=err)
    return val, err


def _cquad(f, a, b, **kw):
    """Integrate a complex-valued scalar function with QUADPACK."""
    re, e1 = _quad_real(lambda x: f(x).real, a, b, **kw)
    im, e2 = _quad_real(lambda x: f(x).imag, a, b, **kw)
    return complex(re, im), e1 + e2


def _cquad_log(f, a, b, **kw):
    """Integrate over [a, b] (a > 0) in the variable u = ln s."""
    g = lambda u: f(math.exp(u)) * math.exp(u)
    return _cquad(g, math.log(a), math.log(b), **kw)


def _breakpoints(t, lo, hi, extra=()):
    pts = {c / t for c in (0.5, 2.0, 8.0, 32.0)}
    pts.update(extra)
    return sorted(x for x in pts if lo < x < hi)


def _laplace_halfline(f, t, lam, singular=False):
    """int_0^inf e^{-st} f(s) ds for f decaying at most like 1/s.

    The integrand is the caller's f including the exponential. The range
    [0, 2 lam] is split at lam and at a few multiples of 1/t; beyond 2 lam
    the integral is taken in ln s up to where e^{-st} < e^{-60}.
    """
    pts = _breakpoints(t, 0.0, 2.0 * lam, extra=(lam,))
    edges = [0.0] + pts + [2.0 * lam]
    total, err = 0.0j, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, e = _cquad(f, a, b)
        total += v
        err += e
    smax = 2.0 * lam + TAIL_DECAY / t
    lpts = [math.log(x) for x in _breakpoints(t, 2.0 * lam, smax)]
    v, e = _cquad_log(f, 2.0 * lam, smax, points=lpts or None)
    return total + v, err + e


# survival -------------------------------------------------------------------


@dataclass(frozen=True)
class SurvivalBreakdown:
    t: float
    runaway: complex
    resonance: complex
    j1: complex
    j2: complex
    j2_subtracted: complex
    j2_ei: complex
    total: complex
    S: complex
    S_hat: complex
    error: float

    @property
    def terms(self):
        return {"runaway": self.runaway, "resonance": self.resonance, "j1": self.j1, "j2": self.j2}

    @property
    def j2_gap(self):
        return abs(self.j2 - self.j2_subtracted)

    def conjugate(self):
        c = lambda z: complex(z).conjugate()
        return SurvivalBreakdown(
            -self.t, c(self.runaway), c(self.resonance), c(self.j1), c(self.j2),
            c(self.j2_subtracted), c(self.j2_ei), c(self.total), c(self.S), c(self.S_hat), self.error,
        )


def _R_minus(s, params, lam):
    z = -1j * s
    return complex(resolvent.p(z, params, lam) / resolvent.q(z, params, lam))


def _R_plus(s, params, lam):
    z = 1j * s
    return complex(resolvent.p(z, params, lam) / resolvent.q(z, params, lam))


def _j2_subtraction(s, t, lam, r_lam):
    """Pole-cancelling term 2 e^{-lam t} lam^2 R(lam)/(s^2 - lam^2); its P.V. integral vanishes."""
    return 2.0 * math.exp(-lam * t) * lam**2 * r_lam / (s * s - lam * lam)


def _near(s, lam):
    return abs(s - lam) < 1e-9 * lam


def _j_integrals(t, params, lam):
    Rm = lambda s: _R_minus(s, params, lam)
    Rp = lambda s: _R_plus(s, params, lam)
    r_lam = Rm(lam)

    def f1(s):
        return math.exp(-s * t) * s / (s + lam) * Rp(s)

    j1, e1 = _laplace_halfline(f1, t, lam)
    j1 /= math.pi

    # (b): regular remainder plus the exact principal-value kernel
    def f2b(s):
        if _near(s, lam):
            s = lam * (1 + 1e-9)
        return math.exp(-s * t) * (s * Rm(s) - lam * r_lam) / (s - lam)

    reg, e2 = _laplace_halfline(f2b, t, lam)
    j2_ei = lam * r_lam * pv_laplace_pole(t, lam) / math.pi
    j2 = reg / math.pi + j2_ei

    # (a): subtracted integrand, whose subtraction integrates to zero
    def f2a(s):
        if _near(s, lam):
            return 0.5 * (f2a(lam * (1 - 1e-8)) + f2a(lam * (1 + 1e-8)))
        return math.exp(-s * t) * s * Rm(s) / (s - lam) - _j2_subtraction(s, t, lam, r_lam)

    def f2a_far(s):
        return math.exp(-s * t) * s * Rm(s) / (s - lam)

    pts = _breakpoints(t, 0.0, 2.0 * lam, extra=(lam,))
    edges = [0.0] + pts + [2.0 * lam]
    near = 0.0j
    for a, b in zip(edges[:-1], edges[1:]):
        near += _cquad(f2a, a, b)[0]
    smax = 2.0 * lam + TAIL_DECAY / t
    lpts = [math.log(x) for x in _breakpoints(t, 2.0 * lam, smax)]
    far = _cquad_log(f2a_far, 2.0 * lam, smax, points=lpts or None)[0]
    # the subtraction integrated over [2 lam, inf), done exactly
    sub_tail = math.exp(-lam * t) * lam * r_lam * math.log(3.0)
    j2a = (near + far - sub_tail) / math.pi
    return j1, j2, j2a, j2_ei, (e1 + e2) / math.pi


def survival_terms(t, spectral, params, check=True):
    """Term-by-term survival amplitude at a nonzero time t.

    I(t) = runaway + resonance + J1 + J2, S(t) = (2 kappa0 kappa2/(3 kappa^2)) I(t),
    S_hat = S/kappa0. J2 is computed through the exponential-integral
    decomposition and, independently, through the subtracted integrand;
    with ``check`` set their disagreement beyond 1e-7 raises AccuracyError.
    """
    t = float(t)
    if t == 0.0 or not math.isfinite(t):
        raise DomainError("survival terms need a finite nonzero time")
    if t < 0:
        return survival_terms(-t, spectral, params, check).conjugate()
    lam = spectral.lambda_e
    zp = spectral.z_plus
    p_, q_ = resolvent.p, resolvent.q
    run = -math.exp(-lam * t) * 1j * lam * complex(p_(-1j * lam, params, lam) / q_(-1j * lam, params, lam))
    res = np.exp(-1j * zp * t) * 2 * zp / (zp + 1j * lam) * complex(p_(zp, params, lam) / resolvent.q_prime(zp, params, lam))
    j1, j2, j2a, j2_ei, err = _j_integrals(t, params, lam)
    total = run + res + j1 + j2
    if check:
        scale = max(abs(j2), abs(total), 1e-300)
        gap = abs(j2 - j2a) / scale
        if not gap <= DUAL_PATH_TOL:
            raise AccuracyError(f"J2 evaluation paths disagree by {gap:.2e} at t = {t}", estimate=gap)
    S = spectral.survival_prefactor * total
    return SurvivalBreakdown(
        t, complex(run), complex(res), complex(j1), complex(j2), complex(j2a), complex(j2_ei),
        complex(total), complex(S), complex(S / spectral.kappa0), spectral.survival_prefactor * err,
    )


@dataclass
class AmplitudeSeries:
    """Amplitude samples on a time grid with per-term breakdowns."""

    t: np.ndarray
    values: np.ndarray
    normalized: np.ndarray
    terms: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    rows: list = field(default_factory=list, repr=False)


def _check_grid(t_grid):
    t = np.asarray(t_grid, dtype=float).ravel()
    if t.size == 0:
        raise DomainError("empty time grid")
    if np.any(t == 0) or not np.all(np.isfinite(t)):
        raise DomainError("time grid must be finite and exclude 0")
    if np.any(np.diff(t) <= 0):
        raise DomainError("time grid must be strictly increasing")
    return t


def _map(fn, items, executor=None):
    if executor is None:
        return [fn(x) for x in items]
    return list(executor.map(fn, items))


def survival(t_grid, spectral, params, executor=None, check=True):
    """Survival amplitude over a grid; rows are independent and order-preserving."""
    t = _check_grid(t_grid)
    rows = _map(lambda x: survival_terms(x, spectral, params, check), t, executor)
    S = np.array([r.S for r in rows])
    terms = {k: np.array([r.terms[k] for r in rows]) for k in ("runaway", "resonance", "j1", "j2")}
    terms["I"] = np.array([r.total for r in rows])
    diag = {}
    pos = t > 0
    if np.count_nonzero(pos) >= 3:
        tp, ap = t[pos], np.abs(S[pos])
        tail = slice(-min(5, tp.size), None)
        diag["tail_exponent"] = float(np.polyfit(np.log(tp[tail]), np.log(ap[tail]), 1)[0])
        env = (tp > 3.0 / spectral.lambda_e) & (tp < 3.0 / spectral.gamma_e)
        if np.count_nonzero(env) >= 3:
            diag["envelope_rate"] = float(-np.polyfit(tp[env], np.log(ap[env]), 1)[0])
    return AmplitudeSeries(t, S, S / spectral.kappa0, terms, diag, rows)


class ClosedFormFit(NamedTuple):
    c1: complex
    c2: complex
    c3: complex
    residual: float
    condition: float


def closed_form_basis(t, spectral):
    """Columns e^{-lam t}, e^{-gamma t} e^{-i omega t}, e^{-lam t} Ei(lam t) for t > 0."""
    t = np.asarray(t, dtype=float)
    lam, g, w = spectral.lambda_e, spectral.gamma_e, spectral.omega_e
    return np.column_stack([np.exp(-lam * t), np.exp(-g * t - 1j * w * t), scaled_ei(lam * t)])


def fit_closed_form(series, spectral, two_term=False, max_condition=1e10):
    """Least-squares fit of the three fixed exponent basis functions.

    With ``two_term`` the runaway column is dropped (c1 returned as 0).
    Residual is ||A c - y|| / ||y||.
    """
    t = np.asarray(series.t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("closed-form fit uses positive times only")
    y = np.asarray(series.values, dtype=complex)
    A = closed_form_basis(t, spectral)
    cols = [1, 2] if two_term else [0, 1, 2]
    A = A[:, cols]
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise ConditioningError("basis column vanishes on this grid")
    An = A / norms
    cond = float(np.linalg.cond(An))
    if not cond < max_condition:
        raise ConditioningError(f"closed-form basis is ill-conditioned (cond = {cond:.2e})")
    coef, *_ = np.linalg.lstsq(An, y, rcond=None)
    coef = coef / norms
    resid = float(np.linalg.norm(A @ coef - y) / np.linalg.norm(y))
    full = np.zeros(3, dtype=complex)
    full[cols] = coef
    return ClosedFormFit(complex(full[0]), complex(full[1]), complex(full[2]), resid, cond)


def tail_limit(spectral, params, t_values=None):
    """Richardson estimate of lim t S(t) from large-time samples.

    Assumes t S(t) = L + a/t + b/t^2 over the samples (default after the
    resonance has decayed below 1e-12).
    """
    if t_values is None:
        t0 = max(30.0 / spectral.gamma_e, 100.0 / spectral.lambda_e)
        t_values = (t0, 2 * t0, 4 * t0)
    t_values = np.asarray(t_values, dtype=float)
    ts = np.array([tv * survival_terms(tv, spectral, params).S for tv in t_values])
    V = np.column_stack([np.ones_like(t_values), 1 / t_values, 1 / t_values**2])
    coef = np.linalg.solve(V, ts)
    return complex(coef[0]), ts


# photon emission --------------------------------------------------------------


@dataclass(frozen=True)
class TransitionBreakdown:
    t: float
    eps: float
    runaway: complex
    resonance: complex
    photon_pole: complex
    s_integral_up: complex
    s_integral_down: complex
    s_integral_subtracted: complex
    cut: complex
    total: complex
    normalized: complex
    geometric: complex
    amplitude: complex
    error: float

    @property
    def terms(self):
        return {
            "runaway": self.runaway, "resonance": self.resonance, "photon_pole": self.photon_pole,
            "s_integral_up": self.s_integral_up, "s_integral_down": self.s_integral_down, "cut": self.cut,
        }

    @property
    def s_integral(self):
        return self.s_integral_up + self.s_integral_down

    @property
    def s_gap(self):
        return abs(self.s_integral - self.s_integral_subtracted)


def _green_q(w, params, lam):
    """G(w) = i 4 pi e c/((w - i lam) q(w)), through q."""
    return 4j * math.pi * params.e * params.c / ((w - 1j * lam) * complex(resolvent.q(w, params, lam)))


def geometric_factor(photon, zeta_bound):
    """k . (zeta1* x zeta2) with zeta1 the photon polarization."""
    z2 = np.asarray(zeta_bound, dtype=complex)
    return complex(np.dot(photon.kvec, np.cross(np.conj(photon.zvec), z2)))


def _chi_residue(nu, eps, side):
    # residue of chi_r in w at w = side*nu - i eps
    return -side * (1 - 1j * side * eps / nu) / (2 * nu)


def _cut_integral(t, photon, params, lam):
    """Integral along the logarithmic cut that survives the contour rotation."""
    nu, eps = photon.nu, photon.eps
    if eps == 0:
        return 0.0j, 0.0
    T = abs(t)
    if t > 0:
        # (eps/(i nu^3)) int_nu^inf e^{-it z} z G(z) dx, z = x - i eps
        h = lambda x: (x - 1j * eps) * _green_q(x - 1j * eps, params, lam)
        pref = eps / (1j * nu**3) * math.exp(-eps * T)
    else:
        # (i eps/nu^3) int_nu^inf e^{-it z} z G(-z) dx, z = x + i eps
        h = lambda x: (x + 1j * eps) * _green_q(-(x + 1j * eps), params, lam)
        pref = 1j * eps / nu**3 * math.exp(-eps * T)
    val, err = fourier_halfline(h, nu, t)
    return pref * val, abs(pref) * err


def fourier_halfline(h, a, omega):
    """int_a^inf h(x) e^{-i omega x} dx by QUADPACK's Fourier integrator (QAWF)."""
    out = 0.0j
    err = 0.0
    scale = max(abs(h(a)), abs(h(2 * a)), 1e-300) * max(a, 1.0)
    for part, unit in ((lambda x: h(x).real, 1.0), (lambda x: h(x).imag, 1j)):
        c, ec = _qawf(part, a, abs(omega), "cos", scale)
        s, es = _qawf(part, a, abs(omega), "sin", scale)
        s *= math.copysign(1.0, omega)
        out += unit * (c - 1j * s)
        err += ec + es
    return out, err


def _qawf(f, a, w, kind, scale=1.0):
    tol = 1e-13 * scale
    val, err, *info = integrate.quad(f, a, np.inf, weight=kind, wvar=w, limlst=200, epsabs=tol, full_output=1)
    if len(info) > 1 and not err < 1e3 * tol:
        raise AccuracyError(f"oscillatory cut quadrature failed: {info[1]}", estimate=err)
    return val, err


def _axis_integrals(T, photon, params, lam):
    """The imaginary-axis terms for |t| = T, as for t > 0.

    Returns (up, down, subtracted) with up + down the principal value
    (i/pi) PV int_0^inf e^{-Ty} y (F(-iy) - F(iy)) dy through the
    exponential-integral split, and ``subtracted`` the same value from the
    pole-subtracted integrand.
    """
    nu, eps = photon.nu, photon.eps
    four = 4.0 * math.pi * params.e * params.c
    chi = lambda w: complex(resolvent.chi(w, nu, eps))
    q_ = lambda w: complex(resolvent.q(w, params, lam))

    def F(w):
        return _green_q(w, params, lam) * chi(w)

    K = lambda y: four * y * chi(1j * y) / q_(1j * y)
    K_lam = K(lam)

    def f_down(y):
        return math.exp(-T * y) * y * F(-1j * y)

    def f_up_reg(y):
        if _near(y, lam):
            y = lam * (1 + 1e-9)
        return math.exp(-T * y) * (K(y) - K_lam) / (y - lam)

    down, e1 = _laplace_halfline(f_down, T, lam)
    reg, e2 = _laplace_halfline(f_up_reg, T, lam)
    up_int = reg + K_lam * pv_laplace_pole(T, lam)
    down = 1j / math.pi * down
    up = -1j / math.pi * up_int

    a = -math.exp(-lam * T) * K_lam

    def f_sub(y):
        if _near(y, lam):
            return 0.5 * (f_sub(lam * (1 - 1e-8)) + f_sub(lam * (1 + 1e-8)))
        return math.exp(-T * y) * y * (F(-1j * y) - F(1j * y)) - a / (y - lam)

    def f_far(y):
        return math.exp(-T * y) * y * (F(-1j * y) - F(1j * y))

    pts = _breakpoints(T, 0.0, 2.0 * lam, extra=(lam,))
    edges = [0.0] + pts + [2.0 * lam]
    near = sum(_cquad(f_sub, x0, x1)[0] for x0, x1 in zip(edges[:-1], edges[1:]))
    smax = 2.0 * lam + TAIL_DECAY / T
    lpts = [math.log(x) for x in _breakpoints(T, 2.0 * lam, smax)]
    far = _cquad_log(f_far, 2.0 * lam, smax, points=lpts or None)[0]
    sub = 1j / math.pi * (near + far)
    return up, down, sub, (e1 + e2) / math.pi


def transition_eps(t, photon, spectral, params, zeta_bound=None, check=True):
    """Photon-emission amplitude <(phi^eps, 0), e^{-it sqrt(L+)} (0, zeta)> at t != 0.

    ``total`` is the scalar amplitude A(t); ``normalized`` divides by the
    state norms ||phi^eps|| sqrt(kappa0) (undefined, NaN, at eps = 0);
    ``amplitude`` multiplies A by k . (zeta1* x zeta2) when a bound
    polarization is given (1 otherwise).
    """
    t = float(t)
    if t == 0.0 or not math.isfinite(t):
        raise DomainError("transition amplitude needs a finite nonzero time")
    lam = spectral.lambda_e
    nu, eps = photon.nu, photon.eps
    zp, zm = spectral.z_plus, spectral.z_minus
    four = 4.0 * math.pi * params.e * params.c
    chi = lambda w: complex(resolvent.chi(w, nu, eps))
    qp = lambda w: complex(resolvent.q_prime(w, params, lam))
    q_ = lambda w: complex(resolvent.q(w, params, lam))
    T = abs(t)
    if t > 0:
        res_g = 1j * four / ((zp - 1j * lam) * qp(zp))
        resonance = -2 * np.exp(-1j * t * zp) * zp * res_g * chi(zp)
        wp = nu - 1j * eps
        photon_pole = -2 * np.exp(-1j * t * wp) * wp * _green_q(wp, params, lam) * _chi_residue(nu, eps, +1)
        runaway = -math.exp(-lam * T) * (-1j * lam) * (1j * four * chi(1j * lam) / q_(1j * lam))
        up, down, sub, err = _axis_integrals(T, photon, params, lam)
    else:
        a = -zm
        res_g = 1j * four / ((zm - 1j * lam) * qp(zm))
        resonance = 2 * np.exp(-1j * t * a) * a * res_g * chi(zm)
        a = nu + 1j * eps
        photon_pole = 2 * np.exp(-1j * t * a) * a * _green_q(-a, params, lam) * _chi_residue(nu, eps, -1)
        runaway = math.exp(-lam * T) * (1j * lam) * (1j * four * chi(1j * lam) / q_(1j * lam))
        up, down, sub, err = _axis_integrals(T, photon, params, lam)
        up, down, sub = -up, -down, -sub
    cut, ecut = _cut_integral(t, photon, params, lam)
    if check:
        scale = max(abs(up + down), abs(runaway + resonance + photon_pole), 1e-300)
        gap = abs(up + down - sub) / scale
        if not gap <= DUAL_PATH_TOL:
            raise AccuracyError(f"axis-integral paths disagree by {gap:.2e} at t = {t}", estimate=gap)
    total = complex(runaway + resonance + photon_pole + up + down + cut)
    nrm = photon.norm_squared(params.c)
    normalized = total / math.sqrt(nrm * spectral.kappa0) if math.isfinite(nrm) else complex("nan")
    geo = 1.0 + 0j if zeta_bound is None else geometric_factor(photon, zeta_bound)
    return TransitionBreakdown(
        t, eps, complex(runaway), complex(resonance), complex(photon_pole), complex(up), complex(down),
        complex(sub), complex(cut), total, complex(normalized), geo, total * geo, err + ecut,
    )


class TransitionConstants(NamedTuple):
    C1: complex
    C2: complex
    C3: complex


def transition_constants(photon, spectral, params):
    """Coefficients of e^{-lam t}, e^{-gamma t}e^{-i omega t} and e^{-i nu t} at eps = 0, t > 0."""
    lam, nu = spectral.lambda_e, photon.nu
    zp = spectral.z_plus
    four = 4.0 * math.pi * params.e * params.c
    chi0 = lambda w: 1.0 / (nu**2 - w**2)
    qq = complex(resolvent.q(1j * lam, params, lam))
    C1 = -four * lam * chi0(1j * lam) / qq
    res_g = 1j * four / ((zp - 1j * lam) * complex(resolvent.q_prime(zp, params, lam)))
    C2 = -2 * zp * res_g * chi0(zp)
    C3 = _green_q(nu, params, lam)
    return TransitionConstants(complex(C1), complex(C2), complex(C3))


def transition_limit(t_grid, photon, spectral, params, executor=None, zeta_bound=None):
    """The eps = 0 amplitude over a grid with its C1, C2, C3 and remainder R(t)."""
    t = _check_grid(t_grid)
    ph = photon if photon.eps == 0 else photon.with_eps(0.0)
    rows = _map(lambda x: transition_eps(x, ph, spectral, params, zeta_bound), t, executor)
    A = np.array([r.total for r in rows])
    C = transition_constants(ph, spectral, params)
    terms = {k: np.array([r.terms[k] for r in rows]) for k in rows[0].terms}
    terms["R"] = terms["s_integral_up"] + terms["s_integral_down"]
    diag = {"C1": C.C1, "C2": C.C2, "C3": C.C3}
    return AmplitudeSeries(t, A, np.full(A.shape, np.nan + 0j), terms, diag, rows)


def richardson_eps(t, photon, spectral, params, eps_values):
    """Extrapolate A^eps(t) to eps = 0 by a polynomial fit in eps through the ladder."""
    eps_values = np.asarray(eps_values, dtype=float)
    vals = np.array([transition_eps(t, photon.with_eps(e), spectral, params).total for e in eps_values])
    V = np.vander(eps_values, len(eps_values), increasing=True)
    coef = np.linalg.solve(V, vals)
    return complex(coef[0]), vals


def line_shape(nus, spectral, params):
    """|C3|(nu), the emission-line profile of the photon-pole coefficient."""
    nus = np.asarray(nus, dtype=float)
    return np.abs([_green_q(float(n), params, spectral.lambda_e) for n in nus])


class BreitWignerFit(NamedTuple):
    center: float
    half_width: float
    height: float
    residual: float


def fit_breit_wigner(nus, values, window=None):
    """Fit values ~ h g / sqrt((nu - nu0)^2 + g^2) near the maximum.

    ``window`` limits the residual (max relative deviation) to |nu - nu0| <= window.
    """
    nus = np.asarray(nus, dtype=float)
    values = np.asarray(values, dtype=float)
    i = int(np.argmax(values))
    half = values[i] / math.sqrt(2.0)
    above = nus[values >= half]
    g0 = max(0.5 * (above.max() - above.min()), np.min(np.diff(nus)))
    model = lambda x, c, g, h: h * abs(g) / np.sqrt((x - c) ** 2 + g**2)
    popt, _ = optimize.curve_fit(model, nus, values, p0=(nus[i], g0, values[i]), maxfev=20000)
    c, g, h = popt
    g = abs(g)
    w = 3 * g if window is None else window
    sel = np.abs(nus - c) <= w
    if not np.any(sel):
        sel = slice(None)
    resid = float(np.max(np.abs(model(nus[sel], c, g, h) - values[sel]) / values[sel]))
    return BreitWignerFit(float(c), float(g), float(h), resid)


# many-particle amplitudes ----------------------------------------------------------


def permanent(matrix):
    """Permanent of a square complex matrix, n <= 12, by Ryser's formula."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("permanent needs a square matrix")
    if a.shape[0] > MAX_PERMANENT:
        raise SizeError(f"permanent limited to n <= {MAX_PERMANENT}, got {a.shape[0]}")
    return complex(kernels.permanent(a))


class FockAmplitude(NamedTuple):
    value: complex
    normalized: complex
    sector_mismatch: bool


def fock_amplitude(initial, final, t, spectral, params):
    """Amplitude between symmetrized many-quantum states.

    ``initial`` lists bound polarizations (3-vectors). ``final`` lists
    entries ``("level", zeta)`` or ``("photon", PhotonSpec)``. One-particle
    entries are S_hat(t) zeta_i* . zeta_j and A_hat(t) k . (zeta_i* x zeta_j);
    ``value`` is perm(M)/n!, ``normalized`` divides by the norms of the
    two symmetrized product states. A particle-number mismatch gives exact
    zeros with ``sector_mismatch`` set.
    """
    init = [np.asarray(z, dtype=complex) for z in initial]
    if len(init) != len(final):
        return FockAmplitude(0j, 0j, True)
    n = len(init)
    if n == 0:
        return FockAmplitude(1 + 0j, 1 + 0j, False)
    if n > MAX_PERMANENT:
        raise SizeError(f"at most {MAX_PERMANENT} quanta supported")
    s_hat = None
    M = np.zeros((n, n), dtype=complex)
    gram_f = np.zeros((n, n), dtype=complex)
    finals = []
    for kind, obj in final:
        if kind == "level":
            finals.append(("level", np.asarray(obj, dtype=complex)))
        elif kind == "photon":
            finals.append(("photon", obj))
        else:
            raise DomainError(f"unknown final-state kind {kind!r}")
    for i, (kind, obj) in enumerate(finals):
        if kind == "level":
            if s_hat is None:
                s_hat = survival_terms(t, spectral, params).S_hat
            for j, zj in enumerate(init):
                M[i, j] = s_hat * np.vdot(obj, zj)
        else:
            a_hat = transition_eps(t, obj, spectral, params).normalized
            for j, zj in enumerate(init):
                M[i, j] = a_hat * geometric_factor(obj, zj)
        for j, (kj, oj) in enumerate(finals):
            if kind != kj:
                continue
            if kind == "level":
                gram_f[i, j] = np.vdot(obj, oj)
            elif obj == oj:
                gram_f[i, j] = 1.0
    gram_i = np.array([[np.vdot(a, b) for b in init] for a in init])
    perm = permanent(M)
    norm = math.sqrt(abs(permanent(gram_i) * permanent(gram_f)))
    return FockAmplitude(perm / factorial(n), perm / norm if norm > 0 else complex("nan"), False)
