"""Independent numerical verifiers for the closed forms.

Nothing here uses the factored polynomials p and q or any residue
formula. The Stone-formula integrals are taken over the jump of the raw
resolvent elements with an adaptive Filon rule. The overlaps are
integrated in their radial form, and the permanent is also computed by
enumerating permutations.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from . import amplitudes, kernels, resolvent
from .errors import AccuracyError, DomainError

MAX_PANELS = 400_000
ASYMPTOTIC_SWITCH = 30.0


@dataclass
class QuadratureReport:
    """Value with its error estimate; ``converged`` False marks it unreliable."""

    value: complex
    error: float
    subdivisions: int
    truncation: float
    converged: bool
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.error = float(abs(self.error))

    @property
    def reliable(self):
        return self.converged

    def gap(self, other):
        """Relative difference to a reference value."""
        return abs(self.value - other) / max(abs(other), 1e-300)


# generalized exponential integral E_n(z) for Re z >= 0, z != 0 ---------------


def expn_complex(n, z):
    """E_n(z) = int_1^inf e^{-zx} x^{-n} dx for integer n >= 1, Re z >= 0."""
    z = complex(z)
    if z == 0:
        if n < 2:
            raise DomainError("E_1 diverges at 0")
        return 1.0 / (n - 1)
    if abs(z) <= ASYMPTOTIC_SWITCH:
        e = complex(special.exp1(z))
        ez = np.exp(-z)
        for k in range(1, n):
            e = (ez - z * e) / k
        return e
    total, term = 1.0 + 0j, 1.0 + 0j
    for k in range(1, 200):
        nxt = -term * (n + k - 1) / z
        if abs(nxt) > abs(term):
            break
        term = nxt
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return np.exp(-z) / z * total


# adaptive Filon mesh ---------------------------------------------------------------


@dataclass
class _Mesh:
    left: np.ndarray
    right: np.ndarray
    fl: np.ndarray
    fm: np.ndarray
    fr: np.ndarray
    f1: np.ndarray
    f3: np.ndarray
    converged: bool

    @property
    def size(self):
        return self.left.size


def adaptive_mesh(g, a, b, hmax, rtol=1e-8, max_panels=MAX_PANELS):
    """Panels on [a, b] on which g is quadratic to within rtol * int|g|.

    Each panel keeps its end, mid and quarter-point samples; the quarter
    points test the quadratic through (left, mid, right) and give the
    once-refined rule for free.
    """
    n0 = max(8, int(math.ceil((b - a) / hmax)))
    e = np.linspace(a, b, n0 + 1)
    L, R = e[:-1], e[1:]
    M = 0.5 * (L + R)
    vals = g(e)
    fL, fR, fM = vals[:-1], vals[1:], g(M)
    hmin = 1e-13 * max(abs(a), abs(b), 1.0)
    keep = []
    kept_mass = 0.0
    converged = True
    total = L.size
    while L.size:
        h = R - L
        f1, f3 = g(L + 0.25 * h), g(L + 0.75 * h)
        # running estimate of int |g|, sharpened as peaks get resolved
        mass = h * (np.abs(fL) + 2 * np.abs(f1) + 2 * np.abs(f3) + np.abs(fR)) / 6.0
        scale = kept_mass + float(np.sum(mass)) or 1.0
        density = rtol * scale / (b - a)
        B = 0.5 * (fR - fL)
        C = 0.5 * (fL + fR) - fM
        err = h * np.maximum(np.abs(f1 - (fM - 0.5 * B + 0.25 * C)), np.abs(f3 - (fM + 0.5 * B + 0.25 * C)))
        ok = err <= density * h
        tiny = h < hmin
        if np.any(tiny & ~ok):
            converged = False
        ok |= tiny
        keep.append((L[ok], R[ok], fL[ok], fM[ok], fR[ok], f1[ok], f3[ok]))
        kept_mass += float(np.sum(mass[ok]))
        bad = ~ok
        nb = int(np.count_nonzero(bad))
        if nb == 0:
            break
        if total + nb > max_panels:
            converged = False
            keep.append((L[bad], R[bad], fL[bad], fM[bad], fR[bad], f1[bad], f3[bad]))
            break
        total += nb
        Mb = M[bad]
        L, R = np.concatenate([L[bad], Mb]), np.concatenate([Mb, R[bad]])
        fL, fR = np.concatenate([fL[bad], fM[bad]]), np.concatenate([fM[bad], fR[bad]])
        fM = np.concatenate([f1[bad], f3[bad]])
        M = 0.5 * (L + R)
    parts = [np.concatenate(x) for x in zip(*keep)]
    order = np.argsort(parts[0])
    return _Mesh(*(p[order] for p in parts), converged=converged)


def filon_sum(mesh, omega, refined=False):
    """int e^{-i omega x} g(x) dx over the mesh with piecewise-quadratic g."""
    L, R = mesh.left, mesh.right
    if not refined:
        return kernels.filon_panels(0.5 * (L + R), 0.5 * (R - L), mesh.fl, mesh.fm, mesh.fr, omega)
    M = 0.5 * (L + R)
    q = 0.25 * (R - L)
    a = kernels.filon_panels(0.5 * (L + M), q, mesh.fl, mesh.f1, mesh.fm, omega)
    b = kernels.filon_panels(0.5 * (M + R), q, mesh.fm, mesh.f3, mesh.fr, omega)
    return a + b


def filon_weights(mesh, omega):
    """Node weights (w_left, w_mid, w_right) of the refined Filon rule, per half-panel.

    Returned as arrays over the nodes (x, values) of the refined mesh so that
    sum(w * f(x)) reproduces ``filon_sum(mesh, omega, refined=True)``.
    """
    from ._kernels_py import _moments

    L, R = mesh.left, mesh.right
    M = 0.5 * (L + R)
    lefts = np.concatenate([L, M])
    rights = np.concatenate([M, R])
    h = 0.5 * (rights - lefts)
    xm = 0.5 * (lefts + rights)
    m0, m1, m2 = _moments(omega * h)
    ph = h * np.exp(-1j * omega * xm)
    # a = fm, b = (fb - fa)/2, c = (fa + fb)/2 - fm
    wa = ph * (-0.5 * m1 + 0.5 * m2)
    wm = ph * (m0 - m2)
    wb = ph * (0.5 * m1 + 0.5 * m2)
    return lefts, xm, rights, wa, wm, wb


def tail_integral(g, lam_max, omega):
    """int_{lam_max}^inf e^{-i omega x} g(x) dx from a two-term power fit of g.

    g ~ a x^{-k} + b x^{-k-1}, k rounded from the decay between lam_max/2 and
    lam_max. Returns (value, error estimate, k).
    """
    g1, g2, g4 = (complex(g(np.array([lam_max * s]))[0]) for s in (0.5, 1.0, 2.0))
    if g2 == 0:
        return 0j, 0.0, 0
    kf = math.log(abs(g1) / abs(g2)) / math.log(2.0) if g1 != 0 else 2.0
    k = max(2, int(round(kf)))
    # solve a L^-k + b L^-k-1 = g2, a (2L)^-k + b (2L)^-k-1 = g4
    Lm = lam_max
    A = np.array([[Lm**-k, Lm ** (-k - 1)], [(2 * Lm) ** -k, (2 * Lm) ** (-k - 1)]], dtype=complex)
    a, b = np.linalg.solve(A, np.array([g2, g4]))
    z = 1j * omega * Lm
    one = a * Lm ** (1 - k) * expn_complex(k, z)
    two = b * Lm ** (-k) * expn_complex(k + 1, z)
    return complex(one + two), float(abs(two)) + 1e-3 * float(abs(one)), k


def _default_lambda_max(spectral, photon=None):
    scale = max(spectral.lambda_e, spectral.omega_e, photon.nu if photon is not None else 0.0)
    return 200.0 * scale


def _hmax(t, lam_max):
    return min(math.pi / (4.0 * abs(t)), lam_max / 64.0)


def fourier_halfline_report(g, t, lam_max, rtol=1e-8, a=0.0, hmax=None):
    """int_a^inf e^{-itx} g(x) dx: adaptive Filon on [a, lam_max] plus analytic tail."""
    if t == 0:
        raise DomainError("time must be nonzero")
    hmax = _hmax(t, lam_max - a) if hmax is None else hmax
    mesh = adaptive_mesh(g, a, lam_max, hmax, rtol)
    coarse = filon_sum(mesh, t)
    fine = filon_sum(mesh, t, refined=True)
    tail, tail_err, k = tail_integral(g, lam_max, t)
    value = fine + tail
    err = abs(fine - coarse) + tail_err
    return QuadratureReport(
        complex(value), err, 2 * mesh.size, lam_max, mesh.converged,
        {"tail": tail, "tail_power": k, "mesh": mesh},
    )


# Stone-formula oracles ------------------------------------------------------------


def survival_density(spectral, params):
    """lam (R(lam+) - R(lam-))/(pi i) for the bound state, from the raw coupling cubic."""

    def g(lam):
        lam = np.asarray(lam, dtype=float)
        return lam * resolvent.bound_jump(lam, spectral, params) / (math.pi * 1j)

    return g


def stone_survival(t, spectral, params, lambda_max=None, rtol=1e-8, hmax=None):
    """S(t) = (1/(pi i)) int_0^inf e^{-it lam} lam (R(lam+) - R(lam-)) d lam.

    The element is the projected bound-bound resolvent element; its
    projection term is even in lam and cancels from the jump.
    """
    t = float(t)
    lam_max = _default_lambda_max(spectral) if lambda_max is None else lambda_max
    rep = fourier_halfline_report(survival_density(spectral, params), t, lam_max, rtol, hmax=hmax)
    rep.details.pop("mesh")
    return rep


def stone_survival_double(t, spectral, params, lambda_max=None, rtol=1e-8, s_nodes=160):
    """The two-term representation with the auxiliary int ds/(s^2 + lam^2) kernel.

    term1 = (1/(2 pi i)) int_R e^{-it lam} lam J dlam and
    term2 = (1/pi) int_R ds (1/(2 pi i)) int_R e^{-it lam} lam^2 J/(s^2 + lam^2) dlam,
    with J the (odd) jump. The s-integrand is even, so s runs over [0, inf)
    as s = tan(theta) with Gauss-Legendre nodes in theta; the inner
    integrals share one Filon mesh through precomputed node weights.
    """
    t = float(t)
    g = survival_density(spectral, params)
    lam_max = _default_lambda_max(spectral) if lambda_max is None else lambda_max
    mesh = adaptive_mesh(g, 0.0, lam_max, _hmax(t, lam_max), rtol)
    # cos transform of g gives term1 (J odd)
    cos_val = 0.5 * (filon_sum(mesh, t, True) + filon_sum(mesh, -t, True))
    cos_coarse = 0.5 * (filon_sum(mesh, t) + filon_sum(mesh, -t))
    xl, xm, xr, wa_p, wm_p, wb_p = filon_weights(mesh, t)
    _, _, _, wa_m, wm_m, wb_m = filon_weights(mesh, -t)
    # sin(t lam) = (e^{it lam} - e^{-it lam})/(2i)
    wa, wm, wb = ((wm_ - wp_) / 2j for wm_, wp_ in ((wa_m, wa_p), (wm_m, wm_p), (wb_m, wb_p)))
    fl = np.concatenate([mesh.fl, mesh.fm])
    fm = np.concatenate([mesh.f1, mesh.f3])
    fr = np.concatenate([mesh.fm, mesh.fr])
    sigma = max(spectral.omega_e, 1.0)

    def inner(s_vals):
        out = np.empty(s_vals.size, dtype=complex)
        for i, s in enumerate(s_vals):
            k = lambda x: x / (s * s + x * x)
            out[i] = np.sum(wa * fl * k(xl) + wm * fm * k(xm) + wb * fr * k(xr))
        return out

    def term2(n):
        th, wt = np.polynomial.legendre.leggauss(n)
        theta = 0.25 * math.pi * (th + 1.0)
        s = sigma * np.tan(theta)
        jac = 0.25 * math.pi * sigma / np.cos(theta) ** 2
        K = -1j * inner(s)
        return (2.0 / math.pi) * np.sum(wt * jac * K)

    t2 = term2(s_nodes)
    t2_half = term2(s_nodes // 2)
    tail_p, e_p, _ = tail_integral(g, lam_max, t)
    tail_m, e_m, _ = tail_integral(g, lam_max, -t)
    # tails with the s-integral done exactly
    tail = 0.5 * (tail_p + tail_m) - 0.5 * (tail_m - tail_p)
    value = cos_val + t2 + tail
    err = abs(cos_val - cos_coarse) + abs(t2 - t2_half) + e_p + e_m
    return QuadratureReport(
        complex(value), err, 2 * mesh.size, lam_max, mesh.converged,
        {"term1": complex(cos_val + 0.5 * (tail_p + tail_m)), "term2": complex(t2 - 0.5 * (tail_m - tail_p)), "s_nodes": s_nodes},
    )


def s_kernel_identity(z):
    """(1/pi) int_R z/(s^2 + z^2) ds by quadrature; +1 for Re z > 0, -1 for Re z < 0."""
    z = complex(z)
    f = lambda s: z / (s * s + z * z)
    v, e = amplitudes._cquad(f, 0.0, np.inf, epsabs=1e-13, epsrel=1e-12)
    return QuadratureReport(2.0 * v / math.pi, 2.0 * e / math.pi, 0, math.inf, True)


def stone_projection_weight(spectral, params, scales=(1e-2, 1e-3, 1e-4)):
    """Extrapolate S_hat(t) to t = 0+ from Stone values at t = scale/lambda_e.

    Quadratic extrapolation in t through the three samples.
    """
    ts = np.array(scales, dtype=float) / spectral.lambda_e
    reps = [stone_survival(t, spectral, params) for t in ts]
    vals = np.array([r.value for r in reps]) / spectral.kappa0
    V = np.vander(ts, 3, increasing=True)
    c = np.linalg.solve(V, vals)
    lin = np.linalg.solve(np.vander(ts[1:], 2, increasing=True), vals[1:])[0]
    err = sum(r.error for r in reps) / spectral.kappa0 + abs(c[0] - lin)
    return QuadratureReport(complex(c[0]), err, 0, math.inf, all(r.converged for r in reps),
                            {"samples": vals, "t": ts})


def photon_density(spectral, params, photon):
    """lam (R(lam+) - R(lam-))/(pi i) for the photon-bound element."""

    def g(lam):
        lam = np.asarray(lam, dtype=float)
        return lam * resolvent.photon_jump(lam, spectral, params, photon) / (math.pi * 1j)

    return g


def stone_transition(t, photon, spectral, params, lambda_max=None, rtol=1e-8):
    """Half-line Stone integral of the photon-bound element (needs eps > 0)."""
    if photon.eps <= 0:
        raise DomainError("the Stone integral of a photon state needs eps > 0")
    lam_max = _default_lambda_max(spectral, photon) if lambda_max is None else lambda_max
    rep = fourier_halfline_report(photon_density(spectral, params, photon), float(t), lam_max, rtol)
    rep.details.pop("mesh")
    return rep


# radial overlaps -------------------------------------------------------------------


def _composite_gl(f, a, b, width, order=24):
    """Composite Gauss-Legendre on [a, b] with panels no wider than ``width``; f vectorized."""
    n = max(1, int(math.ceil((b - a) / width)))
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    pts = mid + half * x[None, :]
    return complex(np.sum(f(pts) * (half * w[None, :])))


def _gl_report(f, a, b, width, truncation=math.inf):
    v = _composite_gl(f, a, b, width)
    v2 = _composite_gl(f, a, b, width / 2)
    return QuadratureReport(v2, abs(v2 - v) + 1e-15 * abs(v2), int(math.ceil((b - a) / width)) * 2, truncation, True)


def radial_overlap_oracle(kind, params, **args):
    """Radial-integral forms of the closed-form overlaps.

    kind = "green-green": <G^-+_{z*}, G_{lambda}> with args z, lambda_e, sign;
    the Green functions are e^{i k |x|}/(4 pi c^2 |x|).
    kind = "bracket": <(-c^2 Laplacian - z^2)^{-1} rho_r, rho_r> with args z, r, sign;
    the uniform-shell angular average is done analytically (distance density d/(2 r^2)).
    kind = "photon-green": chi^eps(w) with args w, nu, eps as
    int_0^inf u e^{-(eps - i w) u}(j0(nu u) - (eps/nu) j1(nu u)) du, needs Im w > -eps.
    """
    c = params.c
    if kind == "green-green":
        z, lam, sign = complex(args["z"]), float(args["lambda_e"]), args.get("sign", 1)
        mu = (lam - sign * 1j * z) / c
        if not mu.real > 0:
            raise DomainError("green-green overlap needs Re(lambda - i sign z) > 0")
        R = 60.0 / mu.real
        f = lambda r: np.exp(-mu * r) / (4.0 * math.pi * c**4)
        return _gl_report(f, 0.0, R, min(R / 32, 1.0 / max(abs(mu), 1e-300)), R)
    if kind == "bracket":
        z, r, sign = complex(args["z"]), float(args["r"]), args.get("sign", 1)
        k = sign * z / c
        f = lambda d: (d / (2.0 * r * r)) * np.exp(1j * k * d) / (4.0 * math.pi * c**2 * d)
        return _gl_report(f, 0.0, 2.0 * r, 2.0 * r / max(4, int(abs(k) * r) + 4))
    if kind == "photon-green":
        w, nu, eps = complex(args["w"]), float(args["nu"]), float(args["eps"])
        s = eps - 1j * w
        if not s.real > 0:
            raise DomainError("photon-green overlap needs Im w > -eps")
        U = 45.0 / s.real

        def f(u):
            x = nu * u
            j0 = special.spherical_jn(0, x)
            j1 = special.spherical_jn(1, x)
            return u * np.exp(-s * u) * (j0 - (eps / nu) * j1)

        width = min(1.0 / (nu + abs(w.real) + s.real), U / 16)
        return _gl_report(f, 0.0, U, width, U)
    raise DomainError(f"unknown overlap kind {kind!r}")


# cut integral ------------------------------------------------------------------------


def cut_integral_check(t, photon, spectral, params, rtol=1e-9):
    """Recompute the logarithmic-cut term in the distance u from the branch point.

    With u = x - nu, the integral along the cut is evaluated by adaptive
    Filon in u plus the analytic tail, independent of QUADPACK's QAWF.
    ``details['gap']`` is the relative difference to the amplitude's own
    cut term.
    """
    if photon.eps <= 0:
        raise DomainError("cut integral needs eps > 0")
    t = float(t)
    nu, eps = photon.nu, photon.eps
    lam = spectral.lambda_e
    if t > 0:
        def h(u):
            z = nu + np.asarray(u, dtype=float) - 1j * eps
            return z * resolvent.photon_green(z, spectral, params)
        pref = eps / (1j * nu**3) * math.exp(-eps * t) * np.exp(-1j * t * nu)
    else:
        def h(u):
            z = nu + np.asarray(u, dtype=float) + 1j * eps
            return z * resolvent.photon_green(-z, spectral, params)
        pref = 1j * eps / nu**3 * math.exp(eps * t) * np.exp(-1j * t * nu)
    umax = 200.0 * max(lam, nu, spectral.omega_e)
    rep = fourier_halfline_report(h, t, umax, rtol)
    rep.details.pop("mesh")
    value = pref * rep.value
    internal = amplitudes.transition_eps(t, photon, spectral, params).cut
    gap = abs(value - internal) / max(abs(internal), 1e-300)
    return QuadratureReport(value, abs(pref) * rep.error, rep.subdivisions, umax, rep.converged,
                            {"internal": internal, "gap": gap})


# brute force ------------------------------------------------------------------------


def permanent_bruteforce(matrix):
    """Sum over all permutations; factorial time."""
    a = np.asarray(matrix, dtype=complex)
    n = a.shape[0]
    rows = np.arange(n)
    return complex(sum(np.prod(a[rows, list(s)]) for s in itertools.permutations(range(n))))
