"""Exponential integral and the principal-value Laplace kernel.

Ei is evaluated by its power series up to x = 40 and by the truncated
asymptotic series beyond; both live in the compiled kernel layer.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import kernels
from .errors import AccuracyError, DomainError

EI_MAX = 709.0


@dataclass(frozen=True)
class PVKernelSpec:
    """Pole location and time of P.V. int_0^inf e^{-st}/(s - lam) ds."""

    lam: float
    t: float

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"pole location must be positive, got {self.lam!r}")
        if not self.t > 0:
            raise DomainError(f"time must be positive, got {self.t!r}")


def _positive(x, what="argument"):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"{what} must be positive, got {x!r}")
    return arr


def exp_integral_ei(x):
    """Ei(x) = -P.V. int_{-x}^inf e^{-u}/u du for x > 0.

    Accepts scalars or arrays. Overflows to inf beyond x ~ 709.
    """
    arr = _positive(x)
    if arr.ndim == 0:
        v = float(arr)
        return kernels.ei(v) if v <= EI_MAX else math.inf
    with np.errstate(over="ignore"):
        return np.exp(arr) * kernels.scaled_ei_array(arr)


def scaled_ei(x):
    """e^{-x} Ei(x) for x > 0, free of overflow for any finite x."""
    arr = _positive(x)
    if arr.ndim == 0:
        return kernels.scaled_ei(float(arr))
    return kernels.scaled_ei_array(arr)


def pv_laplace_pole(t, lam):
    """P.V. int_0^inf e^{-st}/(s - lam) ds = -e^{-lam t} Ei(lam t)."""
    PVKernelSpec(lam=lam, t=t)
    return -kernels.scaled_ei(lam * t)


def pv_laplace_pole_quadrature(t, lam, rel_window=1e-4):
    """Same principal value by direct quadrature around the pole.

    The window [lam - d, lam + d] with d = rel_window * lam is integrated
    from its odd expansion, -2 e^{-lam t} (d t + (d t)^3/18); on either
    side the substitution s = lam -/+ d e^v removes the 1/(s - lam) growth.
    Returns (value, error_estimate).
    """
    PVKernelSpec(lam=lam, t=t)
    d = rel_window * lam
    dt = d * t
    window = -2.0 * math.exp(-lam * t) * (dt + dt**3 / 18.0)
    vmax = math.log(lam / d)
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=200, full_output=1)
    # right side up to 2 lam
    right, e1, *info1 = integrate.quad(lambda v: math.exp(-(lam + d * math.exp(v)) * t), 0.0, vmax, **opts)
    # left side down to 0
    left, e2, *info2 = integrate.quad(lambda v: math.exp(-(lam - d * math.exp(v)) * t), 0.0, vmax, **opts)
    # far tail, [2 lam, inf)
    tail, e3, *info3 = integrate.quad(lambda s: math.exp(-s * t) / (s - lam), 2.0 * lam, np.inf, **opts)
    for info in (info1, info2, info3):
        if len(info) > 1:
            raise AccuracyError(f"PV quadrature did not converge: {info[1]}", estimate=e1 + e2 + e3)
    value = right - left + tail + window
    err = e1 + e2 + e3 + 2.0 * math.exp(-lam * t) * dt**5 / 600.0
    return value, err
