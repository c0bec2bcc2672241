"""Pure-Python/numpy implementations of the hot kernels.

Numerically identical (to rounding) to the compiled versions in
``_kernels.pyx``; used when the extension is unavailable or when
``PFPOINT_PURE_PYTHON`` is set.
"""

import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061
SERIES_CUTOFF = 40.0


def _ei_series(x):
    # gamma + ln x + sum_k x^k / (k k!)
    term = 1.0
    total = 0.0
    k = 1
    while True:
        term *= x / k
        inc = term / k
        total += inc
        if inc < 1e-17 * abs(total) or k > 500:
            break
        k += 1
    return EULER_GAMMA + math.log(x) + total


def _scaled_ei_asymptotic(x):
    # e^{-x} Ei(x) ~ (1/x) sum_k k! / x^k, truncated at the smallest term
    total = 1.0
    term = 1.0
    k = 1
    while k < 200:
        nxt = term * k / x
        if nxt > term or nxt < 1e-18:
            if nxt < 1e-18:
                total += nxt
            break
        term = nxt
        total += term
        k += 1
    return total / x


def scaled_ei(x):
    """e^{-x} Ei(x) for x > 0."""
    x = float(x)
    if x <= SERIES_CUTOFF:
        return math.exp(-x) * _ei_series(x)
    return _scaled_ei_asymptotic(x)


def ei(x):
    """Ei(x) for 0 < x <= ~709."""
    x = float(x)
    if x <= SERIES_CUTOFF:
        return _ei_series(x)
    return math.exp(x) * _scaled_ei_asymptotic(x)


def scaled_ei_array(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    flat = out.reshape(-1)
    for i, v in enumerate(x.reshape(-1)):
        flat[i] = scaled_ei(v)
    return out


def permanent(matrix):
    """Ryser inclusion-exclusion, vectorised over all column subsets."""
    a = np.asarray(matrix, dtype=complex)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    idx = np.arange(1, 2**n)
    bits = ((idx[:, None] >> np.arange(n)) & 1).astype(float)
    row_sums = bits @ a.T
    sizes = bits.sum(axis=1)
    signs = np.where((n - sizes) % 2 == 0, 1.0, -1.0)
    return complex(np.sum(signs * np.prod(row_sums, axis=1)))


MOMENT_SWITCH = 0.5
_NSER = 10
# series coefficients: int u^k cos/sin(theta u) expanded in theta^2
_C0 = [(-1) ** j / (math.factorial(2 * j) * (2 * j + 1)) for j in range(_NSER)]
_C1 = [(-1) ** j / (math.factorial(2 * j + 1) * (2 * j + 3)) for j in range(_NSER)]
_C2 = [(-1) ** j / (math.factorial(2 * j) * (2 * j + 3)) for j in range(_NSER)]


def _horner(coeffs, t2):
    acc = np.zeros_like(t2)
    for cf in reversed(coeffs):
        acc = acc * t2 + cf
    return acc


def _moments(theta):
    # M_k = int_{-1}^{1} u^k e^{-i theta u} du, k = 0, 1, 2
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < MOMENT_SWITCH
    th = np.where(small, 1.0, theta)
    s, c = np.sin(th), np.cos(th)
    m0 = 2.0 * s / th
    m1 = -2.0j * (s / th**2 - c / th)
    m2 = 2.0 * (s / th + 2.0 * c / th**2 - 2.0 * s / th**3)
    t2 = theta**2
    m0s = 2.0 * _horner(_C0, t2)
    m1s = -2.0j * theta * _horner(_C1, t2)
    m2s = 2.0 * _horner(_C2, t2)
    return (
        np.where(small, m0s, m0),
        np.where(small, m1s, m1),
        np.where(small, m2s, m2),
    )


def filon_panels(xm, h, fa, fm, fb, omega):
    """Sum over panels of int quadratic(f) * exp(-i omega x) dx.

    Panel j spans [xm[j] - h[j], xm[j] + h[j]]; fa, fm, fb are the
    (complex) samples at the left end, midpoint and right end.
    """
    xm = np.asarray(xm, dtype=float)
    h = np.asarray(h, dtype=float)
    fa = np.asarray(fa, dtype=complex)
    fm = np.asarray(fm, dtype=complex)
    fb = np.asarray(fb, dtype=complex)
    m0, m1, m2 = _moments(omega * h)
    a = fm
    b = 0.5 * (fb - fa)
    c = 0.5 * (fa + fb) - fm
    return complex(np.sum(h * np.exp(-1j * omega * xm) * (a * m0 + b * m1 + c * m2)))
