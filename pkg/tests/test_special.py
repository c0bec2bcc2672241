import math

import mpmath
import numpy as np
import pytest

from pfpoint import special
from pfpoint.errors import DomainError


def test_ei_scalar_and_array():
    xs = np.array([0.05, 1.0, 12.0, 60.0, 400.0])
    arr = special.exp_integral_ei(xs)
    for x, v in zip(xs, arr):
        assert v == pytest.approx(float(mpmath.ei(x)), rel=1e-14)
        assert special.exp_integral_ei(float(x)) == pytest.approx(v, rel=1e-15)


def test_ei_overflow_and_domain():
    assert math.isinf(special.exp_integral_ei(800.0))
    assert np.isinf(special.exp_integral_ei(np.array([800.0]))[0])
    with pytest.raises(DomainError):
        special.exp_integral_ei(0.0)
    with pytest.raises(DomainError):
        special.exp_integral_ei(np.array([1.0, -2.0]))


def test_scaled_ei_large_argument():
    x = 1e6
    assert special.scaled_ei(x) == pytest.approx(float(mpmath.exp(-x) * mpmath.ei(x)), rel=1e-14)


def test_pv_laplace_pole_identity():
    rng = np.random.default_rng(11)
    for _ in range(20):
        lam, t = rng.uniform(0.1, 30.0), rng.uniform(0.01, 5.0)
        ref = float(-mpmath.exp(-lam * t) * mpmath.ei(lam * t))
        assert special.pv_laplace_pole(t, lam) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("t,lam", [(0.01, 16.7), (1.0, 1.0), (3.0, 16.7), (0.2, 0.5)])
def test_pv_quadrature_agrees(t, lam):
    v, err = special.pv_laplace_pole_quadrature(t, lam)
    ref = special.pv_laplace_pole(t, lam)
    assert abs(v - ref) <= 1e-10 * abs(ref)
    assert err < 1e-8 * abs(ref)


def test_pv_rejects_bad_arguments():
    with pytest.raises(DomainError):
        special.pv_laplace_pole(0.0, 1.0)
    with pytest.raises(DomainError):
        special.pv_laplace_pole(1.0, -1.0)
    with pytest.raises(DomainError):
        special.PVKernelSpec(lam=1.0, t=-1.0)


def test_reference_values():
    assert special.exp_integral_ei(1.0) == pytest.approx(1.895117816, rel=1e-9)
    assert special.scaled_ei(1.0) == pytest.approx(0.697175, rel=1e-6)
    assert special.scaled_ei(100.0) * 100 == pytest.approx(1.0, rel=0.02)
    assert special.pv_laplace_pole(1.0, 1.0) == pytest.approx(-0.697175, rel=1e-6)
    x = 1e-8
    assert special.exp_integral_ei(x) - math.log(x) == pytest.approx(np.euler_gamma, abs=1e-7)


def test_scaled_ei_monotone_and_derivative():
    # d/dx scaled_ei = 1/x - scaled_ei, so the turning point solves scaled_ei(x) = 1/x
    peak = 1.347155251069255
    assert special.scaled_ei(peak) == pytest.approx(1 / peak, rel=1e-12)
    assert np.all(np.diff(special.scaled_ei(np.linspace(1.0, peak, 200))) > 0)
    assert np.all(np.diff(special.scaled_ei(np.linspace(peak, 50.0, 2000))) < 0)
    h = 1e-5
    for xi in (1.0, 7.5, 50.0):
        f = lambda u: math.exp(u) * special.scaled_ei(u)
        d = (f(xi + h) - f(xi - h)) / (2 * h)
        assert d == pytest.approx(math.exp(xi) / xi, rel=1e-6)


def test_pv_quadrature_random_points():
    rng = np.random.default_rng(3)
    for _ in range(20):
        t, lam = rng.uniform(0.01, 10.0), rng.uniform(0.5, 50.0)
        ref = -special.scaled_ei(lam * t)
        v, _ = special.pv_laplace_pole_quadrature(t, lam)
        assert abs(v - ref) < 1e-8 * (1 + abs(ref))
