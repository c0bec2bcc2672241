import math

import numpy as np
import pytest
from scipy import special as sps

from pfpoint import amplitudes, oracle, resolvent
from pfpoint.errors import DomainError
from pfpoint.resolvent import BranchedPoint, PhotonSpec


def test_expn_complex_against_scipy():
    for n in (1, 2, 3, 5):
        for x in (0.3, 4.0, 29.0, 31.0, 120.0):
            assert oracle.expn_complex(n, x).real == pytest.approx(sps.expn(n, x), rel=1e-12)
    # purely imaginary argument: E_1(i y) = -Ci(y) + i (Si(y) - pi/2)
    si, ci = sps.sici(50.0)
    assert oracle.expn_complex(1, 50j) == pytest.approx(-ci + 1j * (si - math.pi / 2), rel=1e-12)
    assert oracle.expn_complex(3, 0) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        oracle.expn_complex(1, 0)


def test_report_error_nonnegative():
    rep = oracle.QuadratureReport(1.0, -2.0, 0, 1.0, False)
    assert rep.error == 2.0 and not rep.reliable


def test_stone_survival_agreement(params, spectral):
    rep = oracle.stone_survival(1.0, spectral, params)
    closed = amplitudes.survival_terms(1.0, spectral, params).S
    assert rep.converged
    assert rep.gap(closed) < 1e-5
    assert rep.error < 1e-6 * abs(closed)


def test_stone_truncation_doubling(params, spectral):
    base = oracle.stone_survival(2.0, spectral, params)
    lam_max = oracle._default_lambda_max(spectral)
    doubled = oracle.stone_survival(2.0, spectral, params, lambda_max=2 * lam_max)
    assert abs(doubled.value - base.value) < max(base.error, doubled.error)


def test_stone_halved_step(params, spectral):
    t = 3.0
    lam_max = oracle._default_lambda_max(spectral)
    h = oracle._hmax(t, lam_max)
    a = oracle.stone_survival(t, spectral, params, hmax=h)
    b = oracle.stone_survival(t, spectral, params, hmax=h / 2)
    assert abs(a.value - b.value) < 2 * max(a.error, b.error)


def test_stone_double_representation(params, spectral):
    for t in (0.5, 5.0):
        one = oracle.stone_survival(t, spectral, params)
        two = oracle.stone_survival_double(t, spectral, params)
        assert two.gap(one.value) < 1e-4


def test_s_kernel_identity(spectral):
    assert oracle.s_kernel_identity(spectral.z_plus).value == pytest.approx(1.0, abs=1e-10)
    assert oracle.s_kernel_identity(spectral.z_minus).value == pytest.approx(-1.0, abs=1e-10)


def test_radial_overlaps_static(params, spectral):
    gg = oracle.radial_overlap_oracle("green-green", params, z=0.0, lambda_e=spectral.lambda_e)
    assert gg.value == pytest.approx(1 / (4 * math.pi * spectral.lambda_e), rel=1e-10)
    br = oracle.radial_overlap_oracle("bracket", params, z=0.0, r=1.0)
    assert br.value == pytest.approx(1 / (4 * math.pi), rel=1e-12)
    with pytest.raises(DomainError):
        oracle.radial_overlap_oracle("nope", params)


def test_radial_overlaps_against_closed_forms(params, spectral):
    z = 1 + 0.5j
    gg = oracle.radial_overlap_oracle("green-green", params, z=z, lambda_e=spectral.lambda_e)
    ref = resolvent.green_overlap(BranchedPoint(z), spectral, params)
    assert gg.value == pytest.approx(ref, rel=1e-8)
    br = oracle.radial_overlap_oracle("bracket", params, z=z, r=0.7)
    assert br.value == pytest.approx(resolvent.shell_bracket(z, 0.7), rel=1e-8)
    rng = np.random.default_rng(5)
    for _ in range(5):
        w = complex(rng.uniform(-3, 3), rng.uniform(0.05, 2))
        ph = PhotonSpec(rng.uniform(0.5, 2.0), rng.uniform(0.01, 0.2))
        rep = oracle.radial_overlap_oracle("photon-green", params, w=w, nu=ph.nu, eps=ph.eps)
        assert rep.value == pytest.approx(resolvent.chi_eps(BranchedPoint(w), ph).total, rel=1e-8)


def test_cut_integral_check(params, spectral):
    ph = PhotonSpec(1.0, 0.01)
    for t in (1.0, -1.0):
        rep = oracle.cut_integral_check(t, ph, spectral, params)
        assert rep.details["gap"] < 1e-6
    a = oracle.cut_integral_check(1.0, ph, spectral, params).value
    b = oracle.cut_integral_check(-1.0, ph, spectral, params).value
    assert b == pytest.approx(a.conjugate(), rel=1e-8)


def test_cut_integral_vanishes_linearly(params, spectral):
    eps = np.array([0.04, 0.02, 0.01, 0.005])
    vals = [abs(amplitudes.transition_eps(1.0, PhotonSpec(1.0, e), spectral, params).cut) for e in eps]
    slope = np.polyfit(np.log(eps), np.log(vals), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.15)


def test_stone_transition_needs_eps(params, spectral):
    with pytest.raises(DomainError):
        oracle.stone_transition(1.0, PhotonSpec(1.0, 0.0), spectral, params)


def test_permanent_bruteforce():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert amplitudes.permanent(a) == pytest.approx(oracle.permanent_bruteforce(a), rel=1e-12)
