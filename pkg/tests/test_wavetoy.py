import itertools
import math

import numpy as np
import pytest

from pfpoint import oracle, wavetoy
from pfpoint.errors import ConstructionError, DomainError, SizeError

SEEDS = range(100)


def _state(seed, n):
    rng = np.random.default_rng(1000 + seed)
    return rng.standard_normal(2 * n)


def test_identity_system():
    s = wavetoy.build_system(np.eye(2))
    I, Z = np.eye(2), np.zeros((2, 2))
    assert np.array_equal(s.W, np.block([[Z, I], [-I, Z]]))
    assert np.array_equal(s.G, np.eye(4))


def test_diagonal_system():
    s = wavetoy.build_system(np.diag([1.0, 2.0, 3.0]))
    assert s.skew_residual() < 1e-14
    assert s.j_residual() < 1e-14


def test_construction_errors():
    with pytest.raises(ConstructionError):
        wavetoy.build_system([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ConstructionError):
        wavetoy.build_system(np.diag([1.0, 1e-12]))
    with pytest.raises(ConstructionError):
        wavetoy.build_system(np.ones(3))


@pytest.mark.parametrize("seed", SEEDS)
def test_random_system_identities(seed):
    s = wavetoy.random_system(seed)
    assert s.skew_residual() < 1e-12 * 9
    x = _state(seed, s.n)
    for t in (0.1, 1.0, 10.0):
        assert abs(wavetoy.g_norm(s, wavetoy.propagate(s, t, x)) - wavetoy.g_norm(s, x)) < 1e-12 * wavetoy.g_norm(s, x)
    assert wavetoy.conjugation_check(s, 2.7, x) < 1e-12 * wavetoy.g_norm(s, x)
    both = wavetoy.propagate(s, 1.3, wavetoy.propagate(s, 0.4, x))
    assert np.allclose(both, wavetoy.propagate(s, 1.7, x), rtol=0, atol=1e-12 * np.linalg.norm(x) * 10)


def test_propagate_identity_and_shape():
    s = wavetoy.random_system(0)
    x = _state(0, s.n)
    assert np.allclose(wavetoy.propagate(s, 0.0, x), x, rtol=0, atol=1e-14 * np.linalg.norm(x))
    with pytest.raises(DomainError):
        wavetoy.propagate(s, 1.0, np.ones(3))


def test_harmonic_rotation():
    w0 = 1.7
    s = wavetoy.build_system(w0 * np.eye(3))
    x = np.array([1.0, 0.0, 0.5, 0.0, 2.0, 0.0])
    t = 0.9
    phi = x[:3] * math.cos(w0 * t) + x[3:] * math.sin(w0 * t) / w0
    assert np.allclose(wavetoy.propagate(s, t, x)[:3], phi, atol=1e-15)
    assert wavetoy.conjugation_check(s, t, x) < 1e-14


def test_complex_state_conjugation():
    s = wavetoy.random_system(4)
    x = _state(4, s.n) + 1j * _state(5, s.n)
    assert wavetoy.conjugation_check(s, 1.1, x) < 1e-12


def test_second_derivative_order():
    s = wavetoy.random_system(7)
    x = _state(7, s.n)
    hs = np.array([4e-2, 2e-2, 1e-2, 5e-3])
    errs = [wavetoy.second_derivative_check(s, 0.8, x, h) for h in hs]
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.1)


def test_stone_formula_convergence():
    s = wavetoy.random_system(11)
    rng = np.random.default_rng(11)
    psi = rng.standard_normal(s.n) + 1j * rng.standard_normal(s.n)
    phi = rng.standard_normal(s.n) + 1j * rng.standard_normal(s.n)
    a = 50 * np.linalg.norm(s.B, 2)
    norm2 = np.linalg.norm(psi) * np.linalg.norm(phi)
    gaps = [wavetoy.stone_formula_check(s, 1.0, a, e, (psi, phi)).gap for e in (2e-3, 1e-3, 5e-4)]
    assert gaps[1] < 1e-2 * norm2
    assert gaps[1] / gaps[0] == pytest.approx(0.5, abs=0.1)
    assert gaps[2] / gaps[1] == pytest.approx(0.5, abs=0.1)
    fast = wavetoy.stone_formula_check(s, 1.0, a, 1e-3, (psi, phi), solve=False)
    assert fast.approx == pytest.approx(wavetoy.stone_formula_check(s, 1.0, a, 1e-3, (psi, phi)).approx, rel=1e-10)
    with pytest.raises(DomainError):
        wavetoy.stone_formula_check(s, 1.0, 0.1, 1e-3, (psi, phi))
    with pytest.raises(DomainError):
        wavetoy.stone_formula_check(s, 1.0, a, 0.0, (psi, phi))


def test_stone_density_localizes_on_eigenvector():
    s = wavetoy.random_system(3)
    v = s.eigvecs[:, 2]
    eps = 1e-3
    lam = np.linspace(s.eigvals[2] - 0.05, s.eigvals[2] + 0.05, 2001)
    dens = np.abs(wavetoy.stone_density(s, lam, eps, v, v))
    assert abs(lam[np.argmax(dens)] - s.eigvals[2]) <= eps


def test_fock_commutation_and_sizes():
    f = wavetoy.TruncatedFock(3, 4)
    assert f.dim == sum(math.comb(3 + k - 1, k) for k in range(5))
    rng = np.random.default_rng(0)
    u, v = rng.standard_normal(3) + 1j * rng.standard_normal(3), rng.standard_normal(3) + 1j * rng.standard_normal(3)
    assert f.commutator_residual(u, v) < 1e-13
    A = f.create(u)
    for k in range(4):
        sl, up = f.sector_slice(k), f.sector_slice(k + 1)
        block = np.zeros_like(A)
        block[up, sl] = A[up, sl]
        if k == 0:
            total = block
        else:
            total += block
    assert np.allclose(A, total)
    with pytest.raises(SizeError):
        wavetoy.TruncatedFock(0, 2)
    with pytest.raises(SizeError):
        f.symmetrized([u] * 5)


def test_functoriality_examples():
    f = wavetoy.TruncatedFock(3, 4)
    U = wavetoy.random_unitary(3, 1)
    rng = np.random.default_rng(1)
    vecs = [rng.standard_normal(3) + 1j * rng.standard_normal(3) for _ in range(6)]
    one = wavetoy.fock_functoriality_check(f, U, vecs[:1], vecs[1:2])
    assert one.lhs == pytest.approx(np.vdot(vecs[0], U @ vecs[1]), rel=1e-12)
    e = np.eye(3)
    two = wavetoy.fock_functoriality_check(f, np.eye(3), [e[0], e[1]], [e[0], e[1]])
    assert two.lhs == pytest.approx(0.5, abs=1e-13)
    three = wavetoy.fock_functoriality_check(f, U, vecs[:3], vecs[3:6])
    M = np.array([[np.vdot(p, U @ q) for q in vecs[3:6]] for p in vecs[:3]])
    assert three.residual < 1e-12 * max(1.0, abs(three.rhs))
    assert three.lhs == pytest.approx(oracle.permanent_bruteforce(M) / 6, rel=1e-12)
    with pytest.raises(DomainError):
        wavetoy.fock_functoriality_check(f, U, vecs[:2], vecs[:1])


@pytest.mark.parametrize("seed", range(10))
def test_functoriality_random(seed):
    f = wavetoy.TruncatedFock(3, 4)
    U = wavetoy.random_unitary(3, seed)
    rng = np.random.default_rng(seed)
    for n in range(1, 5):
        vecs = [rng.standard_normal(3) + 1j * rng.standard_normal(3) for _ in range(2 * n)]
        chk = wavetoy.fock_functoriality_check(f, U, vecs[:n], vecs[n:])
        assert chk.residual < 1e-12 * max(1.0, abs(chk.rhs))
    assert wavetoy.sector_leakage(f, U) < 1e-14


def test_weyl_relation_within_truncation_tail():
    f = wavetoy.TruncatedFock(2, 6)
    rng = np.random.default_rng(4)
    a = 0.3 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
    b = 0.3 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
    prev = math.inf
    for N in (2, 3, 4, 6):
        chk = wavetoy.weyl_relation_check(wavetoy.TruncatedFock(2, N), a, b)
        assert chk.residual <= 10 * math.sqrt(chk.truncation_tail) + 1e-12
        assert chk.residual < prev
        prev = chk.residual
    # the opposite phase convention is visibly wrong
    om = f.vacuum()
    wrong = np.exp(-0.5j * np.imag(np.vdot(a, b))) * (f.weyl(a) @ (f.weyl(b) @ om))
    assert np.linalg.norm(f.weyl(a + b) @ om - wrong) > 100 * wavetoy.weyl_relation_check(f, a, b).residual


def test_dgamma_additivity():
    for n in (1, 2, 3):
        f = wavetoy.TruncatedFock(n, 3)
        rng = np.random.default_rng(n)
        X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        H = X + X.conj().T
        for k in range(4):
            assert wavetoy.dgamma_spectrum_check(f, H, k) < 1e-12
