"""Matrix-scale model of the quantized wave equation.

In finite dimension the energy spaces all coincide with R^n, so only the
algebra is testable: skewness of the generator in the energy metric, the
complexification C_B that turns the wave flow into e^{-itB}, the Stone
formula, and second quantization on a truncated bosonic Fock space.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import linalg

from . import kernels
from .errors import ConstructionError, DomainError, SizeError

SKEW_TOL = 1e-12
INJECTIVITY_FLOOR = 1e-10


@dataclass(frozen=True)
class WaveToySystem:
    """Symmetric injective B with the phase-space operators built from it.

    G = diag(B^2, I) is the energy metric, W = [[0, I], [-B^2, 0]] the
    generator of (phi, phidot) -> (phidot, -B^2 phi), J = [[0, -B^-1], [B, 0]]
    the complex structure. C_B maps (phi, phidot) to B phi + i phidot.
    """

    n: int
    B: np.ndarray
    G: np.ndarray
    W: np.ndarray
    J: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray
    B_inv: np.ndarray = field(repr=False)

    def skew_residual(self):
        return float(np.max(np.abs(self.G @ self.W + self.W.T @ self.G)))

    def j_residual(self):
        return float(np.max(np.abs(self.J @ self.J + np.eye(2 * self.n))))


def build_system(B):
    """Validate B and assemble the phase-space operators; invariants are checked here."""
    B = np.array(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ConstructionError("B must be a square matrix")
    n = B.shape[0]
    norm = np.linalg.norm(B, 2)
    if not np.allclose(B, B.T, rtol=0, atol=1e-14 * max(norm, 1.0)):
        raise ConstructionError("B must be symmetric")
    B = 0.5 * (B + B.T)
    lam, V = np.linalg.eigh(B)
    if np.min(np.abs(lam)) <= INJECTIVITY_FLOOR * norm:
        raise ConstructionError("B is singular or nearly so")
    B2 = (V * lam**2) @ V.T
    Binv = (V / lam) @ V.T
    I, Z = np.eye(n), np.zeros((n, n))
    G = np.block([[B2, Z], [Z, I]])
    W = np.block([[Z, I], [-B2, Z]])
    J = np.block([[Z, -Binv], [B, Z]])
    sys = WaveToySystem(n, B, G, W, J, lam, V, Binv)
    scale = max(1.0, norm**2)
    if sys.skew_residual() > SKEW_TOL * scale:
        raise ConstructionError(f"generator is not G-skew (residual {sys.skew_residual():.2e})")
    if sys.j_residual() > SKEW_TOL * max(1.0, norm * np.max(np.abs(1 / lam))):
        raise ConstructionError("J_B does not square to -1")
    return sys


def random_system(seed, n=6, floor=0.3, top=3.0):
    """Random symmetric B with eigenvalues in [floor, top] and a Haar-random basis."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    lam = rng.uniform(floor, top, n)
    return build_system((q * lam) @ q.T)


def g_norm(sys, x):
    x = np.asarray(x)
    return math.sqrt(float(np.real(np.vdot(x, sys.G @ x))))


def propagator(sys, t):
    """e^{tW} from the eigendecomposition: cos(tB), B^-1 sin(tB) and -B sin(tB) blocks."""
    V, lam = sys.eigvecs, sys.eigvals
    c, s = np.cos(t * lam), np.sin(t * lam)
    C = (V * c) @ V.T
    S1 = (V * (s / lam)) @ V.T
    S2 = (V * (-lam * s)) @ V.T
    return np.block([[C, S1], [S2, C]])


def propagate(sys, t, state):
    """e^{tW} applied to a phase-space vector (phi, phidot)."""
    state = np.asarray(state)
    if state.shape != (2 * sys.n,):
        raise DomainError(f"state must have length {2 * sys.n}")
    return propagator(sys, t) @ state


def complexify(sys, state):
    """C_B (phi, phidot) = B phi + i phidot, for real phase-space vectors."""
    phi, dphi = state[: sys.n], state[sys.n:]
    return sys.B @ phi + 1j * dphi


def decomplexify(sys, u):
    return np.concatenate([sys.B_inv @ u.real, u.imag])


def unitary_flow(sys, t):
    """e^{-itB} on C^n."""
    V, lam = sys.eigvecs, sys.eigvals
    return (V * np.exp(-1j * t * lam)) @ V.T


def conjugation_check(sys, t, state):
    """||e^{tW} x - C_B^-1 e^{-itB} C_B x||_G; complex states are split into real parts."""
    state = np.asarray(state)
    lhs = propagate(sys, t, state)
    U = unitary_flow(sys, t)
    parts = [np.real(state), np.imag(state)]
    rhs = sum(w * decomplexify(sys, U @ complexify(sys, x)) for w, x in zip((1.0, 1j), parts))
    return g_norm(sys, lhs - rhs)


def second_derivative_check(sys, t, state, h):
    """Max deviation of the central difference of phi from -B^2 phi at t."""
    phi = lambda s: propagate(sys, s, state)[: sys.n]
    fd = (phi(t + h) - 2 * phi(t) + phi(t - h)) / h**2
    return float(np.max(np.abs(fd + sys.B @ (sys.B @ phi(t)))))


class StoneCheck(NamedTuple):
    approx: complex
    exact: complex
    gap: float


def _stone_mesh(centers, a, eps, t):
    pts = {-a, a}
    offs = eps * np.concatenate([[0.0], np.geomspace(0.05, 4 * a / eps, 60)])
    for c in centers:
        for o in offs:
            for x in (c - o, c + o):
                if -a < x < a:
                    pts.add(float(x))
    pts = np.array(sorted(pts))
    width = math.pi / (4 * max(abs(t), 1e-12))
    out = [pts[0]]
    for x0, x1 in zip(pts[:-1], pts[1:]):
        k = int(math.ceil((x1 - x0) / width))
        out.extend(np.linspace(x0, x1, k + 1)[1:])
    return np.array(out)


def stone_density(sys, lam, eps, psi, phi):
    """<psi, [(B - lam - i eps)^-1 - (B - lam + i eps)^-1] phi>/(2 pi i) at each lam (batched)."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    V, b = sys.eigvecs, sys.eigvals
    pc = V.T @ np.asarray(psi, dtype=complex)
    fc = V.T @ np.asarray(phi, dtype=complex)
    # spectral form of the batched solves
    d = b[None, :] - lam[:, None]
    jump = 1.0 / (d - 1j * eps) - 1.0 / (d + 1j * eps)
    return (jump @ (np.conj(pc) * fc)) / (2j * math.pi)


def stone_density_solve(sys, lam, eps, psi, phi):
    """Same density by batched linear solves, without the eigendecomposition."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    n = sys.n
    A = sys.B[None, :, :] - (lam[:, None, None] + 1j * eps) * np.eye(n)[None]
    Am = sys.B[None, :, :] - (lam[:, None, None] - 1j * eps) * np.eye(n)[None]
    rhs = np.broadcast_to(np.asarray(phi, dtype=complex), (lam.size, n))[..., None]
    x = np.linalg.solve(A, rhs)[..., 0] - np.linalg.solve(Am, rhs)[..., 0]
    return (x @ np.conj(np.asarray(psi, dtype=complex))) / (2j * math.pi)


def stone_formula_check(sys, t, a, eps, state_pair, solve=True, order=16):
    """Truncated, mollified Stone integral of <psi, e^{-itB} phi> versus the exact value.

    (1/(2 pi i)) int_{-a}^{a} e^{-it lam} <psi, [R(lam + i eps) - R(lam - i eps)] phi> dlam
    by composite Gauss-Legendre on a mesh graded geometrically around each
    eigenvalue. The mollification error is about eps |t|.
    """
    psi, phi = (np.asarray(v, dtype=complex) for v in state_pair)
    if not a > np.max(np.abs(sys.eigvals)):
        raise DomainError("truncation a must exceed the spectral radius of B")
    if not eps > 0:
        raise DomainError("eps must be positive")
    mesh = _stone_mesh(sys.eigvals, a, eps, t)
    x, w = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (mesh[1:] + mesh[:-1])
    half = 0.5 * (mesh[1:] - mesh[:-1])
    lam = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    dens = stone_density_solve(sys, lam, eps, psi, phi) if solve else stone_density(sys, lam, eps, psi, phi)
    approx = complex(np.sum(wt * np.exp(-1j * t * lam) * dens))
    exact = complex(np.vdot(psi, unitary_flow(sys, t) @ phi))
    return StoneCheck(approx, exact, abs(approx - exact))


# truncated Fock space ------------------------------------------------------------


def _sector_basis(n, k):
    """Occupation tuples of k quanta in n modes, in lexicographic order."""
    out = []
    for combo in itertools.combinations_with_replacement(range(n), k):
        occ = [0] * n
        for j in combo:
            occ[j] += 1
        out.append(tuple(occ))
    return sorted(out, reverse=True)


@dataclass
class TruncatedFock:
    """Bosonic Fock space over C^n keeping sectors 0..N in the occupation basis."""

    n: int
    N: int = 4
    sectors: list = field(init=False)
    offsets: list = field(init=False)
    index: dict = field(init=False, repr=False)
    dim: int = field(init=False)
    _create: list = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1 or self.N < 0:
            raise SizeError("need n >= 1 and N >= 0")
        self.sectors = [_sector_basis(self.n, k) for k in range(self.N + 1)]
        self.offsets = list(np.cumsum([0] + [len(s) for s in self.sectors]))
        self.dim = int(self.offsets[-1])
        if self.dim > 20000:
            raise SizeError(f"truncated Fock space too large ({self.dim})")
        self.index = {}
        for k, basis in enumerate(self.sectors):
            for i, occ in enumerate(basis):
                self.index[occ] = self.offsets[k] + i
        self._create = []
        for j in range(self.n):
            A = np.zeros((self.dim, self.dim))
            for occ, i in self.index.items():
                if sum(occ) < self.N:
                    up = list(occ)
                    up[j] += 1
                    A[self.index[tuple(up)], i] = math.sqrt(up[j])
            self._create.append(A)

    def sector_slice(self, k):
        return slice(self.offsets[k], self.offsets[k + 1])

    def vacuum(self):
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def create(self, f):
        """a*(f) = sum_j f_j a*_j."""
        f = np.asarray(f, dtype=complex)
        return sum(fj * A for fj, A in zip(f, self._create))

    def annihilate(self, f):
        """a(f) = sum_j conj(f_j) a_j."""
        return self.create(f).conj().T

    def field(self, f):
        """Phi(f) = (a(f) + a*(f))/sqrt(2)."""
        return (self.annihilate(f) + self.create(f)) / math.sqrt(2.0)

    def weyl(self, f):
        """W(f) = exp(i Phi(f)) on the truncated space."""
        return linalg.expm(1j * self.field(f))

    def dgamma(self, H):
        """dGamma(H) = sum_ij H_ij a*_i a_j."""
        H = np.asarray(H, dtype=complex)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        ann = [A.T for A in self._create]
        for i in range(self.n):
            for j in range(self.n):
                if H[i, j] != 0:
                    out += H[i, j] * (self._create[i] @ ann[j])
        return out

    def gamma(self, U):
        """Gamma(U) = exp(-i dGamma(H)) with U = exp(-iH)."""
        H = 1j * linalg.logm(np.asarray(U, dtype=complex))
        H = 0.5 * (H + H.conj().T)
        return linalg.expm(-1j * self.dgamma(H))

    def symmetrized(self, vectors):
        """S_k(v_1 x ... x v_k) = a*(v_1)...a*(v_k) Omega / sqrt(k!)."""
        if len(vectors) > self.N:
            raise SizeError("product state exceeds the truncation level")
        v = self.vacuum()
        for f in reversed(vectors):
            v = self.create(f) @ v
        return v / math.sqrt(math.factorial(len(vectors)))

    def commutator_residual(self, f, g):
        """max |[a(f), a*(g)] - <f,g>| over sectors below N."""
        a, ad = self.annihilate(f), self.create(g)
        C = a @ ad - ad @ a
        ip = np.vdot(f, g)
        top = self.offsets[self.N]
        return float(np.max(np.abs(C[:top, :top] - ip * np.eye(top))))


class FunctorialityCheck(NamedTuple):
    residual: float
    lhs: complex
    rhs: complex


def fock_functoriality_check(fock, U, psis, phis):
    """<S_n(x psi), Gamma(U) S_n(x phi)> against perm[<psi_i, U phi_j>]/n!."""
    if len(psis) != len(phis):
        raise DomainError("need equally many psi and phi vectors")
    n = len(psis)
    if n > fock.N:
        raise SizeError("sector above the truncation level")
    U = np.asarray(U, dtype=complex)
    G = fock.gamma(U)
    lhs = complex(np.vdot(fock.symmetrized(psis), G @ fock.symmetrized(phis)))
    M = np.array([[np.vdot(p, U @ f) for f in phis] for p in psis], dtype=complex).reshape(n, n)
    rhs = complex(kernels.permanent(M)) / math.factorial(n) if n else 1.0 + 0j
    return FunctorialityCheck(abs(lhs - rhs), lhs, rhs)


class WeylCheck(NamedTuple):
    residual: float
    truncation_tail: float


def weyl_relation_check(fock, f, g):
    """||W(f+g) Omega - e^{(i/2) Im<f,g>} W(f) W(g) Omega|| on the truncated space.

    The inner product is antilinear in its first slot, so
    [Phi(f), Phi(g)] = i Im<f, g>. The reported tail is the
    weight an exact coherent state of amplitude |f| + |g| puts above level N.
    """
    f, g = np.asarray(f, dtype=complex), np.asarray(g, dtype=complex)
    om = fock.vacuum()
    lhs = fock.weyl(f + g) @ om
    phase = np.exp(0.5j * np.imag(np.vdot(f, g)))
    rhs = phase * (fock.weyl(f) @ (fock.weyl(g) @ om))
    r2 = 0.5 * (np.linalg.norm(f) + np.linalg.norm(g)) ** 2
    below = sum(math.exp(-r2) * r2**k / math.factorial(k) for k in range(fock.N + 1))
    return WeylCheck(float(np.linalg.norm(lhs - rhs)), max(0.0, 1.0 - below))


def dgamma_spectrum_check(fock, H, k):
    """Max distance between eig(dGamma(H)) on sector k and sums of k eigenvalues of H."""
    H = np.asarray(H, dtype=complex)
    sl = fock.sector_slice(k)
    got = np.sort(np.linalg.eigvalsh(fock.dgamma(H)[sl, sl]))
    ev = np.linalg.eigvalsh(H)
    want = np.sort([sum(c) for c in itertools.combinations_with_replacement(ev, k)]) if k else np.array([0.0])
    return float(np.max(np.abs(got - want)))


def sector_leakage(fock, U):
    """Largest off-sector matrix element of Gamma(U)."""
    G = fock.gamma(U)
    mask = np.ones(G.shape, dtype=bool)
    for k in range(fock.N + 1):
        sl = fock.sector_slice(k)
        mask[sl, sl] = False
    return float(np.max(np.abs(G[mask]))) if mask.any() else 0.0


def random_unitary(n, seed):
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
