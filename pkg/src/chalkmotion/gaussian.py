"""Gaussian pure states, Wigner functions, quantum blobs and metaplectic action.

A state is ``phase * T(z0) phi_{X,Y}`` where

    phi_{X,Y}(x) = (pi hbar)^{-n/4} (det X)^{1/4} exp(-(X + iY) x.x / 2 hbar)

and ``T(z0) psi(x) = exp(i (p0.x - p0.x0/2) / hbar) psi(x - x0)``.  Its Wigner
function is ``(pi hbar)^{-n} exp(-G (z - z0)^2 / hbar)`` with G symplectic.

Metaplectic operators act on the parameters only.  Phases use the principal
branch of ``det(A + iB)^{-1/2}`` per operation, so a product of operators is
reproduced only up to sign.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import trapezoid

from ._linalg import check_symmetric, sqrtm_spd, sym_eig, symmetrize
from .capacity import Ellipsoid, capacity
from .chalkboard import SymplecticBall, ball_normal_form, ball_to_ellipsoid
from .config import DEFAULTS, TOL
from .factorization import LocalElement, pre_iwasawa
from .symplectic import SymplecticMatrix, as_matrix, blocks, rescale, shear, symplectic_form


class CrossCheckError(RuntimeError):
    """The two metaplectic routes disagree."""


@dataclass(frozen=True)
class GaussianState:
    X: np.ndarray
    Y: np.ndarray
    center: np.ndarray = field(default=None)
    phase: complex = 1.0 + 0.0j
    hbar: float = DEFAULTS.hbar

    def __post_init__(self):
        X = check_symmetric(np.atleast_2d(self.X), name="X")
        Y = check_symmetric(np.atleast_2d(self.Y), name="Y")
        if X.shape != Y.shape:
            raise ValueError("X and Y shapes differ")
        sym_eig(X)
        n = X.shape[0]
        center = np.zeros(2 * n) if self.center is None else np.array(self.center, dtype=float).reshape(-1)
        if center.size != 2 * n:
            raise ValueError("center dimension mismatch")
        phase = complex(self.phase)
        if abs(abs(phase) - 1) > 1e-12:
            raise ValueError("phase must have unit modulus")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        for name, val in (("X", X), ("Y", Y), ("center", center)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "phase", phase)
        object.__setattr__(self, "hbar", float(self.hbar))

    @classmethod
    def ground(cls, n, hbar=DEFAULTS.hbar):
        """The standard coherent state ``phi_0`` (X = I, Y = 0, centered)."""
        return cls(np.eye(n), np.zeros((n, n)), hbar=hbar)

    @property
    def n(self):
        return self.X.shape[0]

    def __call__(self, x):
        """Wavefunction at rows of x (shape (k, n) or (n,) or scalar grid for n = 1)."""
        x = np.asarray(x, dtype=float)
        n, hbar = self.n, self.hbar
        pts = x.reshape(-1, n)
        x0, p0 = self.center[:n], self.center[n:]
        d = pts - x0
        Z = self.X + 1j * self.Y
        norm = (np.pi * hbar) ** (-n / 4) * np.linalg.det(self.X) ** 0.25
        gauss = np.exp(-np.einsum("ij,jk,ik->i", d, Z, d) / (2 * hbar))
        shift = np.exp(1j * (pts @ p0 - 0.5 * p0 @ x0) / hbar)
        out = self.phase * norm * shift * gauss
        return out.reshape(x.shape[:-1] if n > 1 else x.shape)

    def same_parameters(self, other, tol=1e-9):
        return (
            np.abs(self.X - other.X).max() <= tol
            and np.abs(self.Y - other.Y).max() <= tol
            and np.abs(self.center - other.center).max() <= tol
        )


def state_matrix(X, Y):
    """``S_{X,Y} = rescale(X^{-1/2}) shear(Y) = [[X^{1/2}, 0], [X^{-1/2} Y, X^{-1/2}]]``, so G = S^T S."""
    R = sqrtm_spd(X)
    Ri = np.linalg.inv(R)
    n = R.shape[0]
    return np.block([[R, np.zeros((n, n))], [Ri @ Y, Ri]])


@dataclass(frozen=True)
class WignerGaussian:
    G: np.ndarray
    center: np.ndarray
    hbar: float

    @property
    def n(self):
        return self.G.shape[0] // 2

    def __call__(self, z):
        d = np.atleast_2d(z) - self.center
        q = np.einsum("ij,jk,ik->i", d, self.G, d)
        return (np.pi * self.hbar) ** (-self.n) * np.exp(-q / self.hbar)

    def covariance(self):
        return 0.5 * self.hbar * np.linalg.inv(self.G)


def wigner_gaussian(s):
    """Closed-form Wigner function: ``G = [[X + Y X^{-1} Y, Y X^{-1}], [X^{-1} Y, X^{-1}]]``."""
    Xi = np.linalg.inv(s.X)
    G = np.block([[s.X + s.Y @ Xi @ s.Y, s.Y @ Xi], [Xi @ s.Y, Xi]])
    return WignerGaussian(symmetrize(G), np.array(s.center), s.hbar)


def wigner_numeric_1d(s, x_grid, p_grid, nodes=1024):
    """Trapezoid quadrature of ``(2 pi hbar)^{-1} int e^{-ipy/hbar} psi(x+y/2) psi*(x-y/2) dy``.

    The y-range is ``8 sqrt(hbar)`` times the largest semi-axis of the unit
    Wigner ellipse ``G z.z <= 1``.  Raises if the grid under-resolves the
    oscillation of the integrand.
    """
    if s.n != 1:
        raise ValueError("wigner_numeric_1d needs n = 1")
    if nodes < 16:
        raise ValueError("too few nodes")
    hbar = s.hbar
    G = wigner_gaussian(s).G
    half = 8 * np.sqrt(hbar) / np.sqrt(np.linalg.eigvalsh(G)[0])
    y = np.linspace(-half, half, nodes)
    dy = y[1] - y[0]
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    p_grid = np.atleast_1d(np.asarray(p_grid, dtype=float))
    x0, p0 = s.center
    freq = np.abs(p_grid - p0).max() + abs(s.Y[0, 0]) * np.abs(x_grid - x0).max() + abs(p0)
    if freq * dy / hbar >= np.pi:
        raise ValueError("grid too coarse for the integrand oscillation")
    out = np.empty((x_grid.size, p_grid.size))
    kernel = np.exp(-1j * np.outer(p_grid, y) / hbar)
    for i, x in enumerate(x_grid):
        f = s(x + y / 2) * np.conj(s(x - y / 2))
        out[i] = trapezoid(kernel * f, dx=dy, axis=1).real / (2 * np.pi * hbar)
    return out


@dataclass(frozen=True)
class CovarianceReport:
    sigma: np.ndarray
    #: per-mode dx_j^2 dp_j^2 - cov(x_j, p_j)^2
    rs: np.ndarray
    #: max |Sxx Spp - Sxp Sxp - hbar^2/4 I|, the block identity of a symplectic sigma
    block_residual: float


def covariance(s):
    """``Sigma = (hbar/2) [[X^{-1}, -X^{-1} Y], [-Y X^{-1}, X + Y X^{-1} Y]]`` with an uncertainty report.

    The per-mode Robertson-Schroedinger quantities equal ``hbar^2/4`` for
    n = 1 and for uncorrelated modes; in general they are ``>= hbar^2/4``.
    The block identity ``Sxx Spp - Sxp^2 = hbar^2/4 I`` holds for every state.
    """
    n, hbar = s.n, s.hbar
    Xi = np.linalg.inv(s.X)
    sigma = 0.5 * hbar * np.block([[Xi, -Xi @ s.Y], [-s.Y @ Xi, s.X + s.Y @ Xi @ s.Y]])
    sigma = symmetrize(sigma)
    Sxx, Sxp, Spp = sigma[:n, :n], sigma[:n, n:], sigma[n:, n:]
    rs = np.diag(Sxx) * np.diag(Spp) - np.diag(Sxp) ** 2
    block = np.abs(Sxx @ Spp - Sxp @ Sxp - 0.25 * hbar**2 * np.eye(n)).max()
    return CovarianceReport(sigma, rs, float(block))


# ---------------------------------------------------------------------------
# Quantum blobs


@dataclass(frozen=True)
class QuantumBlob:
    ball: SymplecticBall

    def __post_init__(self):
        if self.ball.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def hbar(self):
        return self.ball.radius**2

    def ellipsoid(self):
        return ball_to_ellipsoid(self.ball)

    def capacity(self):
        return capacity(self.ellipsoid())


def blob_from_gaussian(s):
    """Blob ``T(z0) shear(-Y) rescale(X^{1/2}) B(sqrt(hbar))``; its ellipsoid is ``{G z.z <= hbar}``."""
    S = shear(-s.Y) @ rescale(sqrtm_spd(s.X))
    return QuantumBlob(SymplecticBall(S, s.center, np.sqrt(s.hbar)))


def gaussian_from_blob(q):
    """Inverse of :func:`blob_from_gaussian`: with normal form (P, L), ``X = L^2`` and ``Y = -P``."""
    nf = ball_normal_form(q.ball)
    return GaussianState(nf.L @ nf.L, -nf.P, nf.z0, 1.0, q.hbar)


def rotation_family_blobs(lam, n_rot=16, hbar=1.0, center=(0.0, 0.0)):
    """Blobs ``T(z0) U_k rescale(lam) B(sqrt(hbar))`` for planar rotations ``U_k`` by ``k pi / n_rot``."""
    out = []
    for k in range(n_rot):
        th = np.pi * k / n_rot
        c, s_ = np.cos(th), np.sin(th)
        U = SymplecticMatrix([[c, s_], [-s_, c]])
        out.append(QuantumBlob(SymplecticBall(U @ rescale([[lam]]), center, np.sqrt(hbar))))
    return out


def blob_intersection_radius(blobs, samples=20_000, seed=0):
    """Largest distance to the common center among sampled points lying in every blob."""
    E = [b.ellipsoid() for b in blobs]
    z0 = E[0].center
    reach = max(e.semi_axes().max() for e in E)
    rng = np.random.default_rng(seed)
    pts = z0 + rng.uniform(-reach, reach, size=(samples, z0.size))
    inside = np.ones(samples, dtype=bool)
    for e in E:
        inside &= e.contains(pts)
    if not inside.any():
        return 0.0
    return float(np.linalg.norm(pts[inside] - z0, axis=1).max())


# ---------------------------------------------------------------------------
# Metaplectic action


def _principal_phase(A, B):
    """``det(A + iB)^{-1/2}`` normalized to modulus one, principal branch."""
    d = np.linalg.det(A + 1j * B)
    r = d ** -0.5
    return r / abs(r)


def _gamma_route(S):
    """``X' + i Y' = -i (C + iD)(A + iB)^{-1}`` for the image of phi_0."""
    A, B, C, D = blocks(S)
    W = A + 1j * B
    if np.linalg.cond(W) > 1e12:
        raise CrossCheckError("A + iB is numerically singular")
    Z = -1j * (C + 1j * D) @ np.linalg.inv(W)
    return symmetrize(Z.real), symmetrize(Z.imag)


def _local_route(S):
    """Image of phi_0 through the pre-Iwasawa factors: ``X' = L^2``, ``Y' = -P``."""
    f = pre_iwasawa(S)
    return f.L @ f.L, -f.P


def metaplectic_apply(S, s, maslov=0, crosscheck=False):
    """Apply the metaplectic operator over S to the state s.

    ``s = phase T(z0) phi_{X,Y}`` and ``phi_{X,Y} = Shat_{X,Y}^{-1} phi_0``
    with ``S_{X,Y}^{-1} = shear(-Y) rescale(X^{1/2})``, so the image is computed
    from ``S S_{X,Y}^{-1}`` acting on phi_0; the center moves to ``S z0``.
    ``maslov`` in {0, 2} multiplies the phase by ``i^maslov``.
    """
    if maslov not in (0, 2):
        raise ValueError("maslov must be 0 or 2")
    S = as_matrix(S)
    if S.shape[0] != 2 * s.n:
        raise ValueError("dimension mismatch")
    Ss = np.linalg.inv(state_matrix(s.X, s.Y))
    T = S @ Ss
    X2, Y2 = _local_route(T)
    if crosscheck:
        Xg, Yg = _gamma_route(T)
        dev = max(np.abs(Xg - X2).max(), np.abs(Yg - Y2).max())
        if dev > TOL.metaplectic:
            raise CrossCheckError(f"metaplectic routes differ by {dev:.3e}")
    A, B, _, _ = blocks(T)
    phase = s.phase * _principal_phase(A, B) * (1j**maslov)
    return GaussianState(X2, Y2, S @ s.center, phase, s.hbar)


def metaplectic_routes(S, s):
    """Both parameter routes for the image of s (test and debug helper)."""
    T = as_matrix(S) @ np.linalg.inv(state_matrix(s.X, s.Y))
    return _gamma_route(T), _local_route(T)


def heisenberg_weyl_apply(z, s):
    """``T(z) s`` using ``T(z) T(z0) = exp(i sigma(z, z0) / 2 hbar) T(z + z0)``."""
    z = np.asarray(z, dtype=float)
    phase = s.phase * np.exp(0.5j * symplectic_form(z, s.center) / s.hbar)
    return replace(s, center=s.center + z, phase=phase)


@dataclass(frozen=True)
class GaussianTransport:
    """The operator ``exp(i chi / hbar) T(z) Rhat`` with ``R = shear(-P) rescale(L)``."""

    chi: float
    z: np.ndarray
    P: np.ndarray
    L: np.ndarray

    def matrix(self):
        return as_matrix(LocalElement(-self.P, self.L).linear())

    def apply(self, s):
        out = heisenberg_weyl_apply(self.z, metaplectic_apply(self.matrix(), s))
        return replace(out, phase=out.phase * np.exp(1j * self.chi / s.hbar))


def gaussian_transport(s, s2):
    """Local-group data carrying s to s2 (phases are taken equal).

    ``L = X^{-1/2} X'^{1/2}``, ``P = Y' - L^T Y L``, ``z = z0' - R z0`` and
    ``chi = sigma(z0', -R z0) / 2``.
    """
    if s.n != s2.n or abs(s.hbar - s2.hbar) > 1e-15:
        raise ValueError("states differ in n or hbar")
    L = np.linalg.inv(sqrtm_spd(s.X)) @ sqrtm_spd(s2.X)
    P = symmetrize(s2.Y - L.T @ s.Y @ L)
    R = as_matrix(LocalElement(-P, L).linear())
    Rz = R @ s.center
    return GaussianTransport(0.5 * symplectic_form(s2.center, -Rz), s2.center - Rz, P, L)


@dataclass(frozen=True)
class StrtReport:
    times: np.ndarray
    max_deviation: float
    full_phase: np.ndarray
    X: np.ndarray
    Y: np.ndarray


def strt_equivalence_check(iso, hbar=1.0):
    """Propagate phi_0 by ``S_t`` and by the local parts ``R_t`` and compare parameters.

    The full-route phase ``arg det(A_t + i B_t)^{-1/2}`` is unwrapped along
    the grid; the local route carries no phase.
    """
    if iso.n != 1:
        raise ValueError("strt_equivalence_check needs n = 1")
    phi0 = GaussianState.ground(1, hbar)
    dev = 0.0
    args, Xs, Ys = [], [], []
    for S in iso.S:
        Xg, Yg = _gamma_route(S)
        f = pre_iwasawa(S)
        R = LocalElement(f.P, f.L).linear()
        reduced = metaplectic_apply(R, phi0)
        dev = max(dev, np.abs(Xg - reduced.X).max(), np.abs(Yg - reduced.Y).max())
        A, B, _, _ = blocks(S)
        args.append(np.angle(np.linalg.det(A + 1j * B)))
        Xs.append(reduced.X)
        Ys.append(reduced.Y)
    # unwrap before halving: the halved angle jumps by pi, which unwrap ignores
    return StrtReport(iso.times, float(dev), -0.5 * np.unwrap(np.array(args)), np.array(Xs), np.array(Ys))
