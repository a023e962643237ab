"""Symplectic balls and their capacity-preserving motions.

A symplectic ball ``T(z0) S B(eps)`` depends on S only through the local part
of its pre-Iwasawa factorization, because rotations fix the centered ball.
Moving the ball by an affine symplectic flow therefore reduces to moving its
center and updating a local-group element.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._linalg import check_symmetric
from .capacity import Ellipsoid, capacity, mvee
from .factorization import LocalElement, pre_iwasawa, sp0_quotient
from .flows import _YOSHIDA, QuadraticHamiltonian, SymplecticIsotopy, _cayley
from .symplectic import (
    AffineSymplectic,
    SymplecticMatrix,
    as_matrix,
    standard_J,
    symplectic_inverse,
)


class StepUnderflow(RuntimeError):
    """Adaptive step control could not meet the tolerance (orbit blow-up)."""


@dataclass(frozen=True)
class SymplecticBall:
    """``T(center) S B(radius)``."""

    S: SymplecticMatrix
    center: np.ndarray
    radius: float

    def __post_init__(self):
        S = self.S if isinstance(self.S, SymplecticMatrix) else SymplecticMatrix(self.S)
        center = np.array(self.center, dtype=float).reshape(-1)
        if center.size != 2 * S.n:
            raise ValueError("center dimension does not match S")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        center.setflags(write=False)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def n(self):
        return self.S.n

    @classmethod
    def standard(cls, radius, n, center=None):
        center = np.zeros(2 * n) if center is None else center
        return cls(SymplecticMatrix.identity(n), center, radius)

    def ellipsoid(self):
        return ball_to_ellipsoid(self)


def ball_to_ellipsoid(b):
    """``Ellipsoid(z0, (S S^T)^{-1}, eps)``."""
    Sinv = as_matrix(symplectic_inverse(b.S))
    return Ellipsoid(b.center, Sinv.T @ Sinv, b.radius)


@dataclass(frozen=True)
class BallNormalForm:
    """``T(z0) shear(P) rescale(L) B(eps)`` with P symmetric and L SPD."""

    z0: np.ndarray
    P: np.ndarray
    L: np.ndarray
    radius: float

    def local(self):
        return LocalElement(self.P, self.L)

    def ball(self):
        return SymplecticBall(self.local().linear(), self.z0, self.radius)


def ball_normal_form(b):
    f = pre_iwasawa(b.S)
    return BallNormalForm(np.array(b.center), f.P, f.L, b.radius)


def ball_transport(b, b2, tol=1e-12):
    """The element ``T(z0' - R z0) R`` of the local affine group taking b to b2.

    ``R = R' R^{-1}`` where R, R' are the local parts of the two normal forms.
    """
    if abs(b.radius - b2.radius) > tol * max(1.0, b.radius):
        raise ValueError("balls have different radii")
    nf1, nf2 = ball_normal_form(b), ball_normal_form(b2)
    R = sp0_quotient(nf2.local(), nf1.local()).linear()
    return AffineSymplectic(R, nf2.z0 - R @ nf1.z0)


@dataclass(frozen=True)
class BallTrajectory:
    times: np.ndarray
    balls: list
    local: list
    shadows: Optional[list] = None

    def ellipsoids(self):
        return [ball_to_ellipsoid(b) for b in self.balls]

    def capacities(self):
        return np.array([capacity(e) for e in self.ellipsoids()])

    def centers(self):
        return np.array([b.center for b in self.balls])


def _center_path(iso, z_path):
    if z_path is not None:
        z_path = np.asarray(z_path, dtype=float)
        if z_path.shape != (len(iso), 2 * iso.n):
            raise ValueError("z_path does not match the isotopy grid")
        return z_path
    # S_t T(z_t) = T(S_t z_t) S_t
    return np.einsum("kij,kj->ki", iso.S, iso.shifts())


def chalkboard_motion(iso, b, z_path=None, with_shadows=True):
    """Image of the ball b under ``T(z_t) S_t`` along the grid.

    With ``S = R U`` the ball's factorization and ``R^{-1} S_t R = R'_t U'_t``,
    the image is ``T(z_t + S_t a) R_t S B(eps)`` where ``R_t = R R'_t R^{-1}``
    lies in the local group.  When ``z_path`` is omitted it is read from the
    isotopy's own shifts.
    """
    zt = _center_path(iso, z_path)
    f = pre_iwasawa(b.S)
    R = as_matrix(f.local().linear())
    Rinv = np.linalg.inv(R)
    S = as_matrix(b.S)
    balls, locs, shadows = [], [], []
    for k in range(len(iso)):
        St = iso.S[k]
        Rp = pre_iwasawa(Rinv @ St @ R).local()
        Rt = R @ as_matrix(Rp.linear()) @ Rinv
        ball = SymplecticBall(SymplecticMatrix(Rt @ S, tol=1e-8), zt[k] + St @ b.center, b.radius)
        balls.append(ball)
        locs.append(Rt)
        if with_shadows:
            shadows.append(shadow_x(ball_to_ellipsoid(ball)))
    return BallTrajectory(iso.times, balls, locs, shadows if with_shadows else None)


def shadow_x(E):
    """Orthogonal projection onto x-space: shape ``M_XX - M_XP M_PP^{-1} M_PX``."""
    n = E.n
    M = E.shape
    Mxx, Mxp, Mpp = M[:n, :n], M[:n, n:], M[n:, n:]
    return Ellipsoid(E.center[:n], Mxx - Mxp @ np.linalg.solve(Mpp, Mxp.T), E.level)


def shadow_ball(iso, eps, z_path=None):
    """x-shadows ``T(x_t) (A A^T + B B^T)^{1/2} B^n(eps)`` of the moving ball ``B(eps)``."""
    zt = _center_path(iso, z_path)
    n = iso.n
    out = []
    for k in range(len(iso)):
        A, B = iso.S[k][:n, :n], iso.S[k][:n, n:]
        out.append(Ellipsoid(zt[k][:n], np.linalg.inv(A @ A.T + B @ B.T), eps))
    return out


def subsystem_permutation(n, n_A):
    """Index order ``(x_A, p_A, x_B, p_B)`` from the global ``(x, p)`` order."""
    a = list(range(n_A))
    b = list(range(n_A, n))
    return np.array(a + [n + i for i in a] + b + [n + i for i in b])


def subsystem_project(E, n_A):
    """Projection of E onto the first ``n_A`` degrees of freedom, ``(x_A, p_A)``.

    Coordinates are permuted to ``(x_A, p_A, x_B, p_B)``; the projected shape
    is the Schur complement ``M_AA - M_AB M_BB^{-1} M_BA``.
    """
    n = E.n
    if not 1 <= n_A < n:
        raise ValueError("need 1 <= n_A < n")
    idx = subsystem_permutation(n, n_A)
    M = E.shape[np.ix_(idx, idx)]
    k = 2 * n_A
    Maa, Mab, Mbb = M[:k, :k], M[:k, k:], M[k:, k:]
    return Ellipsoid(E.center[idx][:k], Maa - Mab @ np.linalg.solve(Mbb, Mab.T), E.level)


# ---------------------------------------------------------------------------
# Nearby orbits


def fd_gradient(H, z, t, h=1e-5):
    z = np.asarray(z, dtype=float)
    g = np.empty_like(z)
    for j in range(z.size):
        e = np.zeros_like(z)
        e[j] = h
        g[j] = (H(z + e, t) - H(z - e, t)) / (2 * h)
    return g


def fd_hessian(grad, z, t, h=1e-5):
    z = np.asarray(z, dtype=float)
    cols = []
    for j in range(z.size):
        e = np.zeros_like(z)
        e[j] = h
        cols.append((grad(z + e, t) - grad(z - e, t)) / (2 * h))
    return check_symmetric(np.column_stack(cols), tol=1e-4, name="Hessian")


def _rk4(field, z, t, h):
    k1 = field(z, t)
    k2 = field(z + 0.5 * h * k1, t + 0.5 * h)
    k3 = field(z + 0.5 * h * k2, t + 0.5 * h)
    k4 = field(z + h * k3, t + h)
    return z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass(frozen=True)
class NearbyOrbit:
    """Reference orbit ``z_t`` and the linearized flow ``S_t`` along it."""

    times: np.ndarray
    z: np.ndarray
    S: np.ndarray
    hessians: np.ndarray
    gradients: np.ndarray

    def isotopy(self):
        return SymplecticIsotopy(self.times, self.S)

    def linear_transport(self, points, k=-1):
        """``z_t + S_t (u - z_0)`` for rows u of points."""
        d = np.atleast_2d(points) - self.z[0]
        return self.z[k] + d @ self.S[k].T

    def hamiltonian(self):
        """Quadratic Hamiltonian of the linearized flow (constants dropped).

        ``H0(z, t) = dH(z_t).(z - z_t) + 1/2 D2H(z_t)(z - z_t)^2`` so that
        ``M = D2H(z_t)`` and ``m = dH(z_t) - D2H(z_t) z_t``.
        """
        ms = self.gradients - np.einsum("kij,kj->ki", self.hessians, self.z)
        return QuadraticHamiltonian.from_samples(self.times, self.hessians, ms)


def nearby_orbit(H, z0, times, grad=None, hess=None, rtol=1e-10, min_step=1e-9):
    """Integrate the orbit of ``z0`` and the variational equation along it.

    The center uses classical RK4 with step doubling: each grid interval is
    split until one full step and two half steps agree to ``rtol``.  The
    linearized flow uses the fourth-order triple jump of Cayley steps on each
    accepted sub-interval, with Hessians at orbit points obtained by RK4 from
    the start of the interval; every factor is symplectic.
    """
    z0 = np.asarray(z0, dtype=float)
    times = np.asarray(times, dtype=float)
    n = z0.size // 2
    J = standard_J(n)
    grad = (lambda z, t: fd_gradient(H, z, t)) if grad is None else grad
    hess = (lambda z, t: fd_hessian(grad, z, t)) if hess is None else hess

    def field(z, t):
        return J @ grad(z, t)

    def advance(z, S, t, h):
        full = _rk4(field, z, t, h)
        mid = _rk4(field, z, t, 0.5 * h)
        half = _rk4(field, mid, t + 0.5 * h, 0.5 * h)
        err = np.abs(full - half).max()
        if err <= rtol * max(1.0, np.abs(half).max()):
            s = 0.0
            for g in _YOSHIDA:
                sm = s + 0.5 * g * h
                zm = mid if abs(sm - 0.5 * h) < 1e-15 * h else _rk4(field, z, t, sm)
                S = _cayley(J @ hess(zm, t + sm), g * h) @ S
                s += g * h
            return half, S
        if h < min_step:
            raise StepUnderflow(f"step {h:.2e} at t={t:.6f}")
        z, S = advance(z, S, t, 0.5 * h)
        return advance(z, S, t + 0.5 * h, 0.5 * h)

    zs = [z0]
    Ss = [np.eye(2 * n)]
    for k in range(times.size - 1):
        z, S = advance(zs[-1], Ss[-1], times[k], times[k + 1] - times[k])
        zs.append(z)
        Ss.append(S)
    zs = np.array(zs)
    H2 = np.array([hess(z, t) for z, t in zip(zs, times)])
    G = np.array([grad(z, t) for z, t in zip(zs, times)])
    return NearbyOrbit(times, zs, np.array(Ss), H2, G)


def nonlinear_transport(grad, points, times, substeps=1):
    """Push points along ``z' = J grad(z, t)`` with RK4 (vectorized over rows)."""
    P = np.atleast_2d(np.asarray(points, dtype=float)).copy()
    n = P.shape[1] // 2
    J = standard_J(n)

    def field(Z, t):
        return np.array([J @ grad(z, t) for z in Z])

    for k in range(len(times) - 1):
        h = (times[k + 1] - times[k]) / substeps
        for j in range(substeps):
            P = _rk4(field, P, times[k] + j * h, h)
    return P


def recalibrate(grad, E, times, samples=2000, tol=1e-5):
    """Re-fit a transported ellipsoid to its original capacity.

    Boundary samples of E are pushed by the nonlinear flow, enclosed by their
    minimum-volume ellipsoid, and that ellipsoid is rescaled about its center
    so that its capacity equals ``capacity(E)``.
    """
    pts = nonlinear_transport(grad, E.boundary_points(samples), times)
    # samples of a smooth boundary keep almost every point active, so the
    # ascent converges slowly; a looser tolerance is enough for a surrogate
    F = mvee(pts, tol=tol)
    scale = np.sqrt(capacity(E) / capacity(F))
    return F.rescale_about_center(scale)
