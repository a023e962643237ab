"""Quadratic Hamiltonians, their flows, and the generator calculus.

A quadratic Hamiltonian ``H(z, t) = 1/2 M(t) z.z + m(t).z`` has Hamilton
equations ``z' = J (M z + m)``.  Its flow is affine, ``f_t(z) = S_t z + w_t``,
and is stored as ``S_t T(z_t)`` with ``z_t = S_t^{-1} w_t``.

Integration uses the Cayley (implicit midpoint) step, which maps ``sp(n)``
into ``Sp(n)`` exactly, optionally composed into a fourth-order symmetric
triple jump.  Sampled paths are differentiated with the stencils of
:func:`chalkmotion._linalg.time_derivative`.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline
from scipy.linalg import expm

from ._linalg import symmetrize, time_derivative
from .config import DEFAULTS, TOL
from .factorization import pre_iwasawa
from .symplectic import (
    AffineSymplectic,
    SymplecticMatrix,
    as_matrix,
    is_unitary_block,
    rescale,
    shear,
    standard_J,
    symplectic_form,
    symplectic_residual,
)


class CayleyError(RuntimeError):
    """The Cayley solve is numerically singular (step too large)."""


class NewtonFailure(RuntimeError):
    """Inversion of a nonlinear map did not converge."""


# ---------------------------------------------------------------------------
# Hamiltonians


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """``H(z, t) = 1/2 M(t) z.z + m(t).z`` on ``[0, T]``.

    ``Mfun`` and ``mfun`` are callables of t.  Sampled Hamiltonians keep their
    grid in ``times`` and are evaluated between samples by cubic splines.
    """

    n: int
    Mfun: Callable
    mfun: Optional[Callable] = None
    T: float = 1.0
    kind: str = "closed-form"
    times: Optional[np.ndarray] = None

    def M(self, t):
        return symmetrize(self.Mfun(t))

    def m(self, t):
        if self.mfun is None:
            return np.zeros(2 * self.n)
        return np.asarray(self.mfun(t), dtype=float)

    def __call__(self, z, t):
        z = np.asarray(z, dtype=float)
        return 0.5 * z @ self.M(t) @ z + self.m(t) @ z

    def gradient(self, z, t):
        return self.M(t) @ np.asarray(z, dtype=float) + self.m(t)

    def hessian(self, z, t):
        return self.M(t)

    def coefficients(self, t):
        """Monomial coefficients for n = 1: x^2, px, p^2, x, p."""
        if self.n != 1:
            raise ValueError("coefficients() is defined for n = 1")
        M, m = self.M(t), self.m(t)
        return {"x2": 0.5 * M[0, 0], "px": M[0, 1], "p2": 0.5 * M[1, 1], "x": m[0], "p": m[1]}

    def sample(self, times):
        times = np.asarray(times, dtype=float)
        return np.array([self.M(t) for t in times]), np.array([self.m(t) for t in times])

    @classmethod
    def constant(cls, M, m=None, T=1.0):
        M = symmetrize(M)
        m = np.zeros(M.shape[0]) if m is None else np.asarray(m, dtype=float)
        return cls(M.shape[0] // 2, lambda t: M, lambda t: m, T)

    @classmethod
    def zero(cls, n, T=1.0):
        return cls.constant(np.zeros((2 * n, 2 * n)), T=T)

    @classmethod
    def polynomial(cls, M_coeffs, m_coeffs=None, T=1.0):
        """``M(t) = sum_k M_k t^k`` and likewise for m."""
        Mc = np.array([symmetrize(c) for c in M_coeffs])
        dim = Mc.shape[1]
        mc = np.zeros((1, dim)) if m_coeffs is None else np.atleast_2d(np.asarray(m_coeffs, dtype=float))

        def Mfun(t):
            return sum(c * t**k for k, c in enumerate(Mc))

        def mfun(t):
            return sum(c * t**k for k, c in enumerate(mc))

        return cls(dim // 2, Mfun, mfun, T)

    @classmethod
    def from_samples(cls, times, Ms, ms=None):
        times = np.asarray(times, dtype=float)
        Ms = symmetrize_stack(np.asarray(Ms, dtype=float))
        dim = Ms.shape[1]
        ms = np.zeros((times.size, dim)) if ms is None else np.asarray(ms, dtype=float)
        Mspl = CubicSpline(times, Ms, axis=0)
        mspl = CubicSpline(times, ms, axis=0)
        return cls(dim // 2, Mspl, mspl, float(times[-1]), "samples", times)


def symmetrize_stack(Ms):
    return 0.5 * (Ms + np.swapaxes(Ms, -1, -2))


def random_quadratic_hamiltonian(n, seed=0, degree=3, scale=1.0, affine=True, T=1.0):
    """Random polynomial-in-time quadratic Hamiltonian (test and demo helper)."""
    rng = np.random.default_rng(seed)
    dim = 2 * n
    Mc = []
    for _ in range(degree + 1):
        a = rng.uniform(-1, 1, size=(dim, dim))
        Mc.append(scale * symmetrize(a))
    mc = rng.uniform(-1, 1, size=(degree + 1, dim)) if affine else None
    return QuadraticHamiltonian.polynomial(Mc, mc, T)


# ---------------------------------------------------------------------------
# Isotopies


@dataclass(frozen=True)
class SymplecticIsotopy:
    """Samples ``S_t`` (and optionally ``z_t``) of the flow ``f_t = S_t T(z_t)`` on a uniform grid."""

    times: np.ndarray
    S: np.ndarray
    z: Optional[np.ndarray] = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        S = np.asarray(self.S, dtype=float)
        if times.ndim != 1 or S.shape[0] != times.size:
            raise ValueError("times and S lengths differ")
        if S.ndim != 3 or S.shape[1] != S.shape[2] or S.shape[1] % 2:
            raise ValueError("S must have shape (K, 2n, 2n)")
        if np.abs(S[0] - np.eye(S.shape[1])).max() > 1e-9:
            raise ValueError("isotopy must start at the identity")
        worst = max(symplectic_residual(s) for s in S)
        if worst > 10 * TOL.symp:
            raise ValueError(f"non-symplectic sample (residual {worst:.3e})")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "S", S)
        if self.z is not None:
            z = np.asarray(self.z, dtype=float)
            if z.shape != (times.size, S.shape[1]):
                raise ValueError("z must have shape (K, 2n)")
            if np.abs(z[0]).max() > 1e-12:
                raise ValueError("z path must start at 0")
            object.__setattr__(self, "z", z)

    @property
    def n(self):
        return self.S.shape[1] // 2

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])

    def __len__(self):
        return self.times.size

    def index(self, t):
        """Nearest grid index (queries between grid points snap)."""
        return int(np.argmin(np.abs(self.times - t)))

    def at(self, t):
        return SymplecticMatrix(self.S[self.index(t)], tol=10 * TOL.symp)

    def shifts(self):
        return np.zeros((len(self), 2 * self.n)) if self.z is None else self.z

    def affine(self, k):
        """``f_{t_k} = S T(z)`` as an :class:`AffineSymplectic`."""
        return AffineSymplectic.from_linear_then_shift(
            SymplecticMatrix(self.S[k], check=False), self.shifts()[k]
        )

    @classmethod
    def from_function(cls, fun, times, zfun=None):
        """Sample ``fun(t) -> S_t`` (and ``zfun(t) -> z_t``) on ``times``."""
        times = np.asarray(times, dtype=float)
        S = np.array([as_matrix(fun(t)) for t in times])
        z = None if zfun is None else np.array([np.asarray(zfun(t), dtype=float) for t in times])
        return cls(times, S, z)


def uniform_grid(T=None, dt=None):
    T = DEFAULTS.T if T is None else T
    dt = DEFAULTS.dt if dt is None else dt
    if T <= 0 or dt <= 0:
        raise ValueError("T and dt must be positive")
    k = max(1, int(round(T / dt)))
    return np.linspace(0.0, T, k + 1)


# ---------------------------------------------------------------------------
# Generators from flows


def _inverse_stack(S):
    n = S.shape[1] // 2
    A, B, C, D = S[:, :n, :n], S[:, :n, n:], S[:, n:, :n], S[:, n:, n:]
    tr = lambda a: np.swapaxes(a, 1, 2)  # noqa: E731
    top = np.concatenate([tr(D), -tr(B)], axis=2)
    bot = np.concatenate([-tr(C), tr(A)], axis=2)
    return np.concatenate([top, bot], axis=1)


def _generator_stack(S, dt):
    """``M = -J S' S^{-1}`` on every sample, returned with its asymmetry."""
    J = standard_J(S.shape[1] // 2)
    Sdot = time_derivative(S, dt)
    M = -J @ Sdot @ _inverse_stack(S)
    asym = np.abs(M - np.swapaxes(M, 1, 2)).max()
    return symmetrize_stack(M), float(asym)


def generator_from_isotopy(iso):
    """Sampled quadratic Hamiltonian ``M(t) = -J S_t' S_t^{-1}`` of a linear isotopy."""
    if len(iso) < 3:
        raise ValueError("need at least 3 grid points")
    M, _ = _generator_stack(iso.S, iso.dt)
    return QuadraticHamiltonian.from_samples(iso.times, M)


def affine_generator(iso, order="S-then-T"):
    """Quadratic Hamiltonian of ``f_t = S_t T(z_t)`` or ``f_t = T(z_t) S_t``.

    The linear term is ``m = -J S_t z_t'`` for ``S-then-T`` (so that
    ``m.z = sigma(z, S_t z_t')``) and ``m = -J z_t' - M z_t`` for ``T-then-S``.
    """
    if order not in ("S-then-T", "T-then-S"):
        raise ValueError("order must be 'S-then-T' or 'T-then-S'")
    M, _ = _generator_stack(iso.S, iso.dt)
    z = iso.shifts()
    zdot = time_derivative(z, iso.dt)
    J = standard_J(iso.n)
    if order == "S-then-T":
        m = -np.einsum("ij,kjl,kl->ki", J, iso.S, zdot)
    else:
        m = -zdot @ J.T - np.einsum("kij,kj->ki", M, z)
    return QuadraticHamiltonian.from_samples(iso.times, M, m)


def _fd_time(f, t, z, h):
    if t >= 2 * h:
        return (f(t - 2 * h, z) - 8 * f(t - h, z) + 8 * f(t + h, z) - f(t + 2 * h, z)) / (12 * h)
    y = [f(t + k * h, z) for k in range(5)]
    return (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h)


def invert_map(g, y, guess=None, tol=1e-12, max_iter=50, h=1e-6):
    """Solve ``g(u) = y`` by damped Newton with a finite-difference Jacobian."""
    y = np.asarray(y, dtype=float)
    u = y.copy() if guess is None else np.asarray(guess, dtype=float).copy()
    r = g(u) - y
    for _ in range(max_iter):
        if np.linalg.norm(r) <= tol * max(1.0, np.linalg.norm(y)):
            return u
        Jac = np.empty((y.size, y.size))
        for j in range(y.size):
            e = np.zeros(y.size)
            e[j] = h
            Jac[:, j] = (g(u + e) - g(u - e)) / (2 * h)
        step = np.linalg.solve(Jac, r)
        lam = 1.0
        while lam > 1e-6:
            cand = u - lam * step
            rc = g(cand) - y
            if np.linalg.norm(rc) < np.linalg.norm(r):
                u, r = cand, rc
                break
            lam *= 0.5
        else:
            raise NewtonFailure("line search failed")
    if np.linalg.norm(r) <= 1e-8 * max(1.0, np.linalg.norm(y)):
        return u
    raise NewtonFailure("Newton iteration did not converge")


def generator_from_nonlinear_isotopy(f, quad_points=None, h=1e-3):
    """Hamiltonian ``H(z, t) = -int_0^1 sigma(X_t(lam z), z) dlam`` of ``f(t, z)``.

    ``X_t = f_t' o f_t^{-1}`` is the time-dependent vector field of the
    isotopy; ``f_t'`` uses fourth-order differences with step ``h`` and
    ``f_t^{-1}`` uses :func:`invert_map`.  H is normalized by ``H(0, t) = 0``.
    """
    quad_points = DEFAULTS.quad_points if quad_points is None else quad_points
    nodes, weights = leggauss(quad_points)
    lam = 0.5 * (nodes + 1)
    w = 0.5 * weights

    def field(t, y):
        u = invert_map(lambda v: np.asarray(f(t, v), dtype=float), y)
        return _fd_time(lambda s, v: np.asarray(f(s, v), dtype=float), t, u, h)

    def H(z, t):
        z = np.asarray(z, dtype=float)
        return -sum(wk * symplectic_form(field(t, lk * z), z) for lk, wk in zip(lam, w))

    return H


# ---------------------------------------------------------------------------
# Flows from generators

_CBRT2 = 2.0 ** (1.0 / 3.0)
_YOSHIDA = (1.0 / (2.0 - _CBRT2), -_CBRT2 / (2.0 - _CBRT2), 1.0 / (2.0 - _CBRT2))


def _augmented(H, t, J):
    dim = J.shape[0]
    A = np.zeros((dim + 1, dim + 1))
    A[:dim, :dim] = J @ H.M(t)
    A[:dim, dim] = J @ H.m(t)
    return A


def _cayley(A, h):
    eye = np.eye(A.shape[0])
    lhs = eye - 0.5 * h * A
    # I - B is safely invertible when ||B|| < 1/2; only then skip the SVD
    if 0.5 * abs(h) * np.abs(A).sum(axis=0).max() >= 0.5 and np.linalg.cond(lhs) > 1e12:
        raise CayleyError("Cayley solve is singular; reduce the step")
    return np.linalg.solve(lhs, eye + 0.5 * h * A)


def _triple_jump(order):
    """Weights lifting a symmetric method of order ``order - 2`` to ``order``."""
    r = 2.0 ** (1.0 / (order - 1))
    return (1.0 / (2.0 - r), -r / (2.0 - r), 1.0 / (2.0 - r))


def _step(H, t, h, J, order):
    """Propagator over ``[t, t+h]`` for the augmented affine system.

    Order 2 is one Cayley step at the midpoint; orders 4 and 6 are
    recursive triple jumps of it.
    """
    if order == 2:
        return _cayley(_augmented(H, t + 0.5 * h, J), h)
    prop = np.eye(J.shape[0] + 1)
    s = t
    for g in _triple_jump(order):
        prop = _step(H, s, g * h, J, order - 2) @ prop
        s += g * h
    return prop


def flow_from_quadratic(H, T=None, dt=None, order=4):
    """Integrate the flow of H on a uniform grid of ``[0, T]``.

    Each step multiplies by a Cayley transform (``order=2``) or by a
    symmetric composition of Cayley steps (``order=4`` or ``6``).  The linear part is
    symplectic to roundoff at every step.  Returns a :class:`SymplecticIsotopy`
    with ``z_t = S_t^{-1} w_t``.
    """
    if order not in (2, 4, 6):
        raise ValueError("order must be 2, 4 or 6")
    T = H.T if T is None else T
    times = uniform_grid(T, dt)
    h = times[1] - times[0]
    n = H.n
    J = standard_J(n)
    dim = 2 * n
    Phi = np.eye(dim + 1)
    S = np.empty((times.size, dim, dim))
    z = np.empty((times.size, dim))
    S[0], z[0] = np.eye(dim), 0.0
    for k in range(times.size - 1):
        Phi = _step(H, times[k], h, J, order) @ Phi
        S[k + 1] = Phi[:dim, :dim]
        z[k + 1] = np.linalg.solve(S[k + 1], Phi[:dim, dim])
    return SymplecticIsotopy(times, S, z)


def closed_form_affine_flow(M, m, t):
    """Exact flow ``z -> e^{tJM} z + (JM)^{-1}(e^{tJM} - I) J m`` of a constant H.

    Evaluated as the exponential of the augmented matrix ``t [[JM, Jm], [0, 0]]``;
    the shift block is the phi_1 series, so singular JM needs no special case.
    """
    M = symmetrize(M)
    dim = M.shape[0]
    J = standard_J(dim // 2)
    A = np.zeros((dim + 1, dim + 1))
    A[:dim, :dim] = J @ M
    A[:dim, dim] = J @ np.asarray(m, dtype=float)
    E = expm(t * A)
    return AffineSymplectic(SymplecticMatrix(E[:dim, :dim], tol=1e-8), E[:dim, dim])


class FlowEvaluator:
    """Flow of H at arbitrary times.

    The flow is stored on a grid of step ``dt``; a query integrates one
    step of the same order from the nearest grid point below.
    """

    def __init__(self, H, dt=None, T=None, order=4):
        if order not in (2, 4, 6):
            raise ValueError("order must be 2, 4 or 6")
        self.H = H
        self.order = order
        self.dt = DEFAULTS.dt if dt is None else dt
        self.J = standard_J(H.n)
        T = H.T if T is None else T
        self.times = uniform_grid(T, self.dt)
        self.h = self.times[1] - self.times[0]
        props = [np.eye(2 * H.n + 1)]
        for k in range(self.times.size - 1):
            props.append(_step(H, self.times[k], self.h, self.J, order) @ props[-1])
        self.props = np.array(props)

    def propagator(self, t):
        if t < 0:
            raise ValueError("t must be >= 0")
        k = min(int(np.floor(t / self.h)), self.times.size - 1)
        Phi = self.props[k]
        s = self.times[k]
        while t - s > 1e-15:
            step = min(self.h, t - s)
            Phi = _step(self.H, s, step, self.J, self.order) @ Phi
            s += step
        return Phi

    def __call__(self, t):
        """``(S_t, w_t)`` with ``f_t(z) = S_t z + w_t``."""
        Phi = self.propagator(t)
        d = 2 * self.H.n
        return Phi[:d, :d], Phi[:d, d]


# ---------------------------------------------------------------------------
# Generator calculus


def compose_hamiltonians(H, K, dt=None, order=4):
    """``H # K``, the generator of ``f^H_t o f^K_t``.

    ``(H#K)(z, t) = H(z, t) + K((f^H_t)^{-1} z, t)``; with ``f^H_t(z) = S z + w``
    the quadratic part is ``M_H + S^{-T} M_K S^{-1}`` and the linear part
    ``m_H + S^{-T}(m_K - M_K S^{-1} w)``.  Constant terms are dropped.
    """
    if H.n != K.n:
        raise ValueError("dimension mismatch")
    flow = FlowEvaluator(H, dt, T=max(H.T, K.T), order=order)

    @lru_cache(maxsize=64)
    def parts(t):
        S, w = flow(t)
        Sinv = np.linalg.inv(S)
        MK = K.M(t)
        M = H.M(t) + Sinv.T @ MK @ Sinv
        m = H.m(t) + Sinv.T @ (K.m(t) - MK @ (Sinv @ w))
        return M, m

    return QuadraticHamiltonian(H.n, lambda t: parts(t)[0], lambda t: parts(t)[1], max(H.T, K.T))


def inverse_hamiltonian(H, dt=None, order=4):
    """``Hbar(z, t) = -H(f^H_t z, t)``, whose flow is ``(f^H_t)^{-1}``."""
    flow = FlowEvaluator(H, dt, order=order)

    @lru_cache(maxsize=64)
    def parts(t):
        S, w = flow(t)
        MH = H.M(t)
        return -S.T @ MH @ S, -S.T @ (MH @ w + H.m(t))

    return QuadraticHamiltonian(H.n, lambda t: parts(t)[0], lambda t: parts(t)[1], H.T)


def conjugate_generator(H, g):
    """``H o g``; its flow is ``g^{-1} f^H_t g``."""
    g = as_matrix(g)
    return QuadraticHamiltonian(H.n, lambda t: g.T @ H.M(t) @ g, lambda t: g.T @ H.m(t), H.T)


# ---------------------------------------------------------------------------
# Iwasawa sum


def _local_generator(P, L, Pdot, Ldot):
    """Generator of ``t -> shear(P_t) rescale(L_t)`` (L symmetric).

    ``M = [[N, -L' L^{-1}], [-L^{-1} L', 0]]`` with
    ``N = L' L^{-1} P + P L^{-1} L' - P'``.
    """
    Linv = np.linalg.inv(L)
    N = Ldot @ Linv @ P + P @ Linv @ Ldot - Pdot
    return np.block([[symmetrize(N), -Ldot @ Linv], [-Linv @ Ldot, np.zeros_like(L)]]), N


@dataclass(frozen=True)
class IwasawaSum:
    """Generators of the factors of ``S_t = shear(P_t) rescale(L_t) U_t`` on a grid.

    ``M_S = M_R + R^{-T} M_U R^{-1}`` with ``R = shear(P) rescale(L)``, and
    ``M_R = M_V + V^{-T} M_L V^{-1}`` with ``V = shear(P)``.
    """

    times: np.ndarray
    P: np.ndarray
    L: np.ndarray
    Q: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    W: np.ndarray
    N: np.ndarray
    M_S: np.ndarray
    M_V: np.ndarray
    M_L: np.ndarray
    M_U: np.ndarray
    M_R: np.ndarray

    def _ham(self, Ms):
        return QuadraticHamiltonian.from_samples(self.times, Ms)

    @property
    def H_V(self):
        return self._ham(self.M_V)

    @property
    def H_L(self):
        return self._ham(self.M_L)

    @property
    def H_U(self):
        return self._ham(self.M_U)

    @property
    def H_R(self):
        return self._ham(self.M_R)

    @property
    def H_S(self):
        return self._ham(self.M_S)

    def local_matrix(self, k):
        return as_matrix(shear(self.P[k])) @ as_matrix(rescale(self.L[k]))

    def sum_residual(self):
        """Max over the grid of ``|M_S - M_R - R^{-T} M_U R^{-1}|``."""
        worst = 0.0
        for k in range(self.times.size):
            Rinv = np.linalg.inv(self.local_matrix(k))
            rhs = self.M_R[k] + Rinv.T @ self.M_U[k] @ Rinv
            worst = max(worst, np.abs(self.M_S[k] - rhs).max())
        return worst

    def local_residual(self):
        """Max over the grid of ``|M_R - M_V - V^{-T} M_L V^{-1}|``."""
        worst = 0.0
        for k in range(self.times.size):
            Vinv = as_matrix(shear(-self.P[k]))
            rhs = self.M_V[k] + Vinv.T @ self.M_L[k] @ Vinv
            worst = max(worst, np.abs(self.M_R[k] - rhs).max())
        return worst


def _unitary_parts(X, Y, Xdot, Ydot):
    Z = Ydot @ X.T - Xdot @ Y.T
    W = Xdot @ X.T + Ydot @ Y.T
    return Z, W


def _unitary_M(Z, W):
    return np.block([[symmetrize(Z), -W], [W, symmetrize(Z)]])


def iwasawa_sum(iso):
    """Pre-Iwasawa factors along an isotopy and the generators of each factor.

    Shear part: ``H_V = -1/2 P' x.x``.  Rescaling: ``H_L = -p.L^{-1}L' x``.
    Rotation: ``H_U = 1/2 Z (x.x + p.p) + p.W x`` with ``Z = Y'X^T - X'Y^T``
    and the antisymmetric ``W = X'X^T + Y'Y^T`` (zero when n = 1).  Local
    part: ``H_R = 1/2 N x.x - p.L^{-1}L' x``.
    """
    times, dt = iso.times, iso.dt
    facs = [pre_iwasawa(s) for s in iso.S]
    P = np.array([f.P for f in facs])
    L = np.array([f.L for f in facs])
    X = np.array([f.X for f in facs])
    Y = np.array([f.Y for f in facs])
    Q = np.array([f.Q for f in facs])
    Pd, Ld = time_derivative(P, dt), time_derivative(L, dt)
    Xd, Yd = time_derivative(X, dt), time_derivative(Y, dt)
    n = iso.n
    zero = np.zeros((n, n))
    M_V, M_L, M_U, M_R, Zs, Ws, Ns = [], [], [], [], [], [], []
    for k in range(times.size):
        M_V.append(np.block([[-Pd[k], zero], [zero, zero]]))
        Linv = np.linalg.inv(L[k])
        A = Ld[k] @ Linv
        M_L.append(np.block([[zero, -A], [-A.T, zero]]))
        Z, W = _unitary_parts(X[k], Y[k], Xd[k], Yd[k])
        Zs.append(Z)
        Ws.append(W)
        M_U.append(_unitary_M(Z, W))
        MR, N = _local_generator(P[k], L[k], Pd[k], Ld[k])
        M_R.append(MR)
        Ns.append(N)
    M_S, _ = _generator_stack(iso.S, dt)
    return IwasawaSum(
        times, P, L, Q, X, Y, np.array(Zs), np.array(Ws), np.array(Ns),
        M_S, np.array(M_V), symmetrize_stack(np.array(M_L)), np.array(M_U), np.array(M_R),
    )


def unitary_generator(U_path, tol=1e-8):
    """Generator of a path of symplectic rotations ``[[X, Y], [-Y, X]]``.

    Returns the sampled Hamiltonian with ``M = [[Z, -W], [W, Z]]``.  Raises if
    a sample is not a rotation.
    """
    n = U_path.n
    for s in U_path.S:
        if not is_unitary_block(s, tol):
            raise ValueError("sample is not a symplectic rotation")
    X = U_path.S[:, :n, :n]
    Y = U_path.S[:, :n, n:]
    Xd, Yd = time_derivative(X, U_path.dt), time_derivative(Y, U_path.dt)
    Ms = []
    for k in range(len(U_path)):
        Z, W = _unitary_parts(X[k], Y[k], Xd[k], Yd[k])
        Ms.append(_unitary_M(Z, W))
    return QuadraticHamiltonian.from_samples(U_path.times, np.array(Ms))
