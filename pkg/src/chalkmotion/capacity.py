"""Williamson normal form, symplectic spectra and capacities of ellipsoids.

Also hosts the geometric helpers that act on ellipsoids without reference to
the symplectic structure: support functions, Hausdorff distance and the
minimum-volume enclosing ellipsoid.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy import optimize
from scipy.stats import norm, qmc

from ._linalg import NotPositiveDefinite, check_symmetric, inv_sqrtm_spd, sqrtm_spd, sym_eig
from .config import DEFAULTS, TOL
from .symplectic import SymplecticMatrix, as_matrix, standard_J


class WilliamsonError(RuntimeError):
    """The Williamson construction missed its residual tolerance."""


class DegeneratePointSet(ValueError):
    """Points do not span the ambient space affinely."""


@dataclass(frozen=True)
class Ellipsoid:
    """The set ``{z : (z - center)^T shape (z - center) <= level^2}``."""

    center: np.ndarray
    shape: np.ndarray
    level: float = 1.0

    def __post_init__(self):
        shape = check_symmetric(self.shape, name="shape")
        center = np.array(self.center, dtype=float).reshape(-1)
        if center.size != shape.shape[0]:
            raise ValueError("center and shape dimensions differ")
        if not self.level > 0:
            raise ValueError("level must be positive")
        try:
            sym_eig(shape)
        except NotPositiveDefinite as exc:
            raise ValueError("shape matrix must be positive definite") from exc
        shape.setflags(write=False)
        center.setflags(write=False)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "level", float(self.level))

    @classmethod
    def ball(cls, radius, dim, center=None):
        center = np.zeros(dim) if center is None else center
        return cls(center, np.eye(dim), radius)

    @property
    def dim(self):
        return self.shape.shape[0]

    @property
    def n(self):
        return self.dim // 2

    def quadratic_form(self, points):
        d = np.atleast_2d(points) - self.center
        return np.einsum("ij,jk,ik->i", d, self.shape, d)

    def contains(self, points, slack=0.0):
        return self.quadratic_form(points) <= self.level**2 * (1 + slack)

    def semi_axes(self):
        return self.level / np.sqrt(np.linalg.eigvalsh(self.shape))

    def volume(self):
        from math import gamma, pi

        d = self.dim
        return pi ** (d / 2) / gamma(d / 2 + 1) * np.prod(self.semi_axes())

    def normalized(self):
        """Same set with level 1."""
        return Ellipsoid(self.center, self.shape / self.level**2, 1.0)

    def support(self, u):
        """Support function ``<u, c> + level * sqrt(u^T shape^{-1} u)`` for rows of u."""
        u = np.atleast_2d(u)
        cov = np.linalg.inv(self.shape)
        return u @ self.center + self.level * np.sqrt(np.einsum("ij,jk,ik->i", u, cov, u))

    def image(self, F, shift=None):
        """Image under ``z -> F z + shift``."""
        F = as_matrix(F)
        Finv = np.linalg.inv(F)
        shift = np.zeros(self.dim) if shift is None else np.asarray(shift, dtype=float)
        return Ellipsoid(F @ self.center + shift, Finv.T @ self.shape @ Finv, self.level)

    def affine_image(self, f):
        """Image under an :class:`AffineSymplectic` map."""
        return self.image(f.linear, f.shift)

    def dilate(self, lam):
        """``lam * E`` (the center is scaled too)."""
        return Ellipsoid(lam * self.center, self.shape, abs(lam) * self.level)

    def rescale_about_center(self, lam):
        return Ellipsoid(self.center, self.shape, lam * self.level)

    def boundary_points(self, count=10_000, seed=0):
        """Low-discrepancy points on the boundary via a Cholesky map of sphere points."""
        u = sphere_directions(self.dim, count, seed=seed)
        # shape = R^T R  =>  z = c + level R^{-1} u lies on the boundary
        R = np.linalg.cholesky(self.shape).T
        return self.center + self.level * np.linalg.solve(R, u.T).T

    def same_set(self, other, tol=1e-8):
        a, b = self.normalized(), other.normalized()
        scale = max(1.0, np.abs(a.shape).max())
        return (
            np.abs(a.center - b.center).max() <= tol * max(1.0, np.abs(a.center).max())
            and np.abs(a.shape - b.shape).max() <= tol * scale
        )


@dataclass(frozen=True)
class WilliamsonFactors:
    S: SymplecticMatrix
    lambdas: np.ndarray

    def diagonal(self):
        return np.diag(np.concatenate([self.lambdas, self.lambdas]))


def _check_spd(M):
    M = check_symmetric(M, name="M")
    if M.shape[0] % 2:
        raise ValueError("M must have even size")
    try:
        sym_eig(M)
    except NotPositiveDefinite as exc:
        raise ValueError("M is not positive definite") from exc
    return M


def symplectic_eigenvalues(M):
    """Symplectic eigenvalues of an SPD matrix, in descending order.

    They are the moduli of the eigenvalues of ``J M``, computed through the
    antisymmetric matrix ``K = M^{1/2} J M^{1/2}`` (``iK`` is Hermitian).
    """
    M = _check_spd(M)
    n = M.shape[0] // 2
    R = sqrtm_spd(M)
    K = R @ standard_J(n) @ R
    w = np.linalg.eigvalsh(1j * K)
    return np.sort(w[n:])[::-1]


def williamson(M):
    """Symplectic S with ``S^T M S = diag(Lambda, Lambda)``, Lambda descending.

    Built from the real Schur form of ``K = M^{1/2} J M^{1/2}``: an orthogonal
    O with ``O^T K O`` made of 2x2 blocks ``[[0, l], [-l, 0]]`` (l > 0), then
    ``S = M^{-1/2} O diag(Lambda, Lambda)^{1/2}``.  S is not unique when
    eigenvalues repeat; only the residual is guaranteed.
    """
    M = _check_spd(M)
    n = M.shape[0] // 2
    R = sqrtm_spd(M)
    K = R @ standard_J(n) @ R
    K = 0.5 * (K - K.T)
    T, O = sla.schur(K, output="real")
    lambdas = np.empty(n)
    cols_x, cols_p = [], []
    j = 0
    for k in range(n):
        b = T[j, j + 1]
        a, c = O[:, j], O[:, j + 1]
        if b < 0:
            a, c = c, a
        lambdas[k] = abs(b)
        cols_x.append(a)
        cols_p.append(c)
        j += 2
    order = np.argsort(-lambdas, kind="stable")
    lambdas = lambdas[order]
    # fix the sign so that the first nonzero component of each x-column is positive
    Ox = np.column_stack([cols_x[i] for i in order])
    Op = np.column_stack([cols_p[i] for i in order])
    for k in range(n):
        lead = Ox[np.argmax(np.abs(Ox[:, k]) > 1e-12), k]
        if lead < 0:
            Ox[:, k] *= -1
            Op[:, k] *= -1
    Oprime = np.hstack([Ox, Op])
    d = np.sqrt(np.concatenate([lambdas, lambdas]))
    S = inv_sqrtm_spd(M) @ Oprime * d
    diag = np.diag(np.concatenate([lambdas, lambdas]))
    residual = np.abs(S.T @ M @ S - diag).max() / max(1.0, np.abs(M).max())
    if residual > TOL.williamson:
        raise WilliamsonError(f"Williamson residual {residual:.3e}")
    return WilliamsonFactors(SymplecticMatrix(S, tol=1e-8), lambdas)


def capacity(E):
    """Symplectic capacity ``pi level^2 / lambda_max`` of a phase-space ellipsoid."""
    return float(np.pi * E.level**2 / symplectic_eigenvalues(E.shape)[0])


def sphere_directions(dim, count, seed=0):
    """Deterministic low-discrepancy unit vectors in R^dim.

    Equally spaced angles for dim == 2, otherwise an unscrambled Sobol set
    pushed through the normal quantile function and normalized (antipodal
    pairs included).
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        theta = 2 * np.pi * (np.arange(count) + 0.5 * (seed % 2)) / count
        return np.column_stack([np.cos(theta), np.sin(theta)])
    half = max(1, count // 2)
    m = int(np.ceil(np.log2(half + 1)))
    pts = qmc.Sobol(d=dim, scramble=False).random_base2(m)[1 : half + 1]
    pts = (pts + 0.5 / 2**m + seed * 0.6180339887498949) % 1.0
    g = norm.ppf(pts)
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.vstack([g, -g])


def hausdorff_distance(E1, E2, n_dirs=None, refine=True):
    """Hausdorff distance of two ellipsoids via their support functions.

    ``d_H = sup_{|u|=1} |h_1(u) - h_2(u)|`` for convex bodies.  The supremum
    is taken over a deterministic direction set and, with ``refine``, polished
    by a local maximization started from the best few directions.
    """
    n_dirs = DEFAULTS.n_dirs if n_dirs is None else n_dirs
    if n_dirs < 16:
        raise ValueError("n_dirs must be >= 16")
    if E1.dim != E2.dim:
        raise ValueError("dimension mismatch")
    u = sphere_directions(E1.dim, n_dirs)
    gap = np.abs(E1.support(u) - E2.support(u))
    best = float(gap.max())
    if not refine or best == 0.0:
        return best

    def neg_gap(v):
        nv = np.linalg.norm(v)
        if nv == 0:
            return 0.0
        w = v / nv
        return -abs(E1.support(w)[0] - E2.support(w)[0])

    for idx in np.argsort(gap)[-3:]:
        res = optimize.minimize(neg_gap, u[idx], method="BFGS", options={"gtol": 1e-12})
        best = max(best, -float(res.fun))
    return best


def mvee(points, tol=None, max_iter=None):
    """Minimum-volume enclosing ellipsoid by Khachiyan's barycentric ascent.

    Uses the Todd-Yildirim away steps, which shrink weights of interior
    points and converge linearly.  Iterates until every lifted point satisfies
    ``q_i^T X^{-1} q_i <= (d+1)(1+tol)``, then scales the level so that all
    points lie inside exactly.
    """
    tol = DEFAULTS.mvee_tol if tol is None else tol
    max_iter = DEFAULTS.mvee_max_iter if max_iter is None else max_iter
    P = np.asarray(points, dtype=float)
    N, d = P.shape
    if N < d + 1 or np.linalg.matrix_rank(P - P.mean(axis=0)) < d:
        raise DegeneratePointSet("need d+1 affinely independent points")
    Q = np.hstack([P, np.ones((N, 1))])
    u = np.full(N, 1.0 / N)
    for _ in range(max_iter):
        X = (Q.T * u) @ Q
        g = np.einsum("ij,ij->i", Q @ np.linalg.inv(X), Q)
        j_up = int(np.argmax(g))
        active = np.flatnonzero(u > 0)
        j_dn = active[np.argmin(g[active])]
        up = g[j_up] / (d + 1) - 1
        if up <= tol:
            break
        dn = 1 - g[j_dn] / (d + 1)
        j = j_up if up >= dn else j_dn
        step = (g[j] - d - 1) / ((d + 1) * (g[j] - 1))
        if j == j_dn and j != j_up:
            step = max(step, -u[j] / (1 - u[j]))
        u *= 1 - step
        u[j] += step
        u[u < 0] = 0.0
    else:
        raise RuntimeError("mvee did not converge")
    c = P.T @ u
    cov = (P.T * u) @ P - np.outer(c, c)
    A = np.linalg.inv(cov) / d
    E = Ellipsoid(c, A, 1.0)
    worst = E.quadratic_form(P).max()
    return Ellipsoid(c, A / worst, 1.0) if worst > 1 else E


def capacity_continuity_probe(E, delta, members=24, seed=0):
    """Max capacity change over a fixed family of perturbations within Hausdorff delta.

    The family mixes rescalings about the center, translations and random
    symmetric shape perturbations; each member is shrunk toward E until its
    Hausdorff distance to E is at most ``delta``.  Returns a dict report.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    c0 = capacity(E)
    if delta == 0:
        return {"delta": 0.0, "max_delta_capacity": 0.0, "max_hausdorff": 0.0, "members": 1}
    rng = np.random.default_rng(seed)
    rho = E.semi_axes().max()
    candidates = [
        lambda s: E.rescale_about_center(1 + s * delta / rho),
        lambda s: E.rescale_about_center(1 - s * delta / rho),
    ]
    for _ in range(members):
        w = rng.normal(size=E.dim)
        w /= np.linalg.norm(w)
        K = rng.normal(size=(E.dim, E.dim))
        K = 0.5 * (K + K.T)
        K /= np.linalg.norm(K, 2)
        candidates.append(lambda s, w=w: Ellipsoid(E.center + s * delta * w, E.shape, E.level))
        candidates.append(lambda s, K=K: _shape_perturbed(E, K, s * delta / rho))
    worst_c, worst_h = 0.0, 0.0
    for make in candidates:
        s = 1.0
        for _ in range(60):
            F = make(s)
            if F is not None:
                h = hausdorff_distance(E, F, n_dirs=64)
                if h <= delta * (1 + 1e-9):
                    worst_c = max(worst_c, abs(capacity(F) - c0))
                    worst_h = max(worst_h, h)
                    break
            s *= 0.8
    return {
        "delta": float(delta),
        "max_delta_capacity": float(worst_c),
        "max_hausdorff": float(worst_h),
        "members": len(candidates),
    }


def _shape_perturbed(E, K, eta):
    # M' = M^{1/2} (I + eta K) M^{1/2}
    R = sqrtm_spd(E.shape)
    M = R @ (np.eye(E.dim) + eta * K) @ R
    try:
        return Ellipsoid(E.center, M, E.level)
    except ValueError:
        return None
