"""Small dense linear-algebra helpers (symmetric roots, checks, stencils)."""

import numpy as np

from .config import TOL


class NotPositiveDefinite(ValueError):
    """A matrix expected to be symmetric positive definite is not (numerically)."""


def symmetrize(a):
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + a.T)


def check_symmetric(a, tol=None, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    tol = TOL.sym if tol is None else tol
    scale = max(1.0, np.abs(a).max())
    if np.abs(a - a.T).max() > tol * scale:
        raise ValueError(f"{name} is not symmetric")
    return symmetrize(a)


def sym_eig(a, floor=None):
    """Eigen-decomposition of a symmetric matrix, refusing non-positive spectra."""
    floor = TOL.eig_floor if floor is None else floor
    w, v = np.linalg.eigh(symmetrize(a))
    if w[0] <= floor * max(1.0, abs(w[-1])):
        raise NotPositiveDefinite(f"smallest eigenvalue {w[0]:.3e} below floor")
    return w, v


def sqrtm_spd(a):
    w, v = sym_eig(a)
    return (v * np.sqrt(w)) @ v.T


def inv_sqrtm_spd(a):
    w, v = sym_eig(a)
    return (v / np.sqrt(w)) @ v.T


def powm_spd(a, power):
    w, v = sym_eig(a)
    return (v * w**power) @ v.T


def is_spd(a):
    try:
        sym_eig(a)
    except NotPositiveDefinite:
        return False
    return True


def time_derivative(values, dt):
    """Derivative of uniformly sampled values along axis 0.

    Fourth-order central differences in the interior and fourth-order
    one-sided five-point stencils on the two outermost samples at each end.
    Falls back to ``np.gradient`` (second order) for fewer than five samples.
    """
    y = np.asarray(values, dtype=float)
    k = y.shape[0]
    if k < 3:
        raise ValueError("need at least 3 samples to differentiate")
    if k < 5:
        return np.gradient(y, dt, axis=0, edge_order=2)
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * dt)
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * dt)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * dt)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * dt)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * dt)
    return d
