"""Numerical tolerances and defaults shared across the package."""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    #: symplecticity check, relative to max(1, ||S||^2)
    symp: float = 1e-9
    #: generic symmetry check for input matrices
    sym: float = 1e-8
    #: relative scale for "free" detection: |det B| > det * ||B||^n
    det: float = 1e-10
    #: eigenvalue floor for symmetric square roots
    eig_floor: float = 1e-14
    #: factorization reconstruction residual (relative)
    factor: float = 1e-9
    #: Williamson residual (relative to ||M||)
    williamson: float = 1e-8
    #: dual-route metaplectic cross-check
    metaplectic: float = 1e-8


@dataclass(frozen=True)
class Defaults:
    dt: float = 1e-3
    T: float = 1.0
    n_dirs: int = 512
    mvee_tol: float = 1e-7
    mvee_max_iter: int = 100_000
    hbar: float = 1.0
    #: Gauss-Legendre nodes used by the nonlinear generator
    quad_points: int = 16


TOL = Tolerances()
DEFAULTS = Defaults()


def with_tolerances(**changes) -> Tolerances:
    """Return a copy of the default tolerances with some fields replaced."""
    return replace(TOL, **changes)
