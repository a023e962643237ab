"""Pre-Iwasawa and free factorizations, and the local group Sp_0(n).

Every symplectic S factors uniquely as ``S = shear(P) @ rescale(L) @ U`` with
P symmetric, L symmetric positive definite and U a symplectic rotation
``[[X, Y], [-Y, X]]``.  The product ``shear(P) @ rescale(L)`` (upper-right
block zero) is the "local part"; such products form the group Sp_0(n).
"""

from dataclasses import dataclass, field

import numpy as np

from ._linalg import inv_sqrtm_spd, sqrtm_spd, symmetrize
from .config import TOL
from .symplectic import (
    AffineSymplectic,
    SymplecticMatrix,
    as_matrix,
    blocks,
    rescale,
    shear,
    standard_J,
    unitary_block,
)


class FactorizationError(RuntimeError):
    """Reconstruction residual above tolerance."""


class NotFree(ValueError):
    """The upper-right block B is (numerically) singular."""


def _relerr(a, b):
    return np.abs(a - b).max() / max(1.0, np.abs(b).max())


def _checked_sym(P, name):
    scale = max(1.0, np.abs(P).max())
    if np.abs(P - P.T).max() > TOL.sym * scale:
        raise FactorizationError(f"{name} is not symmetric")
    return symmetrize(P)


@dataclass(frozen=True)
class PreIwasawa:
    P: np.ndarray
    L: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    residual: float = 0.0

    @property
    def U(self):
        return unitary_block(self.X, self.Y)

    def local(self):
        return LocalElement(self.P, self.L)

    def reconstruct(self):
        return as_matrix(shear(self.P)) @ as_matrix(rescale(self.L)) @ as_matrix(self.U)

    @property
    def Q(self):
        """``P L^{-1}``, the lower-left block of the local part written as ``[[L^{-1}, 0], [Q, L]]``."""
        return self.P @ np.linalg.inv(self.L)


def pre_iwasawa(S, tol=None):
    """Unique factorization ``S = shear(P) rescale(L) U``.

    ``L = (AA^T + BB^T)^{-1/2}``, ``P = (CA^T + DB^T)(AA^T + BB^T)^{-1}``,
    ``X = L A`` and ``Y = L B``.
    """
    tol = TOL.factor if tol is None else tol
    S = as_matrix(S)
    A, B, C, D = blocks(S)
    G = A @ A.T + B @ B.T
    Ginv = np.linalg.inv(G)
    P = _checked_sym((C @ A.T + D @ B.T) @ Ginv, "P")
    L = inv_sqrtm_spd(G)
    X, Y = L @ A, L @ B
    fac = PreIwasawa(P, L, X, Y)
    res = _relerr(fac.reconstruct(), S)
    if res > tol:
        raise FactorizationError(f"pre-Iwasawa reconstruction residual {res:.3e}")
    return PreIwasawa(P, L, X, Y, residual=float(res))


def dilation_pre_iwasawa(K):
    """Pre-Iwasawa factors of ``rescale(K)`` in closed form.

    ``rescale(K) = rescale((K^T K)^{1/2}) U`` with ``X = (K^T K)^{1/2} K^{-1}``
    orthogonal and ``Y = 0``; no shear part.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    if abs(np.linalg.det(K)) <= TOL.det * max(1.0, np.abs(K).max()) ** K.shape[0]:
        raise ValueError("K is singular")
    L = sqrtm_spd(K.T @ K)
    n = K.shape[0]
    return PreIwasawa(np.zeros((n, n)), L, L @ np.linalg.inv(K), np.zeros((n, n)))


@dataclass(frozen=True)
class FreeFactors:
    """``S = shear(P1) rescale(L) J shear(P2)`` with P1 = D B^{-1}, L = B^{-1}, P2 = B^{-1} A."""

    P1: np.ndarray
    L: np.ndarray
    P2: np.ndarray
    residual: float = 0.0

    def reconstruct(self):
        n = self.L.shape[0]
        return (
            as_matrix(shear(self.P1))
            @ as_matrix(rescale(self.L))
            @ standard_J(n)
            @ as_matrix(shear(self.P2))
        )


def is_free(S):
    _, B, _, _ = blocks(S)
    n = B.shape[0]
    return abs(np.linalg.det(B)) > TOL.det * max(1.0, np.abs(B).max()) ** n


def free_factorization(S, tol=None):
    tol = TOL.factor if tol is None else tol
    if not is_free(S):
        raise NotFree("upper-right block is singular")
    A, B, C, D = blocks(S)
    Binv = np.linalg.inv(B)
    f = FreeFactors(_checked_sym(D @ Binv, "D B^-1"), Binv, _checked_sym(Binv @ A, "B^-1 A"))
    res = _relerr(f.reconstruct(), as_matrix(S))
    if res > tol:
        raise FactorizationError(f"free factorization residual {res:.3e}")
    return FreeFactors(f.P1, f.L, f.P2, residual=float(res))


@dataclass(frozen=True)
class LocalElement:
    """``T(shift) shear(P) rescale(L)``, an element of the inhomogeneous local group.

    With ``shift`` zero this is the linear element ``[[L^{-1}, 0], [P L^{-1}, L^T]]``.
    """

    P: np.ndarray
    L: np.ndarray
    shift: np.ndarray = field(default=None)

    def __post_init__(self):
        P = _checked_sym(np.atleast_2d(np.asarray(self.P, dtype=float)), "P")
        L = np.atleast_2d(np.asarray(self.L, dtype=float))
        if P.shape != L.shape:
            raise ValueError("P and L shapes differ")
        shift = np.zeros(2 * L.shape[0]) if self.shift is None else np.asarray(self.shift, dtype=float)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "shift", shift)

    @classmethod
    def identity(cls, n):
        return cls(np.zeros((n, n)), np.eye(n))

    @property
    def n(self):
        return self.L.shape[0]

    def linear(self):
        Linv = np.linalg.inv(self.L)
        m = np.block([[Linv, np.zeros((self.n, self.n))], [self.P @ Linv, self.L.T]])
        return SymplecticMatrix(m, check=False)

    def affine(self):
        return AffineSymplectic(self.linear(), self.shift)

    def inverse(self):
        """``(shear(P) rescale(L))^{-1} = shear(-L^{-T} P L^{-1}) rescale(L^{-1})``."""
        Linv = np.linalg.inv(self.L)
        lin = LocalElement(-Linv.T @ self.P @ Linv, Linv)
        return LocalElement(lin.P, lin.L, -(lin.linear() @ self.shift))

    def __matmul__(self, other):
        return sp0_compose(self, other)


def sp0_compose(e1, e2):
    """Closed-form product ``e1 e2`` in the local group.

    Uses ``rescale(L) shear(P') = shear(L^T P' L) rescale(L)`` and
    ``rescale(L) rescale(L') = rescale(L' L)``.
    """
    if e1.n != e2.n:
        raise ValueError("dimension mismatch")
    P = e1.P + e1.L.T @ e2.P @ e1.L
    L = e2.L @ e1.L
    shift = e1.shift + e1.linear() @ e2.shift
    return LocalElement(P, L, shift)


def sp0_quotient(e_new, e_old):
    """``e_new e_old^{-1}`` for linear elements: ``shear(P' - K^T P K) rescale(K)``, K = L^{-1} L'."""
    K = np.linalg.solve(e_old.L, e_new.L)
    return LocalElement(e_new.P - K.T @ e_old.P @ K, K)
