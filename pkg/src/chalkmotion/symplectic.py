"""Symplectic group Sp(n), its affine extension and the standard generators.

Phase-space coordinates are ordered ``z = (x_1..x_n, p_1..p_n)`` and the
symplectic form is ``sigma(z, z') = p.x' - p'.x = z'^T J z`` with
``J = [[0, I], [-I, 0]]``.

Shear convention: ``shear(P)`` returns ``[[I, 0], [P, I]]``.  In the
"V_{-P}" naming this is ``V_{-P}``; the metaplectic generator usually called
``V_P`` (multiplication by ``exp(-i P x.x / 2 hbar)``) projects onto
``shear(-P)``.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._linalg import check_symmetric
from .config import TOL


class NotSymplectic(ValueError):
    """Raised when a matrix fails the symplecticity check."""


def standard_J(n):
    """The standard symplectic matrix ``[[0, I], [-I, 0]]`` of size 2n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def _half(m):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise ValueError(f"expected a square matrix of even size, got {m.shape}")
    return m.shape[0] // 2


def symplectic_residual(S):
    """``max |S^T J S - J|`` divided by ``max(1, ||S||_max^2)``."""
    S = np.asarray(S, dtype=float)
    J = standard_J(_half(S))
    scale = max(1.0, np.abs(S).max() ** 2)
    return np.abs(S.T @ J @ S - J).max() / scale


def is_symplectic(S, tol=None):
    tol = TOL.symp if tol is None else tol
    return symplectic_residual(S) <= tol


class SymplecticMatrix:
    """A 2n x 2n real matrix checked to satisfy ``S^T J S = J``.

    The wrapped array is read-only.  ``np.asarray(S)`` gives the entries, and
    ``S @ other`` multiplies as matrices (returning a ``SymplecticMatrix`` when
    ``other`` is one too).
    """

    __slots__ = ("_m",)
    __array_priority__ = 20

    def __init__(self, entries, tol=None, check=True):
        m = np.array(entries, dtype=float)
        _half(m)
        if check:
            res = symplectic_residual(m)
            tol = TOL.symp if tol is None else tol
            if res > tol:
                raise NotSymplectic(f"symplectic residual {res:.3e} exceeds {tol:.1e}")
        m.setflags(write=False)
        self._m = m

    @property
    def n(self):
        return self._m.shape[0] // 2

    @property
    def matrix(self):
        return self._m

    @property
    def A(self):
        return self._m[: self.n, : self.n]

    @property
    def B(self):
        return self._m[: self.n, self.n :]

    @property
    def C(self):
        return self._m[self.n :, : self.n]

    @property
    def D(self):
        return self._m[self.n :, self.n :]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._m
        return self._m.astype(dtype)

    def __matmul__(self, other):
        if isinstance(other, SymplecticMatrix):
            # products re-pass the check with a tolerance scaled by 10
            return SymplecticMatrix(self._m @ other._m, tol=10 * TOL.symp)
        return self._m @ np.asarray(other)

    def __rmatmul__(self, other):
        return np.asarray(other) @ self._m

    def inv(self):
        return symplectic_inverse(self)

    @property
    def T(self):
        return SymplecticMatrix(self._m.T, check=False)

    def __repr__(self):
        return f"SymplecticMatrix(n={self.n},\n{self._m!r})"

    def __eq__(self, other):
        if not isinstance(other, SymplecticMatrix):
            return NotImplemented
        return np.array_equal(self._m, other._m)

    __hash__ = None

    @classmethod
    def identity(cls, n):
        return cls(np.eye(2 * n), check=False)

    @classmethod
    def from_blocks(cls, A, B, C, D, tol=None):
        return cls(np.block([[A, B], [C, D]]), tol=tol)


def as_matrix(S):
    """Plain float array for a SymplecticMatrix or array-like."""
    return np.asarray(S, dtype=float)


def blocks(S):
    S = as_matrix(S)
    n = _half(S)
    return S[:n, :n], S[:n, n:], S[n:, :n], S[n:, n:]


def symplectic_form(z, zp):
    """``sigma(z, z') = p.x' - p'.x`` for z = (x, p)."""
    z = np.asarray(z, dtype=float)
    zp = np.asarray(zp, dtype=float)
    if z.shape != zp.shape or z.ndim != 1 or z.size % 2:
        raise ValueError(f"dimension mismatch: {z.shape} vs {zp.shape}")
    n = z.size // 2
    return float(z[n:] @ zp[:n] - zp[n:] @ z[:n])


def shear(P):
    """``[[I, 0], [P, I]]`` for symmetric P (the matrix ``V_{-P}``)."""
    P = check_symmetric(P, name="P")
    n = P.shape[0]
    return SymplecticMatrix(np.block([[np.eye(n), np.zeros((n, n))], [P, np.eye(n)]]), check=False)


def rescale(L):
    """``M_L = diag(L^{-1}, L^T)`` for invertible L."""
    L = np.atleast_2d(np.asarray(L, dtype=float))
    n = L.shape[0]
    if abs(np.linalg.det(L)) <= TOL.det * max(1.0, np.abs(L).max()) ** n:
        raise ValueError("L is singular")
    zero = np.zeros((n, n))
    return SymplecticMatrix(np.block([[np.linalg.inv(L), zero], [zero, L.T]]), check=False)


def symplectic_inverse(S):
    """Inverse by the block formula ``[[D^T, -B^T], [-C^T, A^T]]``."""
    A, B, C, D = blocks(S)
    return SymplecticMatrix(np.block([[D.T, -B.T], [-C.T, A.T]]), check=False)


def unitary_block(X, Y):
    """The symplectic rotation ``[[X, Y], [-Y, X]]`` built from ``X + iY``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    return SymplecticMatrix(np.block([[X, Y], [-Y, X]]))


def is_unitary_block(S, tol=1e-9):
    A, B, C, D = blocks(S)
    S = as_matrix(S)
    return (
        np.abs(A - D).max() <= tol
        and np.abs(B + C).max() <= tol
        and np.abs(S.T @ S - np.eye(S.shape[0])).max() <= tol
    )


class LinearClass(Enum):
    SYMPLECTIC = "symplectic"
    ANTISYMPLECTIC = "antisymplectic"
    NEITHER = "neither"


def classify_linear_map(F, tol=None):
    """Decide whether ``F^T J F`` equals ``J``, ``-J`` or neither."""
    F = np.asarray(F, dtype=float)
    J = standard_J(_half(F))
    tol = TOL.symp if tol is None else tol
    scale = max(1.0, np.abs(F).max() ** 2)
    form = F.T @ J @ F
    if np.abs(form - J).max() <= tol * scale:
        return LinearClass.SYMPLECTIC
    if np.abs(form + J).max() <= tol * scale:
        return LinearClass.ANTISYMPLECTIC
    return LinearClass.NEITHER


@dataclass(frozen=True)
class AffineSymplectic:
    """The affine map ``z -> linear @ z + shift``, i.e. ``T(shift) S``.

    The factor order ``S T(z0)`` is available through :meth:`from_linear_then_shift`
    using ``S T(z0) = T(S z0) S``.
    """

    linear: SymplecticMatrix
    shift: np.ndarray

    def __post_init__(self):
        shift = np.array(self.shift, dtype=float).reshape(-1)
        if shift.size != 2 * self.linear.n:
            raise ValueError("shift dimension does not match the linear part")
        shift.setflags(write=False)
        object.__setattr__(self, "shift", shift)

    @classmethod
    def identity(cls, n):
        return cls(SymplecticMatrix.identity(n), np.zeros(2 * n))

    @classmethod
    def translation(cls, z):
        z = np.asarray(z, dtype=float)
        return cls(SymplecticMatrix.identity(z.size // 2), z)

    @classmethod
    def from_linear_then_shift(cls, S, z0):
        """The map ``S T(z0)``: translate by z0 first, then apply S."""
        S = S if isinstance(S, SymplecticMatrix) else SymplecticMatrix(S)
        return cls(S, S @ np.asarray(z0, dtype=float))

    @property
    def n(self):
        return self.linear.n

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if z.ndim == 1:
            return self.linear @ z + self.shift
        return z @ as_matrix(self.linear).T + self.shift

    def __matmul__(self, other):
        if not isinstance(other, AffineSymplectic):
            return NotImplemented
        return AffineSymplectic(self.linear @ other.linear, self.linear @ other.shift + self.shift)

    def inverse(self):
        Sinv = symplectic_inverse(self.linear)
        return AffineSymplectic(Sinv, -(Sinv @ self.shift))

    def pre_shift(self):
        """The z0 with ``self = S T(z0)``."""
        return symplectic_inverse(self.linear) @ self.shift

    def matrix(self):
        """Homogeneous (2n+1) x (2n+1) representation."""
        m = np.eye(2 * self.n + 1)
        m[:-1, :-1] = as_matrix(self.linear)
        m[:-1, -1] = self.shift
        return m


class SplitMix64:
    """The SplitMix64 generator; deterministic across platforms and languages."""

    _MASK = (1 << 64) - 1

    def __init__(self, seed):
        self.state = int(seed) & self._MASK

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & self._MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        return z ^ (z >> 31)

    def uniform(self, low=0.0, high=1.0):
        return low + (high - low) * ((self.next_u64() >> 11) * 2.0**-53)

    def uniform_array(self, shape, low=-1.0, high=1.0):
        size = int(np.prod(shape))
        return np.array([self.uniform(low, high) for _ in range(size)]).reshape(shape)


def random_symplectic(n, seed=0, word_length=6, scale_L=0.3):
    """Deterministic product of ``word_length`` random generators J, V_{-P}, M_L.

    Each letter is chosen uniformly among the three generator kinds.  Shear
    entries are uniform on [-1, 1] and symmetrized; rescalings use
    ``L = I + scale_L * U[-1, 1]`` redrawn until ``|det L| >= 0.1``.
    """
    if word_length < 0:
        raise ValueError("word_length must be >= 0")
    rng = SplitMix64(seed)
    J = standard_J(n)
    S = np.eye(2 * n)
    for _ in range(word_length):
        kind = rng.next_u64() % 3
        if kind == 0:
            G = J
        elif kind == 1:
            P = rng.uniform_array((n, n))
            G = as_matrix(shear(0.5 * (P + P.T)))
        else:
            while True:
                L = np.eye(n) + scale_L * rng.uniform_array((n, n))
                if abs(np.linalg.det(L)) >= 0.1:
                    break
            G = as_matrix(rescale(L))
        S = S @ G
    return SymplecticMatrix(S, tol=10 * TOL.symp)


def random_unitary_block(n, seed=0):
    """Random symplectic rotation from a Haar-like complex unitary."""
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return unitary_block(q.real, q.imag)

