"""Splitting a symplectic matrix into a shear, a rescaling and a rotation.

Run with ``python demos/02_factorization.py``.
"""

import numpy as np

from chalkmotion import free_factorization, pre_iwasawa, random_symplectic, sp0_compose

S = np.asarray(random_symplectic(2, seed=3))
f = pre_iwasawa(S)
print("P (symmetric)\n", np.round(f.P, 6))
print("L (symmetric positive definite)\n", np.round(f.L, 6))
print(f"reconstruction error {np.abs(f.reconstruct() - S).max():.2e}")
U = np.asarray(f.U)
print(f"U is orthogonal: {np.allclose(U.T @ U, np.eye(4))}")

# The free particle: S_t = [[1, t], [0, 1]].
print("\nfree particle")
for t in (0.0, 0.5, 1.0, 2.0):
    g = pre_iwasawa(np.array([[1.0, t], [0.0, 1.0]]))
    print(f"t = {t:3.1f}   P = {g.P[0, 0]:+.6f}  ({t / (1 + t * t):+.6f})   L = {g.L[0, 0]:.6f}  ({(1 + t * t) ** -0.5:.6f})")

# When the upper-right block is invertible the matrix is free.
ff = free_factorization(S)
print(f"\nfree factorization error {np.abs(ff.reconstruct() - S).max():.2e}")

# Local parts multiply inside their own group.
a, b = pre_iwasawa(np.asarray(random_symplectic(2, seed=4))).local(), f.local()
ab = sp0_compose(a, b)
err = np.abs(np.asarray(ab.linear()) - np.asarray(a.linear()) @ np.asarray(b.linear())).max()
print(f"local group product error {err:.2e}")
