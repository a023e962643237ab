"""Symplectic capacity, Williamson normal form and enclosing ellipsoids.

Run with ``python demos/01_capacity.py``.
"""

import numpy as np

from chalkmotion import Ellipsoid, capacity, mvee, random_symplectic, williamson

# An ellipsoid stretched by N in x2 and p2 and squeezed by N in x1 and p1.
# Its volume does not depend on N but its capacity falls like pi / N.
for N in (1.0, 2.0, 10.0):
    E = Ellipsoid(np.zeros(4), np.diag([1 / N, N, 1 / N, N]), 1.0)
    print(f"N = {N:4.1f}   volume {E.volume():.4f}   capacity {capacity(E):.6f}   pi/N {np.pi / N:.6f}")

# Capacity survives any linear symplectic map.
rng = np.random.default_rng(0)
A = rng.normal(size=(4, 4))
E = Ellipsoid(np.zeros(4), A @ A.T + np.eye(4), 1.0)
S = random_symplectic(2, seed=7, word_length=12)
print(f"\ncond(S) = {np.linalg.cond(np.asarray(S)):.1e}")
print(f"capacity before {capacity(E):.12f}, after {capacity(E.image(S)):.12f}")

# Williamson: S^T M S = diag(Lambda, Lambda).
W = williamson(E.shape)
D = np.asarray(W.S).T @ E.shape @ np.asarray(W.S)
print("\nsymplectic eigenvalues", np.round(W.lambdas, 6))
print("diagonalized shape\n", np.round(D, 10))

# Enclosing ellipsoid of a point cloud drawn inside a tilted ellipse.
theta = rng.uniform(0, 2 * np.pi, 400)
radius = np.sqrt(rng.uniform(0, 1, 400))
pts = np.c_[2 * radius * np.cos(theta), 0.5 * radius * np.sin(theta)] @ np.array([[1.0, 0.3], [0.0, 1.0]])
Emin = mvee(pts)
print(f"\nmvee of {len(pts)} points: semi-axes {np.round(Emin.semi_axes(), 4)}, all inside: {Emin.contains(pts, 1e-9).all()}")
