"""Gaussian states, their Wigner functions and quantum blobs.

Run with ``python demos/05_gaussian.py``.
"""

import numpy as np

from chalkmotion import (
    GaussianState,
    blob_from_gaussian,
    covariance,
    gaussian_from_blob,
    gaussian_transport,
    metaplectic_apply,
    wigner_gaussian,
    wigner_numeric_1d,
)

phi0 = GaussianState.ground(1, hbar=1.0)

# Free evolution spreads the packet and builds x-p correlation.
for t in (0.5, 1.0, 2.0):
    s = metaplectic_apply(np.array([[1.0, t], [0.0, 1.0]]), phi0)
    print(f"t = {t:3.1f}   X = {s.X[0, 0]:.6f}   Y = {s.Y[0, 0]:+.6f}")

# The Wigner function from its closed form and from the integral.
s = GaussianState(np.array([[2.0]]), np.array([[0.5]]), np.array([0.3, -0.2]), hbar=1.0)
xs = np.linspace(-1, 1, 5)
ps = np.linspace(-1, 1, 5)
W_num = wigner_numeric_1d(s, xs, ps)
W = wigner_gaussian(s)
W_exact = W(np.stack(np.meshgrid(xs, ps, indexing="ij"), axis=-1).reshape(-1, 2)).reshape(xs.size, ps.size)
print(f"\nWigner closed form vs quadrature: {np.abs(W_num - W_exact).max():.1e}")

# Covariance saturates the uncertainty bound for a single mode.
rep = covariance(s)
print("covariance\n", np.round(rep.sigma, 6))
print(f"dx^2 dp^2 - cov^2 = {rep.rs[0]:.12f}  (hbar^2/4 = 0.25)")

# States and blobs describe the same object.
q = blob_from_gaussian(s)
back = gaussian_from_blob(q)
print(f"\nblob capacity {q.capacity():.12f} = pi hbar; round trip matches: {back.same_parameters(s)}")

# Carry one state onto another with a local-group operator.
s2 = GaussianState(np.array([[0.5]]), np.array([[-1.0]]), np.array([1.0, 1.0]), hbar=1.0)
moved = gaussian_transport(s, s2).apply(s)
print(f"transport lands on target: {moved.same_parameters(s2)}")
