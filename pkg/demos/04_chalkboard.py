"""A symplectic ball carried along a flow, with its shadow on x-space.

Run with ``python demos/04_chalkboard.py``.
"""

import numpy as np

from chalkmotion import SymplecticBall, SymplecticIsotopy, chalkboard_motion, nearby_orbit, shadow_ball
from chalkmotion.flows import uniform_grid

eps = 0.3
iso = SymplecticIsotopy.from_function(lambda t: np.array([[1.0, t], [0.0, 1.0]]), uniform_grid(2.0, 1e-2))
traj = chalkboard_motion(iso, SymplecticBall.standard(eps, 1))
caps = traj.capacities()
print(f"capacity stays at pi eps^2 = {np.pi * eps**2:.6f}: range [{caps.min():.12f}, {caps.max():.12f}]")

# The ball spreads in x as the particle moves freely.
shadows = shadow_ball(iso, eps)
for t in (0.0, 1.0, 2.0):
    k = iso.index(t)
    hw = shadows[k].semi_axes()[0]
    print(f"t = {t:3.1f}   shadow half-width {hw:.6f}   eps sqrt(1+t^2) {eps * np.sqrt(1 + t * t):.6f}")

# A nonlinear pendulum: the linearized flow around one orbit.
def H(z, t):
    x, p = z
    return 0.5 * p * p - np.cos(x)


z0 = np.array([0.5, 0.0])
orbit = nearby_orbit(H, z0, uniform_grid(3.0, 1e-2))
print(f"\npendulum orbit end point {np.round(orbit.z[-1], 6)}")
print(f"linear propagator at t = 3 has det {np.linalg.det(orbit.S[-1]):.12f}")
