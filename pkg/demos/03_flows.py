"""Flows of time-dependent quadratic Hamiltonians and their calculus.

Run with ``python demos/03_flows.py``.
"""

import numpy as np

from chalkmotion import (
    FlowEvaluator,
    affine_generator,
    compose_hamiltonians,
    flow_from_quadratic,
    iwasawa_sum,
    random_symplectic,
    standard_J,
)
from chalkmotion.flows import conjugate_generator, random_quadratic_hamiltonian

H = random_quadratic_hamiltonian(2, seed=11)
iso = flow_from_quadratic(H, dt=1e-3)
J = standard_J(2)
drift = max(np.abs(S.T @ J @ S - J).max() for S in iso.S)
print(f"{len(iso)} steps, worst symplectic defect {drift:.1e}")

# Recover the Hamiltonian from the flow it generated.
Mg, _ = affine_generator(iso).sample(iso.times)
Mh, _ = H.sample(iso.times)
print(f"generator recovered to {np.abs(Mg - Mh).max():.1e}")

# Flow of H # K is the product of the two flows.
K = random_quadratic_hamiltonian(2, seed=12)
dt = 1e-2
SH, _ = FlowEvaluator(H, dt, order=6)(1.0)
SK, _ = FlowEvaluator(K, dt, order=6)(1.0)
SHK, _ = FlowEvaluator(compose_hamiltonians(H, K, dt, 6), dt, order=6)(1.0)
print(f"composition error {np.abs(SHK - SH @ SK).max():.1e}")

g = np.asarray(random_symplectic(2, seed=13, word_length=3))
Sg, _ = FlowEvaluator(conjugate_generator(H, g), dt, order=6)(1.0)
print(f"conjugation error {np.abs(Sg - np.linalg.inv(g) @ SH @ g).max():.1e}")

# Free particle: the local part of the generator in closed form.
from chalkmotion import SymplecticIsotopy
from chalkmotion.flows import uniform_grid

free = SymplecticIsotopy.from_function(lambda t: np.array([[1.0, t], [0.0, 1.0]]), uniform_grid(2.0, 1e-3))
ws = iwasawa_sum(free)
print("\n  t    x^2 coeff   expected    xp coeff   expected")
for t in (0.0, 1.0, 2.0):
    c = ws.H_R.coefficients(t)
    print(f"{t:4.1f}  {c['x2']:+.6f}  {-0.5 / (1 + t * t):+.6f}   {c['px']:+.6f}  {t / (1 + t * t):+.6f}")
print(f"sum identity residual {ws.sum_residual():.1e}")
