import numpy as np
import pytest
from hypothesis import given, strategies as st

from chalkmotion.capacity import Ellipsoid, capacity
from chalkmotion.chalkboard import (
    StepUnderflow,
    SymplecticBall,
    ball_normal_form,
    ball_to_ellipsoid,
    ball_transport,
    chalkboard_motion,
    nearby_orbit,
    nonlinear_transport,
    recalibrate,
    shadow_ball,
    shadow_x,
    subsystem_project,
)
from chalkmotion.flows import (
    QuadraticHamiltonian,
    SymplecticIsotopy,
    flow_from_quadratic,
    random_quadratic_hamiltonian,
    uniform_grid,
)
from chalkmotion.symplectic import SymplecticMatrix, random_symplectic

seeds = st.integers(min_value=0, max_value=2**31)


def free_particle(T=2.0, dt=1e-2, n=1):
    eye, zero = np.eye(n), np.zeros((n, n))
    return SymplecticIsotopy.from_function(lambda t: np.block([[eye, t * eye], [zero, eye]]), uniform_grid(T, dt))


def support_oracle_x(E, n, count, rng):
    """Shadow support function read off the full ellipsoid at (u, 0)."""
    u = rng.normal(size=(count, n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    full = np.hstack([u, np.zeros_like(u)])
    return u, E.support(full)


def test_free_particle_shadow_width():
    eps = 0.3
    iso = free_particle()
    for t, E in zip(iso.times, shadow_ball(iso, eps)):
        assert E.semi_axes()[0] == pytest.approx(eps * np.sqrt(1 + t**2), abs=1e-12)


@given(seeds, st.integers(min_value=1, max_value=3))
def test_schur_shadow_matches_support_oracle(seed, n):
    rng = np.random.default_rng(seed)
    S = np.asarray(random_symplectic(n, seed, word_length=4))
    E = ball_to_ellipsoid(SymplecticBall(S, rng.normal(size=2 * n), 0.5))
    sh = shadow_x(E)
    u, h = support_oracle_x(E, n, 2000, rng)
    assert np.abs(sh.support(u) - h).max() <= 1e-9 * max(1.0, np.abs(h).max())


@given(seeds)
def test_shadow_area_bound_n1(seed):
    # in one degree of freedom the x- and p-widths of a ball multiply to at least eps^2
    rng = np.random.default_rng(seed)
    eps = 0.4
    S = np.asarray(random_symplectic(1, seed, word_length=5))
    E = ball_to_ellipsoid(SymplecticBall(S, np.zeros(2), eps))
    wx = E.support(np.array([1.0, 0.0]))[0]
    wp = E.support(np.array([0.0, 1.0]))[0]
    assert wx * wp >= eps**2 * (1 - 1e-12)


def test_shadow_can_be_thinner_than_eps():
    # a squeezed ball has x-shadow half-width eps/2
    E = ball_to_ellipsoid(SymplecticBall(np.diag([0.5, 2.0]), np.zeros(2), 1.0))
    assert shadow_x(E).semi_axes()[0] == pytest.approx(0.5)


@given(seeds)
def test_subsystem_capacity_bound(seed):
    eps = 0.7
    S = np.asarray(random_symplectic(2, seed, word_length=6))
    E = ball_to_ellipsoid(SymplecticBall(S, np.zeros(4), eps))
    assert capacity(subsystem_project(E, 1)) >= np.pi * eps**2 * (1 - 1e-9)


def test_subsystem_block_diagonal_equality():
    eps = 0.7
    a = np.asarray(random_symplectic(1, 1))
    b = np.asarray(random_symplectic(1, 2))
    # (x1, x2, p1, p2) ordering of a direct sum
    S = np.zeros((4, 4))
    S[np.ix_([0, 2], [0, 2])] = a
    S[np.ix_([1, 3], [1, 3])] = b
    E = ball_to_ellipsoid(SymplecticBall(S, np.zeros(4), eps))
    assert capacity(subsystem_project(E, 1)) == pytest.approx(np.pi * eps**2, rel=1e-9)


def test_chalkboard_balls_are_images():
    H = random_quadratic_hamiltonian(2, 7, scale=0.6)
    iso = flow_from_quadratic(H, dt=1e-2)
    b = SymplecticBall(random_symplectic(2, 5, word_length=3), np.array([0.1, 0.2, -0.3, 0.4]), 0.2)
    traj = chalkboard_motion(iso, b)
    E0 = ball_to_ellipsoid(b)
    for k in (0, 37, len(iso) - 1):
        img = E0.affine_image(iso.affine(k))
        assert traj.ellipsoids()[k].same_set(img, tol=1e-8)
        R = traj.local[k]
        assert np.abs(R[:2, 2:]).max() < 1e-10
    assert np.abs(traj.capacities() - np.pi * 0.04).max() < 1e-12


def test_chalkboard_custom_center_path():
    iso = free_particle(T=1.0)
    path = np.column_stack([np.sin(iso.times), iso.times**2])
    traj = chalkboard_motion(iso, SymplecticBall.standard(0.1, 1), z_path=path)
    assert np.allclose(traj.centers(), path)
    with pytest.raises(ValueError):
        chalkboard_motion(iso, SymplecticBall.standard(0.1, 1), z_path=path[:-1])


def test_ball_normal_form_same_set():
    b = SymplecticBall(random_symplectic(2, 3), np.arange(4.0), 0.5)
    nf = ball_normal_form(b).ball()
    assert ball_to_ellipsoid(nf).same_set(ball_to_ellipsoid(b), tol=1e-9)
    assert np.abs(np.asarray(nf.S)[:2, 2:]).max() == 0.0


@given(seeds)
def test_ball_transport(seed):
    rng = np.random.default_rng(seed)
    b1 = SymplecticBall(random_symplectic(2, seed), rng.normal(size=4), 0.3)
    b2 = SymplecticBall(random_symplectic(2, seed + 1), rng.normal(size=4), 0.3)
    f = ball_transport(b1, b2)
    assert np.abs(np.asarray(f.linear)[:2, 2:]).max() < 1e-12
    assert ball_to_ellipsoid(b1).affine_image(f).same_set(ball_to_ellipsoid(b2), tol=1e-6)


def test_ball_transport_radius_mismatch():
    with pytest.raises(ValueError):
        ball_transport(SymplecticBall.standard(1.0, 1), SymplecticBall.standard(2.0, 1))


def pendulum_grad(z, t):
    return np.array([np.sin(z[0]), z[1]])


def test_nearby_orbit_of_quadratic_is_exact():
    H = QuadraticHamiltonian.constant(np.array([[2.0, 0.3], [0.3, 1.0]]), [0.1, -0.2])
    times = uniform_grid(1.0, 0.05)
    orb = nearby_orbit(H, np.array([0.3, 0.1]), times, grad=H.gradient, hess=H.hessian)
    pts = np.array([[0.35, 0.1], [0.3, 0.2], [0.2, 0.0]])
    full = nonlinear_transport(H.gradient, pts, times, substeps=4)
    assert np.allclose(orb.linear_transport(pts), full, atol=1e-9)


def test_nearby_orbit_linearization_symplectic_and_hamiltonian():
    times = uniform_grid(1.0, 0.02)
    orb = nearby_orbit(None, np.array([0.5, 0.3]), times, grad=pendulum_grad)
    assert max(np.abs(s.T @ np.array([[0, 1], [-1, 0]]) @ s - np.array([[0, 1], [-1, 0]])).max() for s in orb.S) < 1e-12
    # the quadratic Hamiltonian of the linearization regenerates S_t and z_t
    back = flow_from_quadratic(orb.hamiltonian(), dt=0.02)
    assert np.abs(back.S[-1] - orb.S[-1]).max() < 1e-6
    # its affine flow carries the reference point along the orbit
    w = back.S[-1] @ back.z[-1]
    assert np.abs(back.S[-1] @ orb.z[0] + w - orb.z[-1]).max() < 1e-6


def test_nearby_orbit_uses_finite_differences():
    def H(z, t):
        return 0.5 * z[1] ** 2 - np.cos(z[0])

    times = uniform_grid(0.5, 0.05)
    a = nearby_orbit(H, np.array([0.4, 0.0]), times)
    b = nearby_orbit(None, np.array([0.4, 0.0]), times, grad=pendulum_grad)
    assert np.allclose(a.z, b.z, atol=1e-8)
    assert np.allclose(a.S, b.S, atol=1e-5)


def test_step_underflow():
    def grad(z, t):
        return np.array([-z[0] ** 3, z[1]])  # p' = x^3 blows up

    with pytest.raises(StepUnderflow):
        nearby_orbit(None, np.array([10.0, 10.0]), uniform_grid(1.0, 0.1), grad=grad, min_step=1e-6)


def test_recalibrate_restores_capacity():
    E = Ellipsoid(np.array([0.5, 0.0]), np.eye(2), 0.1)
    F = recalibrate(pendulum_grad, E, uniform_grid(0.5, 0.05), samples=400)
    assert capacity(F) == pytest.approx(capacity(E), rel=1e-12)
    moved = nonlinear_transport(pendulum_grad, E.center[None], uniform_grid(0.5, 0.05))[0]
    assert np.linalg.norm(F.center - moved) < 1e-3


def test_ball_rejects_bad_input():
    with pytest.raises(ValueError):
        SymplecticBall(np.eye(2), np.zeros(3), 1.0)
    with pytest.raises(ValueError):
        SymplecticBall(np.eye(2), np.zeros(2), 0.0)
    with pytest.raises(ValueError):
        SymplecticBall(SymplecticMatrix.identity(1), np.zeros(2), -1.0)
