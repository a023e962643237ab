import numpy as np
import pytest
from hypothesis import given, strategies as st

from chalkmotion.capacity import (
    DegeneratePointSet,
    Ellipsoid,
    capacity,
    capacity_continuity_probe,
    hausdorff_distance,
    mvee,
    sphere_directions,
    symplectic_eigenvalues,
    williamson,
)
from chalkmotion.symplectic import random_symplectic, standard_J, symplectic_residual

from conftest import random_spd

seeds = st.integers(min_value=0, max_value=2**31)


def eig_oracle(M):
    """|eig(JM)| via a general eigen-solver, each value listed once."""
    n = M.shape[0] // 2
    w = np.sort(np.abs(np.linalg.eigvals(standard_J(n) @ M)))[::-1]
    return w[::2]


def test_williamson_diag_example():
    W = williamson(np.diag([4.0, 1.0]))
    assert np.allclose(W.lambdas, [2.0])
    S = np.asarray(W.S)
    assert np.allclose(S.T @ np.diag([4.0, 1.0]) @ S, np.diag([2.0, 2.0]), atol=1e-12)


def test_williamson_identity():
    W = williamson(np.eye(4))
    S = np.asarray(W.S)
    assert np.allclose(W.lambdas, [1.0, 1.0])
    assert np.allclose(S.T @ S, np.eye(4), atol=1e-12)


@given(seeds, st.integers(min_value=1, max_value=4))
def test_williamson_property(seed, n):
    M = random_spd(np.random.default_rng(seed), 2 * n, cond=50.0)
    W = williamson(M)
    S = np.asarray(W.S)
    assert symplectic_residual(S) < 1e-8
    assert np.abs(S.T @ M @ S - W.diagonal()).max() < 1e-8 * max(1.0, np.abs(M).max())
    assert np.allclose(W.lambdas, eig_oracle(M), rtol=1e-9, atol=1e-12)
    assert np.all(np.diff(W.lambdas) <= 1e-12)


@given(seeds, st.integers(min_value=1, max_value=3))
def test_spectrum_is_symplectic_invariant(seed, n):
    M = random_spd(np.random.default_rng(seed), 2 * n)
    S = np.asarray(random_symplectic(n, seed, word_length=4))
    lam = symplectic_eigenvalues(M)
    lam2 = symplectic_eigenvalues(S.T @ M @ S)
    assert np.allclose(lam, lam2, rtol=1e-7)


def test_williamson_rejects_indefinite():
    with pytest.raises(ValueError):
        williamson(np.diag([1.0, -1.0]))


def test_ball_capacity():
    assert capacity(Ellipsoid.ball(2.0, 4)) == pytest.approx(4 * np.pi, rel=1e-14)


def test_capacity_ignores_center():
    E = Ellipsoid(np.array([5.0, -3.0]), np.diag([2.0, 0.5]), 0.7)
    F = Ellipsoid(np.zeros(2), np.diag([2.0, 0.5]), 0.7)
    assert capacity(E) == capacity(F)


def test_capacity_monotone_and_conformal():
    E = Ellipsoid(np.zeros(4), np.diag([1.0, 3.0, 1.0, 3.0]), 1.0)
    bigger = Ellipsoid(np.zeros(4), np.diag([1.0, 1.0, 1.0, 1.0]), 1.0)
    assert capacity(E) <= capacity(bigger)
    assert capacity(E.dilate(2.5)) == pytest.approx(2.5**2 * capacity(E), rel=1e-12)


def test_cylinder_limit_capacity():
    # squashing the second plane leaves the first disk as the bottleneck
    E = Ellipsoid(np.zeros(4), np.diag([1.0, 1e-6, 1.0, 1e-6]), 1.0)
    assert capacity(E) == pytest.approx(np.pi, rel=1e-12)


def test_hausdorff_trivial_cases():
    B1 = Ellipsoid.ball(1.0, 3)
    B2 = Ellipsoid.ball(2.0, 3)
    w = np.array([0.3, -0.4, 1.2])
    assert hausdorff_distance(B1, B1) == 0.0
    assert hausdorff_distance(B1, B2) == pytest.approx(1.0, abs=1e-12)
    assert hausdorff_distance(B1, Ellipsoid.ball(1.0, 3, w)) == pytest.approx(np.linalg.norm(w), abs=1e-9)


def test_hausdorff_against_dense_oracle(rng):
    A = Ellipsoid(rng.normal(size=4) * 0.1, random_spd(rng, 4), 1.0)
    B = Ellipsoid(rng.normal(size=4) * 0.1, random_spd(rng, 4), 1.0)
    u = rng.normal(size=(200_000, 4))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    dense = np.abs(A.support(u) - B.support(u)).max()
    ours = hausdorff_distance(A, B)
    assert ours >= dense - 1e-12
    assert ours <= dense * 1.01


def test_hausdorff_needs_enough_directions():
    with pytest.raises(ValueError):
        hausdorff_distance(Ellipsoid.ball(1.0, 2), Ellipsoid.ball(1.0, 2), n_dirs=8)


def test_sphere_directions_unit_and_deterministic():
    u = sphere_directions(5, 256)
    assert np.allclose(np.linalg.norm(u, axis=1), 1.0)
    assert np.array_equal(u, sphere_directions(5, 256))


def test_continuity_probe_ball():
    report = capacity_continuity_probe(Ellipsoid.ball(1.0, 2), 0.1)
    assert report["max_hausdorff"] <= 0.1 * (1 + 1e-9)
    # among sets within Hausdorff 0.1 of B(1), B(1.1) has the largest capacity
    assert report["max_delta_capacity"] == pytest.approx(np.pi * (1.1**2 - 1), rel=1e-9)


def test_continuity_probe_shrinks_with_delta(rng):
    E = Ellipsoid(np.zeros(4), random_spd(rng, 4), 1.0)
    changes = [capacity_continuity_probe(E, d)["max_delta_capacity"] for d in (0.1, 0.01, 0.001)]
    assert changes[0] > changes[1] > changes[2] > 0
    assert capacity_continuity_probe(E, 0.0)["max_delta_capacity"] == 0.0


def test_mvee_of_cube_corners():
    corners = np.array([[x, y] for x in (-1, 1) for y in (-1, 1)], dtype=float)
    E = mvee(corners, tol=1e-10)
    # the minimal ellipse through a square's corners is its circumcircle
    assert np.allclose(E.center, 0.0, atol=1e-9)
    assert np.allclose(E.shape / E.level**2, 0.5 * np.eye(2), atol=1e-8)


def test_mvee_recovers_ellipsoid(rng):
    E = Ellipsoid(np.array([1.0, -2.0, 0.5]), random_spd(rng, 3), 1.0)
    pts = E.boundary_points(400)
    F = mvee(pts, tol=1e-9)
    assert np.all(F.contains(pts, slack=1e-12))
    assert F.same_set(E, tol=1e-4)


def test_mvee_degenerate():
    with pytest.raises(DegeneratePointSet):
        mvee(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]))


def test_ellipsoid_validation():
    with pytest.raises(ValueError):
        Ellipsoid(np.zeros(2), np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        Ellipsoid(np.zeros(3), np.eye(2))


def test_boundary_points_lie_on_boundary(rng):
    E = Ellipsoid(rng.normal(size=4), random_spd(rng, 4), 0.3)
    q = E.quadratic_form(E.boundary_points(500))
    assert np.allclose(q, 0.09, rtol=1e-12)
