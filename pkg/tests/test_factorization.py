import numpy as np
import pytest
from hypothesis import given, strategies as st

from chalkmotion.factorization import (
    FactorizationError,
    LocalElement,
    NotFree,
    dilation_pre_iwasawa,
    free_factorization,
    is_free,
    pre_iwasawa,
    sp0_compose,
    sp0_quotient,
)
from chalkmotion.symplectic import (
    random_symplectic,
    random_unitary_block,
    rescale,
    shear,
    standard_J,
    unitary_block,
)

seeds = st.integers(min_value=0, max_value=2**31)
dims = st.integers(min_value=1, max_value=4)


def rand_sym(rng, n):
    a = rng.uniform(-1, 1, size=(n, n))
    return a + a.T


def rand_spd(rng, n):
    a = rng.normal(size=(n, n))
    return a @ a.T + 0.5 * np.eye(n)


@given(seeds, dims)
def test_pre_iwasawa_round_trip(seed, n):
    S = np.asarray(random_symplectic(n, seed))
    f = pre_iwasawa(S)
    assert np.abs(f.reconstruct() - S).max() <= 1e-9 * max(1.0, np.abs(S).max())
    assert np.allclose(f.P, f.P.T, atol=1e-12)
    assert np.all(np.linalg.eigvalsh(f.L) > 0)
    X, Y = f.X, f.Y
    assert np.abs(X @ X.T + Y @ Y.T - np.eye(n)).max() < 1e-9
    assert np.abs(X @ Y.T - Y @ X.T).max() < 1e-9


@given(seeds, dims)
def test_pre_iwasawa_uniqueness(seed, n):
    # build S from known factors and recover them
    rng = np.random.default_rng(seed)
    P, L = rand_sym(rng, n), rand_spd(rng, n)
    U = np.asarray(random_unitary_block(n, seed))
    S = np.asarray(shear(P)) @ np.asarray(rescale(L)) @ U
    f = pre_iwasawa(S)
    assert np.allclose(f.P, P, atol=1e-8)
    assert np.allclose(f.L, L, atol=1e-8)
    assert np.allclose(np.asarray(f.U), U, atol=1e-8)


def test_pre_iwasawa_of_rotation_and_shear():
    U = np.asarray(unitary_block([[0.6]], [[0.8]]))
    f = pre_iwasawa(U)
    assert np.allclose(f.P, 0) and np.allclose(f.L, 1)
    P = np.array([[2.0, 1.0], [1.0, -1.0]])
    g = pre_iwasawa(shear(P))
    assert np.allclose(g.P, P) and np.allclose(g.L, np.eye(2))


def test_pre_iwasawa_reports_bad_input():
    with pytest.raises(FactorizationError):
        pre_iwasawa(np.array([[1.0, 0.0], [3.0, 2.0]]))


def test_dilation_closed_form(rng):
    K = np.eye(3) + 0.4 * rng.normal(size=(3, 3))
    f = dilation_pre_iwasawa(K)
    direct = pre_iwasawa(rescale(K))
    assert np.allclose(f.L, direct.L, atol=1e-10)
    assert np.allclose(f.X, direct.X, atol=1e-10)
    assert np.allclose(f.Y, 0)
    assert np.allclose(f.reconstruct(), np.asarray(rescale(K)), atol=1e-10)


def test_free_factorization_rotation():
    # the quarter turn J is free with P1 = P2 = 0, L = I
    f = free_factorization(standard_J(2))
    assert np.allclose(f.P1, 0) and np.allclose(f.P2, 0) and np.allclose(f.L, np.eye(2))


@given(seeds, dims)
def test_free_factorization_round_trip(seed, n):
    S = np.asarray(random_symplectic(n, seed)) @ standard_J(n)
    if not is_free(S):
        with pytest.raises(NotFree):
            free_factorization(S)
        return
    f = free_factorization(S)
    assert np.abs(f.reconstruct() - S).max() <= 1e-8 * max(1.0, np.abs(S).max()) ** 2


def test_non_free_raises():
    with pytest.raises(NotFree):
        free_factorization(np.asarray(rescale(np.eye(2) * 2)))


def _dense(e):
    return np.asarray(e.linear())


@given(seeds, dims)
def test_sp0_group_laws(seed, n):
    rng = np.random.default_rng(seed)
    e1 = LocalElement(rand_sym(rng, n), rand_spd(rng, n))
    e2 = LocalElement(rand_sym(rng, n), np.eye(n) + 0.3 * rng.normal(size=(n, n)))
    e3 = LocalElement(rand_sym(rng, n), rand_spd(rng, n))
    assert np.allclose(_dense(sp0_compose(e1, e2)), _dense(e1) @ _dense(e2), atol=1e-9)
    assert np.allclose(_dense(e1.inverse()), np.linalg.inv(_dense(e1)), atol=1e-8)
    assert np.allclose(_dense(sp0_quotient(e2, e1)), _dense(e2) @ np.linalg.inv(_dense(e1)), atol=1e-8)
    left = _dense((e1 @ e2) @ e3)
    right = _dense(e1 @ (e2 @ e3))
    assert np.allclose(left, right, atol=1e-8 * max(1.0, np.abs(left).max()))


def test_local_element_is_shear_times_rescale(rng):
    P, L = rand_sym(rng, 2), rand_spd(rng, 2)
    e = LocalElement(P, L)
    assert np.allclose(_dense(e), np.asarray(shear(P)) @ np.asarray(rescale(L)))
    assert np.allclose(_dense(e)[:2, 2:], 0)


def test_affine_local_inverse(rng):
    e = LocalElement(rand_sym(rng, 2), rand_spd(rng, 2), rng.normal(size=4))
    z = rng.normal(size=4)
    assert np.allclose(e.inverse().affine()(e.affine()(z)), z)
    assert np.allclose((e @ e.inverse()).affine()(z), z)


def test_identity_element():
    e = LocalElement.identity(3)
    assert np.array_equal(_dense(e), np.eye(6))


@given(seeds, dims)
def test_products_of_free_matrices(seed, n):
    # each factor is built from free-form data, so the product is a product of two free matrices
    rng = np.random.default_rng(seed)
    J = standard_J(n)

    def free_matrix():
        L = rand_spd(rng, n) + rng.normal(scale=0.1, size=(n, n))
        return shear(rand_sym(rng, n)) @ rescale(L) @ J @ shear(rand_sym(rng, n))

    S1, S2 = free_matrix(), free_matrix()
    for F in (S1, S2):
        assert is_free(F)
        assert np.allclose(free_factorization(F).reconstruct(), F, atol=1e-9)
    S = S1 @ S2
    assert np.abs(S.T @ J @ S - J).max() <= 1e-9 * max(1.0, np.abs(S).max() ** 2)
    assert np.abs(pre_iwasawa(S).reconstruct() - S).max() <= 1e-9 * max(1.0, np.abs(S).max())
