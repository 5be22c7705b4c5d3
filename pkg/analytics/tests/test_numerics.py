import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from analytics.computation import (
    Bernoulli,
    Beta,
    StdNormal,
    Weibull,
    cholesky,
    lu_solve,
    make_rng,
    nearest_psd,
    pinv,
    sample,
    transform_uniform,
    worker_rng,
)
from gridflow.exceptions import BadParameter, DimensionMismatch, NonFinite, NotPositiveDefinite, SingularMatrix

small_matrices = st.tuples(st.integers(1, 6), st.integers(1, 6)).flatmap(
    lambda shape: arrays(np.float64, shape, elements=st.integers(-5, 5).map(float))
)


def test_make_rng_is_reproducible():
    a = make_rng(7, "scenario").random(5)
    b = make_rng(7, "scenario").random(5)
    np.testing.assert_array_equal(a, b)


def test_make_rng_purposes_are_independent():
    a = make_rng(7, "scenario").random(5)
    b = make_rng(7, "shuffle").random(5)
    assert not np.array_equal(a, b)


def test_worker_streams_differ():
    assert not np.array_equal(worker_rng(0, 0).random(3), worker_rng(0, 1).random(3))


def test_lu_solve_identity():
    B = np.arange(6.0).reshape(3, 2)
    np.testing.assert_array_equal(lu_solve(np.eye(3), B), B)


def test_lu_solve_diagonal():
    np.testing.assert_allclose(lu_solve(np.diag([2.0, 4.0, 5.0]), [2.0, 2.0, 1.0]), [1.0, 0.5, 0.2])


def test_lu_solve_random(rng):
    A = rng.normal(size=(20, 20)) + 20 * np.eye(20)
    b = rng.normal(size=20)
    np.testing.assert_allclose(A @ lu_solve(A, b), b, atol=1e-10)


def test_lu_solve_singular():
    with pytest.raises(SingularMatrix) as exc:
        lu_solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0])
    assert exc.value.pivot == 1


def test_lu_solve_rejects_non_square():
    with pytest.raises(DimensionMismatch):
        lu_solve(np.ones((2, 3)), np.ones(2))


def test_lu_solve_rejects_nan():
    with pytest.raises(NonFinite):
        lu_solve([[np.nan, 0.0], [0.0, 1.0]], [1.0, 1.0])


@settings(max_examples=60, deadline=None)
@given(A=small_matrices)
def test_pinv_penrose_conditions(A):
    P = pinv(A)
    scale = max(1.0, np.linalg.norm(A)) * max(1.0, np.linalg.norm(P)) ** 2
    tol = 1e-8 * scale
    assert P.shape == A.T.shape
    np.testing.assert_allclose(A @ P @ A, A, atol=tol)
    np.testing.assert_allclose(P @ A @ P, P, atol=tol)
    np.testing.assert_allclose((A @ P).T, A @ P, atol=tol)
    np.testing.assert_allclose((P @ A).T, P @ A, atol=tol)


def test_pinv_zero_matrix():
    np.testing.assert_array_equal(pinv(np.zeros((3, 2))), np.zeros((2, 3)))


def test_pinv_rank_one():
    u = np.array([1.0, 2.0, 2.0])
    A = np.outer(u, u)
    np.testing.assert_allclose(pinv(A), A / 81.0, atol=1e-12)


def test_cholesky_known_factor():
    L = cholesky([[4.0, 2.0], [2.0, 3.0]])
    np.testing.assert_allclose(L, [[2.0, 0.0], [1.0, np.sqrt(2.0)]])


def test_cholesky_reconstructs(rng):
    M = rng.normal(size=(8, 8))
    A = M.T @ M + np.eye(8)
    L = cholesky(A)
    np.testing.assert_allclose(L @ L.T, A, atol=1e-10)
    assert np.allclose(np.triu(L, 1), 0.0)


def test_cholesky_reports_failing_row():
    with pytest.raises(NotPositiveDefinite) as exc:
        cholesky([[1.0, 2.0], [2.0, 1.0]])
    assert exc.value.row == 1


def test_cholesky_rejects_asymmetric():
    with pytest.raises(BadParameter):
        cholesky([[1.0, 0.5], [0.0, 1.0]])


def test_nearest_psd_repairs_correlation():
    C = np.array([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]])
    R = nearest_psd(C)
    np.testing.assert_allclose(np.diag(R), 1.0)
    assert np.linalg.eigvalsh(R).min() > -1e-12
    cholesky(R)


def test_weibull_moments():
    draws = sample(make_rng(0, "moments"), Weibull(1.0, 2.0), 1_000_000)
    assert draws.mean() == pytest.approx(2.0, abs=0.01)
    assert draws.min() >= 0.0


def test_beta_moments():
    draws = sample(make_rng(0, "moments"), Beta(2.0, 2.0), 1_000_000)
    assert draws.mean() == pytest.approx(0.5, abs=0.002)
    assert draws.var() == pytest.approx(0.05, abs=0.002)
    assert draws.min() >= 0.0 and draws.max() <= 1.0


def test_normal_moments():
    draws = sample(make_rng(0, "moments"), StdNormal(), 200_000)
    assert draws.mean() == pytest.approx(0.0, abs=0.01)
    assert draws.std() == pytest.approx(1.0, abs=0.01)


@pytest.mark.parametrize("p, expected", [(0.0, 0.0), (1.0, 1.0)])
def test_bernoulli_extremes(p, expected):
    draws = sample(make_rng(3), Bernoulli(p), 1000)
    assert np.all(draws == expected)


def test_scalar_draw_is_float():
    assert isinstance(sample(make_rng(3), Weibull(2.0, 1.0)), float)


def test_inverse_cdf_is_finite_at_zero():
    assert np.isfinite(transform_uniform(np.array([0.0]), StdNormal())).all()


@pytest.mark.parametrize("factory", [lambda: Weibull(0.0, 1.0), lambda: Beta(1.0, -1.0), lambda: Bernoulli(1.5)])
def test_invalid_distribution_parameters(factory):
    with pytest.raises(BadParameter):
        factory()
