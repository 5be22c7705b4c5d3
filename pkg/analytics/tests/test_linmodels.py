import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from analytics.computation import (
    AffineModel,
    Provenance,
    base_injections,
    dlpf_blocks,
    init_jacobian,
    init_linearized_pf,
    newton_raphson,
    predict,
    ridge_fit,
    ridge_gradients,
    ridge_objective,
    solve_unknowns,
    unknowns_from_state,
)
from gridflow.exceptions import BadParameter, DimensionMismatch, NonFinite


@pytest.fixture(scope="module")
def regression_data():
    rng = np.random.default_rng(42)
    X = rng.normal(size=(50, 5))
    W = rng.normal(size=(5, 3))
    Y = X @ W + np.array([1.0, -2.0, 0.5]) + 0.1 * rng.normal(size=(50, 3))
    return X, Y


def test_two_bus_dlpf_blocks(case2):
    blocks = dlpf_blocks(case2)
    np.testing.assert_allclose(blocks.F, [[10.0, 0.0], [0.0, 10.0]], atol=1e-12)
    np.testing.assert_allclose(blocks.c, [0.0, 1.0])


def test_two_bus_linearized_model(case2):
    model = init_linearized_pf(case2)
    assert model.provenance is Provenance.LINEARIZED_PF
    np.testing.assert_allclose(model.Ws, 0.1 * np.eye(2), atol=1e-12)
    np.testing.assert_allclose(predict(model, np.zeros(2)), [0.0, 1.0], atol=1e-12)


def test_ieee30_dlpf_shapes(case30):
    blocks = dlpf_blocks(case30)
    assert blocks.F.shape == (53, 53)
    assert blocks.E.shape == (53, 7)
    assert blocks.c.shape == (7,)


def test_linearized_model_is_close_at_base_case(case30):
    x0 = base_injections(case30)
    y0 = solve_unknowns(case30, x0)
    error = predict(init_linearized_pf(case30), x0) - y0
    assert np.max(np.abs(error)) < 0.1


def test_jacobian_model_exact_at_base_case(case30):
    model = init_jacobian(case30)
    x0 = base_injections(case30)
    assert model.provenance is Provenance.JACOBIAN
    np.testing.assert_allclose(predict(model, x0), solve_unknowns(case30, x0), atol=1e-9)


def test_jacobian_model_error_is_second_order(case30):
    model = init_jacobian(case30)
    x0 = base_injections(case30)
    direction = np.random.default_rng(5).normal(size=x0.size)
    direction /= np.linalg.norm(direction)

    def error(t):
        x = x0 + t * direction
        state, _ = newton_raphson(case30, x)
        return np.linalg.norm(predict(model, x) - unknowns_from_state(case30, state))

    ratio = error(2e-2) / error(1e-2)
    assert 3.0 < ratio < 5.0


def test_ridge_two_points():
    model = ridge_fit(np.array([[0.0], [1.0]]), np.array([[1.0], [3.0]]), lam=0.0)
    assert model.Ws[0, 0] == pytest.approx(2.0)
    assert model.bs[0] == pytest.approx(1.0)
    assert model.provenance is Provenance.RIDGE


def test_ridge_huge_penalty_predicts_mean(regression_data):
    X, Y = regression_data
    model = ridge_fit(X, Y, lam=1e9)
    assert np.max(np.abs(model.Ws)) < 1e-5
    np.testing.assert_allclose(model.bs, Y.mean(axis=0), atol=1e-4)


def test_ridge_default_penalty(regression_data):
    X, Y = regression_data
    explicit = ridge_fit(X, Y, lam=1e-3 * X.shape[0])
    np.testing.assert_array_equal(ridge_fit(X, Y).Ws, explicit.Ws)


def test_ridge_gradients_vanish_at_fit(regression_data):
    X, Y = regression_data
    model = ridge_fit(X, Y, lam=2.0)
    dW, db = ridge_gradients(model, X, Y, 2.0)
    assert np.max(np.abs(dW)) < 1e-8
    assert np.max(np.abs(db)) < 1e-8


def test_ridge_matches_gradient_descent(regression_data):
    X, Y = regression_data
    lam = 5.0
    A = np.hstack([X, np.ones((X.shape[0], 1))])
    penalty = np.diag([lam] * X.shape[1] + [0.0])
    step = 1.0 / (2.0 * np.linalg.eigvalsh(A.T @ A + penalty).max())
    theta = np.zeros((A.shape[1], Y.shape[1]))
    for _ in range(20000):
        theta -= step * 2.0 * (A.T @ (A @ theta - Y) + penalty @ theta)
    model = ridge_fit(X, Y, lam=lam)
    np.testing.assert_allclose(model.Ws, theta[:-1].T, atol=1e-8)
    np.testing.assert_allclose(model.bs, theta[-1], atol=1e-8)
    nudged = AffineModel(Ws=model.Ws + 1e-3, bs=model.bs, provenance=Provenance.RIDGE)
    assert ridge_objective(model, X, Y, lam) < ridge_objective(nudged, X, Y, lam)


def test_unpenalized_ridge_is_least_squares(regression_data):
    X, Y = regression_data
    model = ridge_fit(X, Y, lam=0.0)
    residual = Y - predict(model, X)
    Xc = X - X.mean(axis=0)
    assert np.max(np.abs(Xc.T @ residual)) < 1e-9
    np.testing.assert_allclose(residual.sum(axis=0), 0.0, atol=1e-9)
    A = np.hstack([X, np.ones((X.shape[0], 1))])
    theta = np.linalg.lstsq(A, Y, rcond=None)[0]
    np.testing.assert_allclose(model.Ws, theta[:-1].T, atol=1e-10)
    np.testing.assert_allclose(model.bs, theta[-1], atol=1e-10)


def test_ridge_standardize_agrees_without_penalty(regression_data):
    X, Y = regression_data
    raw = ridge_fit(X, Y, lam=0.0)
    scaled = ridge_fit(X, Y, lam=0.0, standardize=True)
    np.testing.assert_allclose(predict(scaled, X), predict(raw, X), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(lams=st.tuples(st.floats(0.0, 1e3), st.floats(0.0, 1e3)).map(sorted))
def test_ridge_norm_shrinks_with_penalty(regression_data, lams):
    X, Y = regression_data
    small, large = lams
    assert np.linalg.norm(ridge_fit(X, Y, lam=large).Ws) <= np.linalg.norm(ridge_fit(X, Y, lam=small).Ws) + 1e-10


def test_ridge_rejects_bad_input(regression_data):
    X, Y = regression_data
    with pytest.raises(BadParameter):
        ridge_fit(X, Y, lam=-1.0)
    with pytest.raises(BadParameter):
        ridge_fit(X[:1], Y[:1])
    with pytest.raises(DimensionMismatch):
        ridge_fit(X, Y[:10])


def test_predict_identity():
    model = AffineModel(Ws=np.eye(3), bs=np.zeros(3), provenance=Provenance.RANDOM)
    X = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(predict(model, X), X)
    np.testing.assert_array_equal(predict(model, X[0]), X[0])


def test_predict_bias_only():
    model = AffineModel(Ws=np.zeros((2, 3)), bs=np.array([1.0, 2.0]), provenance=Provenance.RANDOM)
    np.testing.assert_array_equal(predict(model, np.ones((4, 3))), np.tile([1.0, 2.0], (4, 1)))


def test_predict_rejects_wrong_width():
    model = AffineModel(Ws=np.eye(3), bs=np.zeros(3), provenance=Provenance.RANDOM)
    with pytest.raises(DimensionMismatch):
        predict(model, np.ones((2, 4)))


def test_affine_model_rejects_nan():
    with pytest.raises(NonFinite):
        AffineModel(Ws=np.array([[np.nan]]), bs=np.zeros(1), provenance=Provenance.RANDOM)
