import numpy as np
import pytest

from analytics.computation import Provenance, init_linearized_pf, predict, ridge_gradients
from gridflow.exceptions import BadParameter, DimensionMismatch, MissingContext
from ppf.engine import GaussianGroup, ScenarioSpec, generate_dataset
from surrogate.resnet import (
    TRUNK_HE_SLOPE,
    InitScheme,
    NetSpec,
    backward,
    forward,
    infer,
    init_net,
    mse_loss,
    trunk,
)
from surrogate.training import dataset_mse


def random_net(sizes, *, shortcut=True, seed=0):
    spec = NetSpec(layer_sizes=sizes, shortcut=shortcut)
    return init_net(spec, InitScheme.RANDOM, seed=seed)


def loss_of(model, X, Y):
    return mse_loss(forward(model, X)[0], Y)[0]


def test_init_is_deterministic():
    a = random_net((3, 5, 3), seed=4)
    b = random_net((3, 5, 3), seed=4)
    for p, q in zip(a.parameters(), b.parameters()):
        np.testing.assert_array_equal(p, q)


def test_seeds_differ():
    assert not np.array_equal(random_net((3, 5, 3), seed=1).Ws, random_net((3, 5, 3), seed=2).Ws)


def test_zero_trunk_output_delegates_to_shortcut(case2, rng):
    spec = NetSpec.for_network(case2, (4,), trunk_output_init="zero")
    model = init_net(spec, "lpf", net=case2)
    X = rng.normal(size=(6, 2))
    assert model.provenance is Provenance.LINEARIZED_PF
    np.testing.assert_allclose(infer(model, X), predict(init_linearized_pf(case2), X), atol=1e-14)


def test_data_scheme_uses_ridge(rng):
    X = rng.normal(size=(40, 3))
    Y = X @ rng.normal(size=(3, 3))
    model = init_net(NetSpec((3, 4, 3), trunk_output_init="zero"), "data", X=X, Y=Y, ridge_lambda=0.0)
    assert model.provenance is Provenance.RIDGE
    np.testing.assert_allclose(infer(model, X), Y, atol=1e-10)


@pytest.fixture(scope="module")
def pv_dataset(case30):
    spec = ScenarioSpec(
        gaussian_groups=(GaussianGroup("pv", "generation", "pv", std_ratio=0.2, correlation=0.2),),
        samples=200,
        seed=3,
    )
    return generate_dataset(case30, spec)


@pytest.mark.parametrize("scheme", list(InitScheme))
def test_trunk_layers_are_random_by_default(case30, pv_dataset, scheme):
    spec = NetSpec.for_network(case30, (100, 100))
    assert spec.trunk_output_init == "he"
    model = init_net(spec, scheme, net=case30, X=pv_dataset.X, Y=pv_dataset.Y, ridge_lambda=1.0, seed=2)
    for W in model.weights:
        fan_in = W.shape[0]
        assert np.count_nonzero(W) == W.size
        assert np.abs(W).max() <= np.sqrt(6.0 / fan_in)
        assert np.abs(W).max() <= np.sqrt(6.0 / ((1 + TRUNK_HE_SLOPE**2) * fan_in))
    assert np.abs(trunk(model, pv_dataset.X)).max() > 0


@pytest.mark.parametrize("seed", [0, 1])
def test_physics_init_starts_far_below_random(case30, pv_dataset, seed):
    X, Y = pv_dataset.X, pv_dataset.Y
    spec = NetSpec.for_network(case30, (100, 100))
    initial = {}
    for scheme in ("random", "lpf", "jac", "data"):
        model = init_net(spec, scheme, net=case30, X=X, Y=Y, ridge_lambda=1e-3 * len(X), seed=seed)
        initial[scheme] = dataset_mse(model, X, Y)
    for scheme in ("lpf", "jac", "data"):
        assert initial[scheme] < 1e-2 * initial["random"], scheme


def test_without_shortcut_output_is_trunk(rng):
    model = random_net((3, 6, 3), shortcut=False)
    X = rng.normal(size=(5, 3))
    np.testing.assert_array_equal(model.Ws, 0.0)
    np.testing.assert_allclose(infer(model, X), trunk(model, X))


def test_dead_relu_passes_only_output_bias(rng):
    model = random_net((3, 4, 3))
    model.biases[0][:] = -1e6
    model.biases[1][:] = [0.5, -0.5, 2.0]
    X = rng.normal(size=(5, 3))
    np.testing.assert_allclose(trunk(model, X), np.tile([0.5, -0.5, 2.0], (5, 1)))


def test_forward_by_hand(rng):
    model = random_net((2, 3, 4, 2))
    for b in model.biases:
        b[:] = rng.normal(size=b.shape)
    X = rng.normal(size=(7, 2))
    h1 = np.maximum(X @ model.weights[0] + model.biases[0], 0)
    h2 = np.maximum(h1 @ model.weights[1] + model.biases[1], 0)
    expected = h2 @ model.weights[2] + model.biases[2] + X @ model.Ws.T + model.bs
    np.testing.assert_allclose(forward(model, X)[0], expected, atol=1e-12)


def test_zero_upstream_gradient(rng):
    model = random_net((3, 5, 3))
    _, cache = forward(model, rng.normal(size=(4, 3)))
    for g in backward(model, cache, np.zeros((4, 3))):
        np.testing.assert_array_equal(g, 0.0)


@pytest.mark.parametrize("sizes, shortcut", [((3, 5, 3), True), ((2, 4, 4, 2), True), ((4, 3, 4), False)])
def test_gradients_match_finite_differences(sizes, shortcut, rng):
    model = random_net(sizes, shortcut=shortcut, seed=7)
    for b in model.biases:
        b[:] = 0.1 * rng.normal(size=b.shape)
    X = rng.normal(size=(6, sizes[0]))
    Y = rng.normal(size=(6, sizes[-1]))
    Y_hat, cache = forward(model, X)
    grads = backward(model, cache, mse_loss(Y_hat, Y)[1])

    h = 1e-6
    params = model.parameters()
    checked = len(params) if shortcut else len(params) - 2
    for param, grad in zip(params[:checked], grads[:checked]):
        flat = param.reshape(-1)
        for i in range(0, flat.size, max(1, flat.size // 5)):
            original = flat[i]
            flat[i] = original + h
            up = loss_of(model, X, Y)
            flat[i] = original - h
            down = loss_of(model, X, Y)
            flat[i] = original
            assert grad.reshape(-1)[i] == pytest.approx((up - down) / (2 * h), rel=1e-5, abs=1e-8)
    for grad in grads[checked:]:
        np.testing.assert_array_equal(grad, 0.0)


def test_shortcut_gradient_matches_ridge_gradient(case2, rng):
    model = init_net(NetSpec.for_network(case2, (3,), trunk_output_init="zero"), "lpf", net=case2)
    X = rng.normal(size=(8, 2))
    Y = rng.normal(size=(8, 2))
    Y_hat, cache = forward(model, X)
    grads = backward(model, cache, mse_loss(Y_hat, Y)[1])
    dW, db = ridge_gradients(model.shortcut, X, Y, 0.0)
    np.testing.assert_allclose(grads[-2] * Y.size, dW, atol=1e-12)
    np.testing.assert_allclose(grads[-1] * Y.size, db, atol=1e-12)


def test_mse_loss_value():
    loss, grad = mse_loss(np.array([[1.0, 2.0]]), np.array([[0.0, 0.0]]))
    assert loss == pytest.approx(2.5)
    np.testing.assert_allclose(grad, [[1.0, 2.0]])


def test_infer_batches_agree(rng):
    model = random_net((3, 4, 3))
    X = rng.normal(size=(25, 3))
    np.testing.assert_allclose(infer(model, X, batch_size=7), infer(model, X), atol=1e-14)


def test_schemes_need_context():
    spec = NetSpec((2, 3, 2))
    with pytest.raises(MissingContext):
        init_net(spec, "lpf")
    with pytest.raises(MissingContext):
        init_net(spec, "data")


def test_spec_validation():
    with pytest.raises(BadParameter):
        NetSpec((3, 5, 4))
    with pytest.raises(BadParameter):
        NetSpec((3, 3))
    with pytest.raises(BadParameter):
        NetSpec((3, 5, 3), trunk_output_init="xavier")


def test_input_width_checked(rng):
    with pytest.raises(DimensionMismatch):
        infer(random_net((3, 4, 3)), rng.normal(size=(2, 4)))
