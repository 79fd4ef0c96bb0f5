import numpy as np
import pytest

from hgnplan.nn import (
    AdamState,
    MlpParams,
    adam_step,
    init_params,
    leaky_relu,
    mlp_backward,
    mlp_forward,
    mse,
)

from oracles import central_difference, gradient_close


def test_leaky_relu_values():
    x = np.array([2.0, -1.0, 0.0])
    assert leaky_relu(x, 0.01).tolist() == [2.0, -0.01, 0.0]
    with pytest.raises(ValueError):
        leaky_relu(x, 1.5)


def test_mse_values():
    assert mse(3, 4) == 1
    assert mse(4, 4) == 0
    assert mse(0, 5) == 25


def test_forward_zero_params():
    p = MlpParams([np.zeros((3, 2)), np.zeros((2, 3))],
                  [np.zeros(3), np.zeros(2)])
    y, _ = mlp_forward(p, np.array([[5.0, -7.0]]))
    assert y.tolist() == [[0.0, 0.0]]


def test_forward_identity_positive():
    p = MlpParams([np.eye(2)], [np.zeros(2)])
    y, _ = mlp_forward(p, np.array([[3.0, 4.0]]))
    assert y.tolist() == [[3.0, 4.0]]


def test_forward_affine():
    p = MlpParams([np.array([[1.0, 1.0]])], [np.array([0.5])], final_linear=True)
    y, _ = mlp_forward(p, np.array([[1.0, 2.0]]))
    assert y.tolist() == [[3.5]]


def test_forward_dimension_mismatch():
    p = MlpParams([np.eye(2)], [np.zeros(2)])
    with pytest.raises(ValueError):
        mlp_forward(p, np.ones((1, 3)))


def test_backward_single_linear_layer():
    w = np.array([[2.0, -3.0]])
    p = MlpParams([w.copy()], [np.zeros(1)], final_linear=True)
    x = np.array([[5.0, 7.0]])
    _, cache = mlp_forward(p, x)
    dw, db, dx = mlp_backward(p, cache, np.array([[1.0]]))
    assert dw[0].tolist() == x.tolist()       # dW = dy^T x
    assert db[0].tolist() == [1.0]
    assert dx.tolist() == w.tolist()          # dx = dy W


def test_backward_zero_upstream():
    p = init_params([3, 4, 2], seed=0)
    x = np.random.default_rng(0).normal(size=(5, 3))
    _, cache = mlp_forward(p, x)
    dw, db, dx = mlp_backward(p, cache, np.zeros((5, 2)))
    assert all(np.all(g == 0) for g in dw + db)
    assert np.all(dx == 0)


def test_backward_matches_finite_differences():
    rng = np.random.default_rng(42)
    for trial in range(10):
        dims = [int(d) for d in rng.integers(1, 5, size=rng.integers(2, 4))]
        p = init_params(dims, seed=trial, final_linear=bool(trial % 2))
        for b in p.biases:  # move pre-activations off the kink at exactly 0
            b += rng.normal(scale=0.5, size=b.shape)
        x = rng.normal(size=(3, dims[0]))
        dy = rng.normal(size=(3, dims[-1]))

        def objective():
            y, _ = mlp_forward(p, x)
            return float((y * dy).sum())

        _, cache = mlp_forward(p, x)
        dws, dbs, dx = mlp_backward(p, cache, dy)
        for arr, grad in list(zip(p.weights, dws)) + list(zip(p.biases, dbs)):
            flat, gflat = arr.reshape(-1), grad.reshape(-1)
            for j in range(flat.size):
                fd = central_difference(objective, flat, j)
                assert gradient_close(gflat[j], fd), (trial, j, gflat[j], fd)


def test_adam_first_step_value():
    theta = [np.array([1.0])]
    state = AdamState.for_params(theta)
    adam_step(theta, [np.array([0.5])], state, lr=0.001)
    assert theta[0][0] == pytest.approx(0.999, abs=1e-6)
    assert state.t == 1


def test_adam_zero_gradient_is_identity():
    theta = [np.array([1.5, -2.0])]
    state = AdamState.for_params(theta)
    adam_step(theta, [np.zeros(2)], state, lr=0.1, weight_decay=0.0)
    assert theta[0].tolist() == [1.5, -2.0]


def test_adam_zero_lr_updates_moments_only():
    theta = [np.array([1.0])]
    state = AdamState.for_params(theta)
    adam_step(theta, [np.array([2.0])], state, lr=0.0)
    assert theta[0][0] == 1.0
    assert state.m[0][0] != 0 and state.v[0][0] != 0


def test_adam_weight_decay_changes_update():
    plain = [np.array([1.0])]
    decayed = [np.array([1.0])]
    s1, s2 = AdamState.for_params(plain), AdamState.for_params(decayed)
    adam_step(plain, [np.array([0.0])], s1, lr=0.01, weight_decay=0.0)
    adam_step(decayed, [np.array([0.0])], s2, lr=0.01, weight_decay=0.1)
    assert plain[0][0] == 1.0
    assert decayed[0][0] < 1.0  # decay pulls the weight toward zero


def test_init_params_deterministic_and_bounded():
    a = init_params([2, 32, 32], seed=9)
    b = init_params([2, 32, 32], seed=9)
    assert all(np.array_equal(x, y) for x, y in zip(a.weights, b.weights))
    assert a.weights[0].shape == (32, 2)
    assert a.weights[1].shape == (32, 32)
    assert all(np.all(bias == 0) for bias in a.biases)
    for w, fan_in, fan_out in ((a.weights[0], 2, 32), (a.weights[1], 32, 32)):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        assert np.all(np.abs(w) <= bound)


def test_param_validation():
    with pytest.raises(ValueError):
        MlpParams([np.ones((2, 3)), np.ones((2, 4))], [np.zeros(2), np.zeros(2)])
    with pytest.raises(ValueError):
        init_params([3], seed=0)
