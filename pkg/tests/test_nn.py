import numpy as np
import pytest

from ldamend.nn import (
    DenseLayer,
    MlpNetwork,
    OptimizerState,
    build_mlp,
    cosine_similarity,
    cosine_similarity_grad,
    cross_entropy,
    finite_difference_grad,
    init_dense,
    mlp_backward,
    mlp_forward,
    mlp_forward_batch,
    optimizer_step,
    softmax,
)


def identity_net(dim):
    layer = DenseLayer(weights=np.eye(dim), bias=np.zeros(dim), activation="identity")
    return MlpNetwork(layers=[layer])


def rel_err(a, b):
    denom = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-12)
    return np.max(np.abs(a - b)) / denom


# ---------------------------------------------------------------- forward


def test_forward_identity_layer():
    y, _ = mlp_forward(identity_net(2), np.array([1.0, 2.0]))
    np.testing.assert_array_equal(y, [1.0, 2.0])


def test_forward_relu_layer():
    net = MlpNetwork(
        layers=[DenseLayer(weights=np.eye(2), bias=np.zeros(2), activation="relu")]
    )
    y, _ = mlp_forward(net, np.array([-1.0, 3.0]))
    np.testing.assert_array_equal(y, [0.0, 3.0])


def test_forward_matches_straight_line_recomputation():
    # independent oracle: recompute W2 @ act(W1 @ x + b1) + b2 by hand
    rng = np.random.default_rng(7)
    net = build_mlp([4, 5, 3], ["tanh", "identity"], rng)
    x = rng.normal(size=4)
    y, _ = mlp_forward(net, x)
    w1, b1 = net.layers[0].weights, net.layers[0].bias
    w2, b2 = net.layers[1].weights, net.layers[1].bias
    expected = w2 @ np.tanh(w1 @ x + b1) + b2
    np.testing.assert_allclose(y, expected, rtol=0, atol=1e-14)


def test_forward_dimension_mismatch():
    with pytest.raises(ValueError):
        mlp_forward(identity_net(2), np.array([1.0, 2.0, 3.0]))


def test_forward_batch_rows_match_single_calls():
    rng = np.random.default_rng(8)
    net = build_mlp([3, 6, 2], ["relu", "identity"], rng)
    xs = rng.normal(size=(5, 3))
    ys, _ = mlp_forward_batch(net, xs)
    for i in range(5):
        yi, _ = mlp_forward(net, xs[i])
        # BLAS kernels differ between matrix-matrix and matrix-vector paths
        np.testing.assert_allclose(ys[i], yi, rtol=0, atol=1e-12)


# ---------------------------------------------------------------- backward


def test_backward_identity_net():
    net = identity_net(2)
    _, trace = mlp_forward(net, np.array([0.5, -0.5]))
    dx, _ = mlp_backward(net, trace, np.array([1.0, 0.0]))
    np.testing.assert_array_equal(dx, [1.0, 0.0])


def test_backward_zero_gradient():
    rng = np.random.default_rng(9)
    net = build_mlp([3, 4, 2], ["tanh", "identity"], rng)
    _, trace = mlp_forward(net, rng.normal(size=3))
    dx, grads = mlp_backward(net, trace, np.zeros(2))
    assert not dx.any()
    assert all(not g.any() for g in grads)


def test_backward_matches_finite_differences():
    rng = np.random.default_rng(10)
    for _ in range(5):
        net = build_mlp([4, 5, 3], ["tanh", "relu"], rng)
        x = rng.normal(size=4)
        target = rng.normal(size=3)

        def loss_fn(params):
            trial = MlpNetwork(
                layers=[
                    DenseLayer(params[2 * k], params[2 * k + 1], layer.activation)
                    for k, layer in enumerate(net.layers)
                ]
            )
            y, _ = mlp_forward(trial, x)
            return float(((y - target) ** 2).sum())

        y, trace = mlp_forward(net, x)
        _, grads = mlp_backward(net, trace, 2.0 * (y - target))
        fd = finite_difference_grad(loss_fn, net.parameters())
        for g, g_fd in zip(grads, fd):
            assert rel_err(g, g_fd) < 1e-4


def test_backward_rejects_mismatched_trace():
    rng = np.random.default_rng(11)
    net = build_mlp([3, 4, 2], ["relu", "identity"], rng)
    other = build_mlp([3, 5, 2], ["relu", "identity"], rng)
    _, trace = mlp_forward(other, np.zeros(3))
    with pytest.raises(ValueError):
        mlp_backward(net, trace, np.zeros(2))


# ---------------------------------------------------------------- finite differences


def test_fd_quadratic():
    grad = finite_difference_grad(lambda p: float(p[0][0] ** 2), [np.array([3.0])])
    assert abs(grad[0][0] - 6.0) < 1e-6


def test_fd_constant_loss():
    grad = finite_difference_grad(lambda p: 1.25, [np.zeros(4)])
    np.testing.assert_array_equal(grad[0], np.zeros(4))


def test_fd_linear_sum():
    grad = finite_difference_grad(
        lambda p: float(p[0].sum()), [np.array([0.3, -2.0, 5.0])]
    )
    np.testing.assert_allclose(grad[0], np.ones(3), atol=1e-9)


def test_fd_rejects_nonfinite_loss():
    with pytest.raises(ValueError):
        finite_difference_grad(lambda p: float("nan"), [np.zeros(2)])


# ---------------------------------------------------------------- cosine


def test_cosine_identical():
    assert cosine_similarity([1.0, 0.0], [1.0, 0.0]) == 1.0


def test_cosine_orthogonal():
    assert cosine_similarity([1.0, 0.0], [0.0, 1.0]) == 0.0


def test_cosine_known_value():
    # (1*3 + 2*2 + 3*1) / (sqrt(14) * sqrt(14)) = 10/14
    assert abs(cosine_similarity([1, 2, 3], [3, 2, 1]) - 10.0 / 14.0) < 1e-12


def test_cosine_zero_norm_rejected():
    with pytest.raises(ValueError):
        cosine_similarity([0.0, 0.0], [1.0, 0.0])


def test_cosine_symmetry_and_scale_invariance():
    rng = np.random.default_rng(12)
    for _ in range(100):
        a = rng.normal(size=5)
        b = rng.normal(size=5)
        lam, mu = rng.uniform(0.1, 10.0, size=2)
        assert abs(cosine_similarity(a, b) - cosine_similarity(b, a)) < 1e-12
        assert (
            abs(cosine_similarity(a, b) - cosine_similarity(lam * a, mu * b)) < 1e-12
        )


def test_cosine_gradient_matches_finite_differences():
    rng = np.random.default_rng(13)
    for _ in range(20):
        a = rng.normal(size=6)
        b = rng.normal(size=6)
        _, grad = cosine_similarity_grad(a, b)
        fd = finite_difference_grad(
            lambda p: cosine_similarity(p[0], b), [a]
        )
        assert rel_err(grad, fd[0]) < 1e-6


# ---------------------------------------------------------------- softmax / cross entropy


def test_softmax_uniform_on_zero_logits():
    np.testing.assert_allclose(softmax(np.zeros(3)), np.full(3, 1 / 3), atol=1e-15)


def test_softmax_on_simplex_and_shift_invariant():
    rng = np.random.default_rng(14)
    for _ in range(200):
        z = rng.normal(scale=50.0, size=7)
        p = softmax(z)
        assert abs(p.sum() - 1.0) < 1e-9
        assert (p >= 0).all()
        shift = rng.normal(scale=100.0)
        assert np.max(np.abs(softmax(z + shift) - p)) < 1e-9


def test_cross_entropy_uniform_two_classes():
    loss, _ = cross_entropy(np.array([0.5, 0.5]), np.zeros(2))
    assert abs(loss - np.log(2.0)) < 1e-12


def test_cross_entropy_vanishes_at_confident_correct_logits():
    loss, _ = cross_entropy(np.array([1.0, 0.0]), np.array([40.0, -40.0]))
    assert loss < 1e-9


def test_cross_entropy_gradient_is_softmax_minus_target():
    rng = np.random.default_rng(15)
    for _ in range(50):
        z = rng.normal(size=5)
        q = rng.dirichlet(np.ones(5))
        loss, grad = cross_entropy(q, z)
        np.testing.assert_allclose(grad, softmax(z) - q, atol=1e-12)
        # loss >= entropy(q), equality iff softmax(z) == q
        entropy = -(q * np.log(q)).sum()
        assert loss >= entropy - 1e-12


def test_cross_entropy_rejects_non_simplex_target():
    with pytest.raises(ValueError):
        cross_entropy(np.array([0.7, 0.7]), np.zeros(2))
    with pytest.raises(ValueError):
        cross_entropy(np.array([1.5, -0.5]), np.zeros(2))


# ---------------------------------------------------------------- optimizers


def test_sgd_step_arithmetic():
    state = OptimizerState(kind="sgd", learning_rate=0.1)
    params = [np.array([1.0])]
    optimizer_step(state, params, [np.array([2.0])])
    assert params[0][0] == pytest.approx(0.8, abs=1e-15)


def test_sgd_zero_gradient_keeps_parameters():
    state = OptimizerState(kind="sgd", learning_rate=0.5)
    params = [np.array([1.0, -2.0])]
    optimizer_step(state, params, [np.zeros(2)])
    np.testing.assert_array_equal(params[0], [1.0, -2.0])


def test_adam_first_step_matches_reference_formula():
    state = OptimizerState(kind="adam", learning_rate=0.1)
    params = [np.array([1.0])]
    optimizer_step(state, params, [np.array([2.0])])
    # bias-corrected m_hat = 2, v_hat = 4 at t=1
    expected = 1.0 - 0.1 * 2.0 / (np.sqrt(4.0) + 1e-8)
    assert params[0][0] == pytest.approx(expected, abs=1e-15)


def test_same_seed_training_is_bit_identical():
    def run():
        rng = np.random.default_rng(99)
        net = build_mlp([3, 4, 2], ["tanh", "identity"], rng)
        state = OptimizerState(kind="adam", learning_rate=1e-2)
        xs = np.random.default_rng(5).normal(size=(8, 3))
        for x in xs:
            y, trace = mlp_forward(net, x)
            _, grads = mlp_backward(net, trace, 2.0 * y)
            optimizer_step(state, net.parameters(), grads)
        return [p.copy() for p in net.parameters()]

    for a, b in zip(run(), run()):
        np.testing.assert_array_equal(a, b)


def test_optimizer_shape_mismatch_rejected():
    state = OptimizerState(kind="sgd", learning_rate=0.1)
    with pytest.raises(ValueError):
        optimizer_step(state, [np.zeros(2)], [np.zeros(3)])


def test_init_dense_bounds_and_determinism():
    layer_a = init_dense(8, 4, "relu", np.random.default_rng(3))
    layer_b = init_dense(8, 4, "relu", np.random.default_rng(3))
    np.testing.assert_array_equal(layer_a.weights, layer_b.weights)
    limit = np.sqrt(6.0 / 12.0)
    assert np.abs(layer_a.weights).max() <= limit
    assert not layer_a.bias.any()
