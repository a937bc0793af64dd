"""Loss, derivatives, and the inner solver for the client-weighted model."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.linalg import cho_factor
from scipy.optimize import minimize_scalar

from conftest import logistic_samples

from fairshot.data import Samples
from fairshot.errors import UnderdeterminedError
from fairshot.logit import (
    GroupedSamples,
    InnerSolveConfig,
    grad_theta,
    hess_theta,
    mixed_partial,
    predict,
    regularized_loss,
    ridge_penalty,
    solve_inner,
    weighted_loss,
)

CFG = InnerSolveConfig()


def single_point(x0, s, y):
    return Samples(np.array([[float(x0)]]), np.array([s]), np.array([y]))


def grouped_instance(seed, k=3, n=40):
    clients = [logistic_samples(n, seed + c, group_shift=0.3 * c) for c in range(k)]
    return GroupedSamples(clients)


def test_loss_at_zero_is_log_two():
    g = GroupedSamples([logistic_samples(30, 1)])
    assert abs(weighted_loss(g, np.array([1.0]), np.zeros(g.dim)) - np.log(2.0)) <= 1e-15


def test_loss_vanishes_on_confident_correct_point():
    g = GroupedSamples([single_point(100.0, 0, 1)])
    assert weighted_loss(g, np.array([1.0]), np.array([1.0, 0.0])) < 1e-40


def test_loss_frozen_scalar_on_confident_wrong_point():
    ## -y a.theta = 1 so the loss is log(1 + e)
    g = GroupedSamples([single_point(1.0, 0, -1)])
    value = weighted_loss(g, np.array([1.0]), np.array([1.0, 0.0]))
    assert abs(value - 1.3132616875182228) <= 1e-12


def test_ridge_penalty_hand_value():
    assert ridge_penalty(np.array([1.0, 1.0]), 8.0) == 2.0
    assert ridge_penalty(np.array([3.0, 0.0, 0.0]), 0.0) == 0.0


def test_regularized_loss_is_sum_of_parts():
    g = grouped_instance(5)
    w = np.array([0.2, 0.5, 0.3])
    theta = np.linspace(-0.4, 0.4, g.dim)
    cfg = InnerSolveConfig(lambda_theta=0.7)
    total = regularized_loss(g, w, theta, cfg)
    assert abs(total - weighted_loss(g, w, theta) - ridge_penalty(theta, 0.7)) <= 1e-15


def test_grad_matches_finite_differences():
    g = grouped_instance(9)
    w = np.array([0.5, 0.2, 0.3])
    cfg = InnerSolveConfig(lambda_theta=1e-3)
    rng = np.random.default_rng(2)
    for _ in range(3):
        theta = rng.normal(size=g.dim)
        grad = grad_theta(g, w, theta, cfg)
        h = 1e-6
        for j in range(g.dim):
            e = np.zeros(g.dim)
            e[j] = h
            fd = (regularized_loss(g, w, theta + e, cfg)
                  - regularized_loss(g, w, theta - e, cfg)) / (2.0 * h)
            assert abs(fd - grad[j]) <= 1e-6 * max(1.0, abs(grad[j]))


def test_hessian_symmetric_and_matches_finite_differences():
    g = grouped_instance(10)
    w = np.array([0.4, 0.4, 0.2])
    cfg = InnerSolveConfig(lambda_theta=1e-3)
    theta = np.linspace(-0.5, 0.5, g.dim)
    H = hess_theta(g, w, theta, cfg)
    assert np.max(np.abs(H - H.T)) <= 1e-15
    cho_factor(H)  ## positive definite
    h = 1e-5
    for j in range(g.dim):
        e = np.zeros(g.dim)
        e[j] = h
        fd = (grad_theta(g, w, theta + e, cfg) - grad_theta(g, w, theta - e, cfg)) / (2.0 * h)
        assert np.max(np.abs(fd - H[:, j])) <= 1e-5


def test_hessian_zero_weights_leaves_ridge_only():
    g = grouped_instance(11)
    cfg = InnerSolveConfig(lambda_theta=0.9)
    H = hess_theta(g, np.zeros(3), np.zeros(g.dim), cfg)
    lam = 0.9 / g.dim ** 2
    assert np.allclose(H, lam * np.eye(g.dim), atol=1e-15)


def test_mixed_partial_zero_column_for_empty_client():
    base = logistic_samples(25, 12)
    empty = Samples(np.zeros((0, base.n_features)), np.zeros(0), np.zeros(0))
    g = GroupedSamples([base, empty])
    mp = mixed_partial(g, np.array([0.7, 0.3]), np.zeros(g.dim), CFG)
    assert mp.shape == (g.dim, 2)
    assert np.all(mp[:, 1] == 0.0)


def test_mixed_partial_recombines_into_gradient():
    g = grouped_instance(13)
    cfg = InnerSolveConfig(lambda_theta=0.05)
    rng = np.random.default_rng(3)
    for _ in range(3):
        w = rng.dirichlet(np.ones(3))
        theta = rng.normal(size=g.dim)
        mp = mixed_partial(g, w, theta, cfg)
        lam = 0.05 / g.dim ** 2
        recombined = mp @ w + lam * theta
        assert np.max(np.abs(recombined - grad_theta(g, w, theta, cfg))) <= 1e-12


def test_mixed_partial_matches_finite_differences_in_w():
    g = grouped_instance(14)
    cfg = InnerSolveConfig(lambda_theta=1e-3)
    w = np.array([0.3, 0.45, 0.25])
    theta = np.linspace(-0.3, 0.6, g.dim)
    mp = mixed_partial(g, w, theta, cfg)
    h = 1e-6
    for c in range(3):
        e = np.zeros(3)
        e[c] = h
        fd = (grad_theta(g, w + e, theta, cfg) - grad_theta(g, w - e, theta, cfg)) / (2.0 * h)
        assert np.max(np.abs(fd - mp[:, c])) <= 1e-5


def test_solve_inner_meets_gradient_tolerance():
    g = GroupedSamples([logistic_samples(200, 15)])
    res = solve_inner(g, np.array([1.0]), CFG)
    assert res.converged
    grad = grad_theta(g, np.array([1.0]), res.theta, CFG)
    assert np.max(np.abs(grad)) <= 1e-7
    assert res.grad_sup_norm <= 1e-7


def test_solve_inner_identical_clients_weight_invariance():
    base = logistic_samples(60, 16)
    g = GroupedSamples([base, base, base])
    cfg = InnerSolveConfig(tol=1e-10)
    thetas = [
        solve_inner(g, np.array(w), cfg).theta
        for w in ([1 / 3, 1 / 3, 1 / 3], [0.7, 0.2, 0.1], [0.0, 0.0, 1.0])
    ]
    assert np.max(np.abs(thetas[0] - thetas[1])) <= 1e-6
    assert np.max(np.abs(thetas[0] - thetas[2])) <= 1e-6


def test_solve_inner_one_dimensional_golden_section_oracle():
    rng = np.random.default_rng(17)
    n = 80
    x = rng.normal(size=(n, 1))
    s = np.zeros(n, dtype=np.int64)
    y = np.where(x[:, 0] + 0.7 * rng.logistic(size=n) > 0, 1, -1).astype(np.int64)
    g = GroupedSamples([Samples(x, s, y)])
    cfg = InnerSolveConfig(lambda_theta=1e-2)
    res = solve_inner(g, np.array([1.0]), cfg)

    def scalar_objective(t):
        z = x[:, 0] * t
        return float(np.logaddexp(0.0, -y * z).mean()) + 1e-2 / (2.0 * 4.0) * t * t

    oracle = minimize_scalar(scalar_objective, bracket=(-5.0, 0.0, 5.0), method="golden",
                             options={"xtol": 1e-10})
    ## s is constant zero so the second coordinate carries no signal
    assert abs(res.theta[1]) <= 1e-6
    assert abs(res.theta[0] - oracle.x) <= 1e-5


def test_solve_inner_duplicate_every_sample_invariance():
    base = logistic_samples(50, 18)
    doubled = Samples(
        np.vstack([base.x, base.x]),
        np.concatenate([base.s, base.s]),
        np.concatenate([base.y, base.y]),
    )
    cfg = InnerSolveConfig(tol=1e-10)
    one = solve_inner(GroupedSamples([base]), np.array([1.0]), cfg).theta
    two = solve_inner(GroupedSamples([doubled]), np.array([1.0]), cfg).theta
    assert np.max(np.abs(one - two)) <= 1e-8


def test_solve_inner_descends_from_any_start():
    g = grouped_instance(19)
    w = np.array([0.25, 0.5, 0.25])
    res = solve_inner(g, w, CFG)
    best = regularized_loss(g, w, res.theta, CFG)
    assert best <= regularized_loss(g, w, np.zeros(g.dim), CFG) + 1e-12
    rng = np.random.default_rng(4)
    for _ in range(5):
        assert best <= regularized_loss(g, w, rng.normal(size=g.dim), CFG) + 1e-12


def test_solve_inner_warm_start_agrees():
    g = grouped_instance(20)
    w = np.array([0.2, 0.3, 0.5])
    cold = solve_inner(g, w, CFG)
    warm = solve_inner(g, w, CFG, warm_start=cold.theta)
    assert warm.converged
    assert np.max(np.abs(warm.theta - cold.theta)) <= 1e-8


def test_solve_inner_underdetermined():
    g = grouped_instance(21)
    with pytest.raises(UnderdeterminedError):
        solve_inner(g, np.zeros(3), CFG)
    base = logistic_samples(25, 22)
    empty = Samples(np.zeros((0, base.n_features)), np.zeros(0), np.zeros(0))
    with pytest.raises(UnderdeterminedError):
        solve_inner(GroupedSamples([base, empty]), np.array([0.0, 1.0]), CFG)


def test_predict_conventions():
    a = np.array([[1.0, 0.0], [2.0, 1.0], [-3.0, 0.0]])
    assert np.array_equal(predict(np.zeros(2), a), np.array([1, 1, 1]))
    single = predict(np.array([1.0, 0.0]), np.array([-3.0, 0.0]))
    assert single == -1
    assert isinstance(single, (int, np.integer))


def test_predict_matches_probability_threshold():
    from scipy.special import expit

    rng = np.random.default_rng(23)
    a = rng.normal(size=(1000, 4))
    theta = rng.normal(size=4)
    preds = predict(theta, a)
    probs = expit(a @ theta)
    assert np.array_equal(preds == 1, probs >= 0.5)
