"""Boundary-covariance surrogate, counting metrics, and the proxy audit."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import logistic_samples

from fairshot.data import Samples
from fairshot.errors import DimensionError, EmptyInputError, MetricUndefinedError
from fairshot.fairness import (
    FairnessBudget,
    Metric,
    check_fair_proxy,
    client_dbc,
    dbc_client_rows,
    dbc_eo,
    dbc_sp,
    dbc_theta_gradient,
    eod,
    spd,
)
from fairshot.logit import GroupedSamples, InnerSolveConfig, predict

CFG = InnerSolveConfig()


def two_point_samples():
    ## rows a = (1, 0) and (3, 1); group mean 1/2
    x = np.array([[1.0], [3.0]])
    s = np.array([0, 1])
    y = np.array([-1, 1])
    return Samples(x, s, y)


def test_dbc_sp_hand_value():
    g = GroupedSamples([two_point_samples()])
    theta = np.array([2.0, 0.0])
    ## scores (2, 6); covariance terms (-1, 3); mean 1
    assert abs(dbc_sp(g, np.array([1.0]), theta) - 1.0) <= 1e-15


def test_dbc_eo_hand_value():
    g = GroupedSamples([two_point_samples()])
    theta = np.array([2.0, 0.0])
    ## only the positive-label row survives the mask; 3 / 2
    assert abs(dbc_eo(g, np.array([1.0]), theta) - 1.5) <= 1e-15


def test_dbc_degenerate_cases():
    g = GroupedSamples([two_point_samples()])
    w = np.array([1.0])
    assert dbc_sp(g, w, np.zeros(2)) == 0.0
    assert dbc_eo(g, w, np.zeros(2)) == 0.0

    same_s = Samples(np.array([[1.0], [3.0]]), np.array([1, 1]), np.array([-1, 1]))
    assert dbc_sp(GroupedSamples([same_s]), w, np.array([2.0, 0.0])) == 0.0

    all_negative = Samples(np.array([[1.0], [3.0]]), np.array([0, 1]), np.array([-1, -1]))
    assert dbc_eo(GroupedSamples([all_negative]), w, np.array([2.0, 0.0])) == 0.0

    all_positive = Samples(np.array([[1.0], [3.0]]), np.array([0, 1]), np.array([1, 1]))
    gp = GroupedSamples([all_positive])
    theta = np.array([0.7, -0.2])
    assert dbc_eo(gp, w, theta) == dbc_sp(gp, w, theta)


def test_dbc_linear_in_theta_and_w():
    rng = np.random.default_rng(6)
    clients = [logistic_samples(30, 60 + c) for c in range(3)]
    g = GroupedSamples(clients)
    for fn in (dbc_sp, dbc_eo):
        for _ in range(5):
            t1 = rng.normal(size=g.dim)
            t2 = rng.normal(size=g.dim)
            a, b = rng.normal(size=2)
            w = rng.dirichlet(np.ones(3))
            lhs = fn(g, w, a * t1 + b * t2)
            rhs = a * fn(g, w, t1) + b * fn(g, w, t2)
            assert abs(lhs - rhs) <= 1e-12

            w1 = rng.dirichlet(np.ones(3))
            w2 = rng.dirichlet(np.ones(3))
            lam = float(rng.random())
            theta = rng.normal(size=g.dim)
            lhs = fn(g, lam * w1 + (1 - lam) * w2, theta)
            rhs = lam * fn(g, w1, theta) + (1 - lam) * fn(g, w2, theta)
            assert abs(lhs - rhs) <= 1e-12


def test_dbc_theta_gradient_reconstructs_value():
    g = GroupedSamples([logistic_samples(40, 64), logistic_samples(35, 65)])
    rng = np.random.default_rng(7)
    w = rng.dirichlet(np.ones(2))
    theta = rng.normal(size=g.dim)
    for mask_positive, fn in ((False, dbc_sp), (True, dbc_eo)):
        grad = dbc_theta_gradient(g, w, mask_positive)
        assert abs(float(grad @ theta) - fn(g, w, theta)) <= 1e-12


def test_dbc_client_rows_reconstruct_value():
    g = GroupedSamples([logistic_samples(40, 66), logistic_samples(20, 67), logistic_samples(30, 68)])
    rng = np.random.default_rng(8)
    w = rng.dirichlet(np.ones(3))
    theta = rng.normal(size=g.dim)
    for mask_positive, fn in ((False, dbc_sp), (True, dbc_eo)):
        rows = dbc_client_rows(g, theta, mask_positive)
        assert rows.shape == (3,)
        assert abs(float(w @ rows) - fn(g, w, theta)) <= 1e-12


def test_client_dbc_matches_single_client_group():
    pts = logistic_samples(50, 69)
    theta = np.linspace(-0.5, 0.5, pts.dim)
    g = GroupedSamples([pts])
    assert client_dbc(pts, theta, Metric.SP) == dbc_sp(g, np.ones(1), theta)
    assert client_dbc(pts, theta, Metric.EO) == dbc_eo(g, np.ones(1), theta)


def test_spd_hand_values():
    ## theta = 0 predicts +1 everywhere
    pts = logistic_samples(40, 70)
    assert spd(pts, np.zeros(pts.dim)) == 0.0

    ## group 1 rate 1.0, group 0 rate 0.5
    x = np.array([[1.0], [1.0], [1.0], [-1.0]])
    s = np.array([1, 1, 0, 0])
    y = np.array([1, 1, 1, -1])
    pts = Samples(x, s, y)
    theta = np.array([1.0, 0.0])
    assert spd(pts, theta) == 0.5
    flipped = Samples(x, 1 - s, y)
    assert spd(flipped, theta) == -0.5


def test_eod_hand_values():
    ## positives: group 1 has predictions (+1, -1), group 0 has (+1)
    x = np.array([[1.0], [-1.0], [1.0], [-2.0]])
    s = np.array([1, 1, 0, 0])
    y = np.array([1, 1, 1, -1])
    pts = Samples(x, s, y)
    theta = np.array([1.0, 0.0])
    assert eod(pts, theta) == -0.5
    flipped = Samples(x, 1 - s, y)
    assert eod(flipped, theta) == 0.5


def test_metric_undefined_errors():
    x = np.array([[1.0], [2.0]])
    one_group = Samples(x, np.array([1, 1]), np.array([1, -1]))
    with pytest.raises(MetricUndefinedError):
        spd(one_group, np.zeros(2))
    no_positive_in_group = Samples(x, np.array([0, 1]), np.array([1, -1]))
    with pytest.raises(MetricUndefinedError):
        eod(no_positive_in_group, np.zeros(2))
    with pytest.raises(EmptyInputError):
        spd(Samples(np.zeros((0, 1)), np.zeros(0), np.zeros(0)), np.zeros(2))


def counting_spd(pts, theta):
    preds = predict(theta, pts.a)
    hits = {0: [0, 0], 1: [0, 0]}
    for i in range(len(pts)):
        hits[int(pts.s[i])][1] += 1
        if preds[i] == 1:
            hits[int(pts.s[i])][0] += 1
    return hits[1][0] / hits[1][1] - hits[0][0] / hits[0][1]


def counting_eod(pts, theta):
    preds = predict(theta, pts.a)
    hits = {0: [0, 0], 1: [0, 0]}
    for i in range(len(pts)):
        if pts.y[i] != 1:
            continue
        hits[int(pts.s[i])][1] += 1
        if preds[i] == 1:
            hits[int(pts.s[i])][0] += 1
    return hits[1][0] / hits[1][1] - hits[0][0] / hits[0][1]


def test_metrics_match_independent_counting():
    rng = np.random.default_rng(9)
    for trial in range(20):
        pts = logistic_samples(60, 700 + trial, group_shift=0.5)
        theta = rng.normal(size=pts.dim)
        assert spd(pts, theta) == counting_spd(pts, theta)
        assert eod(pts, theta) == counting_eod(pts, theta)


def test_check_fair_proxy_infinite_budget():
    original = logistic_samples(60, 71, group_shift=1.0)
    proxy = logistic_samples(60, 72, group_shift=1.0)
    budget = FairnessBudget(eps_sp=float("inf"), metric=Metric.SP)
    check = check_fair_proxy(proxy, original, budget, CFG)
    assert check.passed
    assert bool(check)


def test_check_fair_proxy_constant_group_original_is_zero():
    ## with a constant sensitive bit the covariance surrogate is exactly zero
    n = 40
    rngx = np.random.default_rng(73)
    original = Samples(rngx.normal(size=(n, 3)),
                       np.ones(n, dtype=np.int64),
                       np.where(rngx.random(n) < 0.5, 1, -1).astype(np.int64))
    proxy = logistic_samples(50, 74)
    budget = FairnessBudget(eps_sp=1e-12, metric=Metric.SP)
    check = check_fair_proxy(proxy, original, budget, CFG)
    assert check.dbc_value == 0.0
    assert check.passed


def test_check_fair_proxy_flags_planted_bias():
    original = logistic_samples(200, 75, group_shift=2.0, noise=0.3)
    budget = FairnessBudget(eps_sp=0.01, metric=Metric.SP)
    check = check_fair_proxy(original, original, budget, CFG)
    assert not check.passed
    assert abs(check.dbc_value) > 0.01
    assert not bool(check)


def test_check_fair_proxy_dimension_mismatch():
    a = logistic_samples(30, 76, dim=2)
    b = logistic_samples(30, 77, dim=3)
    with pytest.raises(DimensionError):
        check_fair_proxy(a, b, FairnessBudget(), CFG)


def test_metric_parse_and_budget_selection():
    assert Metric.parse("sp") is Metric.SP
    assert Metric.parse("EO") is Metric.EO
    budget = FairnessBudget(eps_sp=0.03, eps_eo=0.07, metric=Metric.EO)
    assert budget.epsilon == 0.07
    assert FairnessBudget(eps_sp=0.03, eps_eo=0.07, metric=Metric.SP).epsilon == 0.03
