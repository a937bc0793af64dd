"""Group-fairness surrogates and metrics.

Two families live here: the decision-boundary covariance (DBC), a smooth
signed surrogate used inside penalties, and the exact counting metrics
(statistical parity difference, equal opportunity difference) used for
evaluation.  Both take the sensitive bit from the last column of a.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .data import Samples
from .errors import (
    CheckError,
    DimensionError,
    DivergenceError,
    EmptyInputError,
    MetricUndefinedError,
)
from .logit import (
    GroupedLike,
    GroupedSamples,
    InnerSolveConfig,
    _check_theta,
    _check_w,
    as_grouped,
    predict,
    solve_inner,
)

## effectively unregularized audit fit; a tiny ridge keeps the argmin defined
## when a proxy happens to be linearly separable
CHECK_RIDGE = 1e-8


class Metric(enum.Enum):
    SP = "sp"
    EO = "eo"

    @classmethod
    def parse(cls, text: str) -> "Metric":
        return cls(str(text).strip().lower())


@dataclass(frozen=True)
class FairnessBudget:
    """Per-metric |DBC| budgets for the proxy audit."""

    eps_sp: float = 0.05
    eps_eo: float = 0.05
    metric: Metric = Metric.SP

    @property
    def epsilon(self) -> float:
        return self.eps_sp if self.metric is Metric.SP else self.eps_eo


def _dbc(samples: GroupedLike, w, theta, mask_positive: bool) -> float:
    g = as_grouped(samples)
    if len(g) == 0:
        raise EmptyInputError("no samples for DBC")
    w = _check_w(g, w)
    theta = _check_theta(g, theta)
    s = g.s
    z = g.a @ theta
    terms = g.per_sample(w) * (s - s.mean()) * z
    if mask_positive:
        terms = terms * (1.0 + g.y) / 2.0
    return float(terms.sum()) / len(g)


def dbc_sp(samples: GroupedLike, w, theta) -> float:
    """Signed weighted covariance between the sensitive bit and the score a.theta.

    (1/N) sum_c w_c sum_i (s_i - s_mean) a_i^T theta, with s_mean the plain
    mean over all samples.  Linear in theta and in w.
    """
    return _dbc(samples, w, theta, mask_positive=False)


def dbc_eo(samples: GroupedLike, w, theta) -> float:
    """Equal-opportunity variant: each term is masked by (1+y)/2, so only
    positively labeled samples count.  Same normalization and s_mean as dbc_sp."""
    return _dbc(samples, w, theta, mask_positive=True)


def dbc_theta_gradient(samples: GroupedLike, w, mask_positive: bool) -> np.ndarray:
    """d DBC / d theta: constant in theta since DBC is linear."""
    g = as_grouped(samples)
    w = _check_w(g, w)
    s = g.s
    coeff = g.per_sample(w) * (s - s.mean())
    if mask_positive:
        coeff = coeff * (1.0 + g.y) / 2.0
    return (g.a.T @ coeff) / len(g)


def dbc_client_rows(samples: GroupedLike, theta, mask_positive: bool) -> np.ndarray:
    """d DBC / d w_c for each client: per-client sums of (s - s_mean) a.theta / N."""
    g = as_grouped(samples)
    theta = _check_theta(g, theta)
    s = g.s
    terms = (s - s.mean()) * (g.a @ theta)
    if mask_positive:
        terms = terms * (1.0 + g.y) / 2.0
    out = np.zeros(g.n_clients)
    for c, sl in enumerate(g.slices):
        out[c] = terms[sl].sum() / len(g)
    return out


def client_dbc(points: Samples, theta, metric: Metric) -> float:
    """Single-dataset DBC (one client, weight 1) for the chosen metric."""
    g = GroupedSamples([points])
    if metric is Metric.SP:
        return dbc_sp(g, np.ones(1), theta)
    return dbc_eo(g, np.ones(1), theta)


def spd(points: Samples, theta) -> float:
    """Statistical parity difference P(pred=+1 | s=1) - P(pred=+1 | s=0), exact counts."""
    if len(points) == 0:
        raise EmptyInputError("no points")
    preds = predict(theta, points.a)
    rates = []
    for group in (0, 1):
        sel = points.s == group
        if not sel.any():
            raise MetricUndefinedError(f"no samples with s={group}")
        rates.append((preds[sel] == 1).sum() / sel.sum())
    return float(rates[1] - rates[0])


def eod(points: Samples, theta) -> float:
    """Equal opportunity difference TPR(s=1) - TPR(s=0), exact counts."""
    if len(points) == 0:
        raise EmptyInputError("no points")
    preds = predict(theta, points.a)
    rates = []
    for group in (0, 1):
        sel = (points.s == group) & (points.y == 1)
        if not sel.any():
            raise MetricUndefinedError(f"no positively labeled samples with s={group}")
        rates.append((preds[sel] == 1).sum() / sel.sum())
    return float(rates[1] - rates[0])


@dataclass(frozen=True)
class FairProxyCheck:
    """Outcome of the proxy audit: fit a model on the proxy alone, measure its
    DBC on the client's original data, compare against the budget."""

    passed: bool
    dbc_value: float
    metric: Metric
    epsilon: float
    ridge: float
    solver_converged: bool

    def __bool__(self) -> bool:
        return self.passed


def check_fair_proxy(
    proxy: Samples,
    original: Samples,
    budget: FairnessBudget,
    cfg: InnerSolveConfig,
) -> FairProxyCheck:
    """Audit a proxy dataset against the client's original data.

    Trains an (effectively) unregularized logistic model on the proxy alone
    (ridge CHECK_RIDGE stands in for the unregularized fit so separable
    proxies keep a defined argmin) and passes iff the model's |DBC| on the
    original data is within the budget for the selected metric.
    """
    if len(proxy) == 0 or len(original) == 0:
        raise EmptyInputError("proxy and original data must both be nonempty")
    if proxy.dim != original.dim:
        raise DimensionError(f"proxy dim {proxy.dim} != original dim {original.dim}")
    audit_cfg = replace(cfg, lambda_theta=CHECK_RIDGE)
    try:
        fit = solve_inner(GroupedSamples([proxy]), np.ones(1), audit_cfg)
    except DivergenceError as exc:
        raise CheckError(f"audit fit diverged: {exc}") from exc
    value = client_dbc(original, fit.theta, budget.metric)
    return FairProxyCheck(
        passed=bool(abs(value) <= budget.epsilon),
        dbc_value=value,
        metric=budget.metric,
        epsilon=budget.epsilon,
        ridge=CHECK_RIDGE,
        solver_converged=fit.converged,
    )
