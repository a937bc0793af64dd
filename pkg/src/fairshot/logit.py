"""Client-weighted L2-regularized logistic model.

The shared objective everywhere in the pipeline is

    loss(theta; w) = (1/N) sum_c w_c sum_{i in c} log(1 + exp(-y_i a_i^T theta))
    reg(theta)     = lambda_theta / (2 n^2) * ||theta||^2

with N the total sample count over all clients (weighted or not), a = (x, s)
the model input with the sensitive bit last, and n = len(theta).  This module
provides the loss, its first and second derivatives in theta, the mixed
theta/w partial needed for implicit differentiation, the inner solver, and
prediction.  log(1 + e^z) is evaluated as np.logaddexp(0, z), i.e.
max(z, 0) + log1p(e^-|z|).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import expit

from .data import Samples
from .errors import ConfigError, DimensionError, EmptyInputError, UnderdeterminedError
from .optim import minimize_lbfgs


@dataclass(frozen=True)
class InnerSolveConfig:
    lambda_theta: float = 1e-4
    tol: float = 1e-7
    max_iter: int = 1000
    memory: int = 10

    def __post_init__(self):
        if self.lambda_theta < 0:
            raise ConfigError("lambda_theta must be >= 0")
        if self.tol <= 0:
            raise ConfigError("tol must be > 0")
        if self.max_iter < 1 or self.memory < 1:
            raise ConfigError("max_iter and memory must be >= 1")


class GroupedSamples:
    """Per-client sample groups stacked into one design matrix.

    Rows are ordered client by client; `slices[c]` addresses client c's block.
    Clients may be empty.  All clients must agree on the model dimension.
    """

    __slots__ = ("a", "y", "counts", "slices", "n_clients", "dim")

    def __init__(self, clients: Sequence[Samples]):
        if len(clients) == 0:
            raise EmptyInputError("need at least one client")
        dims = {c.dim for c in clients}
        if len(dims) != 1:
            raise DimensionError(f"clients disagree on model dimension: {sorted(dims)}")
        self.dim = dims.pop()
        self.n_clients = len(clients)
        self.counts = np.array([len(c) for c in clients], dtype=np.int64)
        starts = np.concatenate([[0], np.cumsum(self.counts)])
        self.slices = [slice(int(starts[c]), int(starts[c + 1])) for c in range(len(clients))]
        self.a = np.vstack([c.a for c in clients])
        self.y = np.concatenate([c.y for c in clients]).astype(np.float64)

    def __len__(self) -> int:
        return self.a.shape[0]

    @property
    def s(self) -> np.ndarray:
        return self.a[:, -1]

    @property
    def client_ids(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_clients), self.counts)

    def per_sample(self, w: np.ndarray) -> np.ndarray:
        """Expand client weights to one weight per row."""
        return np.repeat(w, self.counts)

    def client_view(self, c: int) -> "GroupedSamples":
        """Client c's block as a standalone single-client group."""
        sl = self.slices[c]
        view = GroupedSamples.__new__(GroupedSamples)
        view.a = self.a[sl]
        view.y = self.y[sl]
        view.counts = np.array([sl.stop - sl.start], dtype=np.int64)
        view.slices = [slice(0, sl.stop - sl.start)]
        view.n_clients = 1
        view.dim = self.dim
        return view


GroupedLike = Union[GroupedSamples, Sequence[Samples]]


def as_grouped(samples: GroupedLike) -> GroupedSamples:
    if isinstance(samples, GroupedSamples):
        return samples
    return GroupedSamples(list(samples))


def _check_w(samples: GroupedSamples, w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64).ravel()
    if w.shape[0] != samples.n_clients:
        raise DimensionError(f"got {w.shape[0]} weights for {samples.n_clients} clients")
    return w


def _check_theta(samples: GroupedSamples, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64).ravel()
    if theta.shape[0] != samples.dim:
        raise DimensionError(f"theta has length {theta.shape[0]}, model dimension is {samples.dim}")
    return theta


def weighted_loss(samples: GroupedLike, w, theta) -> float:
    """Mean client-weighted logistic loss, no regularizer."""
    g = as_grouped(samples)
    if len(g) == 0:
        raise EmptyInputError("no samples")
    w = _check_w(g, w)
    theta = _check_theta(g, theta)
    z = g.a @ theta
    per = np.logaddexp(0.0, -g.y * z)
    return float(g.per_sample(w) @ per) / len(g)


def ridge_penalty(theta, lambda_theta: float) -> float:
    """lambda / (2 n^2) * ||theta||^2 with n = len(theta)."""
    theta = np.asarray(theta, dtype=np.float64).ravel()
    n = theta.shape[0]
    if n == 0:
        raise DimensionError("theta is empty")
    return lambda_theta / (2.0 * n * n) * float(theta @ theta)


def regularized_loss(samples: GroupedLike, w, theta, cfg: InnerSolveConfig) -> float:
    return weighted_loss(samples, w, theta) + ridge_penalty(theta, cfg.lambda_theta)


def grad_theta(samples: GroupedLike, w, theta, cfg: InnerSolveConfig) -> np.ndarray:
    """Gradient in theta of the regularized weighted loss."""
    g = as_grouped(samples)
    if len(g) == 0:
        raise EmptyInputError("no samples")
    w = _check_w(g, w)
    theta = _check_theta(g, theta)
    z = g.a @ theta
    r = g.per_sample(w) * (-g.y) * expit(-g.y * z)
    n = theta.shape[0]
    return (g.a.T @ r) / len(g) + (cfg.lambda_theta / (n * n)) * theta


def hess_theta(samples: GroupedLike, w, theta, cfg: InnerSolveConfig) -> np.ndarray:
    """Hessian in theta; exactly symmetric, positive definite when lambda > 0."""
    g = as_grouped(samples)
    if len(g) == 0:
        raise EmptyInputError("no samples")
    w = _check_w(g, w)
    theta = _check_theta(g, theta)
    z = g.a @ theta
    p = expit(z)
    d = g.per_sample(w) * p * (1.0 - p) / len(g)
    h = g.a.T @ (g.a * d[:, None])
    h = 0.5 * (h + h.T)
    n = theta.shape[0]
    h[np.diag_indices(n)] += cfg.lambda_theta / (n * n)
    return h


def mixed_partial(samples: GroupedLike, w, theta, cfg: InnerSolveConfig) -> np.ndarray:
    """(n, K) matrix of d^2 loss / d theta d w_c.

    Column c is the unweighted per-client gradient block (1/N) sum_{i in c}
    [-y sigma(-y a^T theta)] a, so w @ columns + ridge gradient recovers
    grad_theta.
    """
    g = as_grouped(samples)
    if len(g) == 0:
        raise EmptyInputError("no samples")
    _check_w(g, w)
    theta = _check_theta(g, theta)
    z = g.a @ theta
    r = (-g.y) * expit(-g.y * z) / len(g)
    out = np.zeros((theta.shape[0], g.n_clients))
    for c, sl in enumerate(g.slices):
        if sl.stop > sl.start:
            out[:, c] = g.a[sl].T @ r[sl]
    return out


@dataclass
class InnerSolveResult:
    theta: np.ndarray
    converged: bool
    iterations: int
    grad_sup_norm: float


def solve_inner(
    samples: GroupedLike,
    w,
    cfg: InnerSolveConfig,
    warm_start: np.ndarray | None = None,
) -> InnerSolveResult:
    """Fit theta by L-BFGS to gradient sup-norm <= cfg.tol.

    Hitting max_iter returns the last iterate with converged=False instead of
    raising; non-finite iterates raise DivergenceError.
    """
    g = as_grouped(samples)
    w = _check_w(g, w)
    effective = g.counts @ (w != 0)
    if len(g) == 0 or effective == 0:
        raise UnderdeterminedError("no samples under any nonzero-weight client")
    w_s = g.per_sample(w)
    n = g.dim
    n_total = len(g)
    lam = cfg.lambda_theta

    def fun_grad(theta: np.ndarray) -> tuple[float, np.ndarray]:
        z = g.a @ theta
        yz = -g.y * z
        val = float(w_s @ np.logaddexp(0.0, yz)) / n_total + lam / (2.0 * n * n) * float(theta @ theta)
        r = w_s * (-g.y) * expit(yz)
        grad = (g.a.T @ r) / n_total + (lam / (n * n)) * theta
        return val, grad

    x0 = np.zeros(n) if warm_start is None else _check_theta(g, warm_start).copy()
    res = minimize_lbfgs(
        fun_grad, x0, tol=cfg.tol, max_iter=cfg.max_iter, memory=cfg.memory
    )
    return InnerSolveResult(res.x, res.converged, res.iterations, float(np.max(np.abs(res.grad))))


def predict(theta, a) -> np.ndarray | int:
    """Hard labels: +1 where a . theta >= 0, else -1 (ties go to +1)."""
    theta = np.asarray(theta, dtype=np.float64).ravel()
    a = np.asarray(a, dtype=np.float64)
    single = a.ndim == 1
    scores = np.atleast_2d(a) @ theta
    labels = np.where(scores >= 0.0, 1, -1).astype(np.int64)
    return int(labels[0]) if single else labels
