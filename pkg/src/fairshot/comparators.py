"""One-shot aggregation baselines: per-client models combined by loss statistics.

Each client fits a model on its own proxy; the server combines the models as
theta = sum_c w_c theta_c, with weights chosen from the clients' loss values.
Two weighting rules are implemented alongside the plain uniform-pool baseline:

  * fedasl: median/stdev banding; clients inside the band share weight evenly,
    outliers decay exponentially with their distance beyond the band.
  * fednolowe: normalize losses to sum 1, then w_c = (1 - normalized_c)/(K-1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Samples
from .errors import DimensionError, EmptyInputError
from .logit import (
    GroupedLike,
    GroupedSamples,
    InnerSolveConfig,
    as_grouped,
    solve_inner,
    weighted_loss,
)

## guards the exponent denominator when the loss spread is minuscule
EPS_NUM = 1e-12


@dataclass
class LocalModelSet:
    """Per-client models (K, n) and their own-proxy mean unregularized losses (K,)."""

    models: np.ndarray
    losses: np.ndarray


def train_local_models(proxies: GroupedLike, cfg: InnerSolveConfig) -> LocalModelSet:
    """Fit each client's model on its own proxy alone."""
    grouped = as_grouped(proxies)
    if np.any(grouped.counts == 0):
        empty = int(np.nonzero(grouped.counts == 0)[0][0])
        raise EmptyInputError(f"client {empty} has an empty proxy")
    models = np.zeros((grouped.n_clients, grouped.dim))
    losses = np.zeros(grouped.n_clients)
    one = np.ones(1)
    for c in range(grouped.n_clients):
        client = grouped.client_view(c)
        fit = solve_inner(client, one, cfg)
        models[c] = fit.theta
        losses[c] = weighted_loss(client, one, fit.theta)
    return LocalModelSet(models=models, losses=losses)


def fedasl_weights(losses, alpha: float = 0.9, beta: float = 0.2) -> np.ndarray:
    """Median/stdev banding weights.

    Clients with |L_c - median| <= alpha * stdev get raw score 1; the rest get
    exp(-(|L_c - median| - alpha*stdev) / (beta*stdev + eps)).  Scores are
    normalized to sum 1.  Zero stdev (all losses equal) gives uniform weights.
    """
    losses = np.asarray(losses, dtype=np.float64).ravel()
    if losses.size == 0:
        raise EmptyInputError("no losses")
    med = float(np.median(losses))
    sigma = float(losses.std())
    if sigma == 0.0:
        return np.full(losses.size, 1.0 / losses.size)
    dist = np.abs(losses - med)
    band = alpha * sigma
    raw = np.where(dist <= band, 1.0, np.exp(-(dist - band) / (beta * sigma + EPS_NUM)))
    return raw / raw.sum()


def fednolowe_weights(losses) -> np.ndarray:
    """Loss-complement weights: w_c = (1 - L_c / sum(L)) / (K - 1).

    All-zero losses give uniform weights.  Needs at least two clients.
    """
    losses = np.asarray(losses, dtype=np.float64).ravel()
    if losses.size < 2:
        raise DimensionError("need at least two clients")
    total = losses.sum()
    if total == 0.0:
        return np.full(losses.size, 1.0 / losses.size)
    normalized = losses / total
    return (1.0 - normalized) / (losses.size - 1)


def aggregate_models(models, w) -> np.ndarray:
    """Weighted parameter average sum_c w_c theta_c."""
    models = np.asarray(models, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64).ravel()
    if models.ndim != 2 or models.shape[0] != w.shape[0]:
        raise DimensionError(f"model matrix {models.shape} does not match {w.shape[0]} weights")
    return models.T @ w


def baseline_global(proxies: GroupedLike, cfg: InnerSolveConfig) -> np.ndarray:
    """Undefended pool: fit one model on all proxies with uniform client weights."""
    grouped = as_grouped(proxies)
    w = np.full(grouped.n_clients, 1.0 / grouped.n_clients)
    return solve_inner(grouped, w, cfg).theta
