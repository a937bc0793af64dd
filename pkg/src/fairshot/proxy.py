"""Client-side behavior: fair proxy generation, biased passthrough, unfairness ranking.

A reliable client replaces its labels before sharing: it fits a DBC-penalized
logistic model on its train split (sweeping the penalty weight upward until
the model's |DBC| is within half the budget), then samples new labels from
that teacher's predictive distribution.  Sampling rather than thresholding
keeps the proxy non-separable, so the audit model in check_fair_proxy stays
bounded and consistently recovers the teacher.  An unreliable client just
passes its raw train split through.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .data import ClientDataset, Samples
from .errors import (
    DegenerateDataError,
    EmptyInputError,
    GenerationError,
    RankingError,
)
from .fairness import (
    FairnessBudget,
    Metric,
    check_fair_proxy,
    dbc_theta_gradient,
    eod,
    spd,
)
from .logit import GroupedSamples, InnerSolveConfig, solve_inner
from .optim import minimize_lbfgs

## teacher penalty sweep; 0 first so an already-fair plain model is kept as-is
RHO_LADDER = (0.0, 1.0, 10.0, 100.0, 1000.0)
## label draws per accepted teacher before moving up the ladder
DRAWS_PER_RHO = 4


class BehaviorKind(enum.Enum):
    RELIABLE_FAIR_PROXY = "reliable"
    UNRELIABLE_PASSTHROUGH = "unreliable"


@dataclass(frozen=True)
class GeneratorParams:
    budget: FairnessBudget = FairnessBudget()
    max_relabel_frac: float = 1.0


@dataclass(frozen=True)
class ClientBehavior:
    kind: BehaviorKind
    generator_params: GeneratorParams = GeneratorParams()


def passthrough_proxy(client: ClientDataset) -> Samples:
    """The unreliable behavior: share the original train split verbatim."""
    if len(client.original_train) == 0:
        raise EmptyInputError(f"client {client.client_id} has no train data")
    return client.original_train


def _fit_teacher(
    grouped: GroupedSamples, cfg: InnerSolveConfig, v: np.ndarray, rho: float,
    warm_start: np.ndarray | None,
) -> np.ndarray:
    """Minimize regularized logistic loss plus rho * DBC(theta)^2 on one client."""
    n = grouped.dim
    n_total = len(grouped)
    lam = cfg.lambda_theta

    def fun_grad(theta):
        z = grouped.a @ theta
        yz = -grouped.y * z
        val = float(np.logaddexp(0.0, yz).sum()) / n_total + lam / (2.0 * n * n) * float(theta @ theta)
        r = (-grouped.y) * expit(yz)
        grad = (grouped.a.T @ r) / n_total + (lam / (n * n)) * theta
        d = float(v @ theta)
        return val + rho * d * d, grad + 2.0 * rho * d * v

    x0 = np.zeros(n) if warm_start is None else warm_start
    return minimize_lbfgs(fun_grad, x0, tol=cfg.tol, max_iter=cfg.max_iter, memory=cfg.memory).x


def generate_fair_proxy(
    client: ClientDataset,
    budget: FairnessBudget,
    cfg: InnerSolveConfig,
    rng: np.random.Generator,
    max_relabel_frac: float = 1.0,
) -> Samples:
    """Build a same-size fair proxy for a reliable client.

    Sweeps the teacher penalty upward; once the teacher's own |DBC| on the
    train split is within budget/2, samples candidate labels from the teacher
    and audits each with check_fair_proxy against the client's full original
    data.  Among the passing candidates at the accepted penalty level, the
    one whose audited |DBC| is smallest is returned (the client ships the
    least biased proxy it managed to draw).  Raises GenerationError (carrying
    the best |DBC| audited) if the ladder is exhausted.
    """
    train = client.original_train
    if len(train) == 0:
        raise EmptyInputError(f"client {client.client_id} has no train data")
    if np.unique(train.y).size < 2:
        raise DegenerateDataError(f"client {client.client_id}: single-class train labels")
    if np.unique(train.s).size < 2:
        raise DegenerateDataError(f"client {client.client_id}: single sensitive group")

    original = client.local_data
    grouped = GroupedSamples([train])
    v = dbc_theta_gradient(grouped, np.ones(1), mask_positive=budget.metric is Metric.EO)
    eps = budget.epsilon

    best_dbc = np.inf
    teacher = None
    for rho in RHO_LADDER:
        teacher = _fit_teacher(grouped, cfg, v, rho, warm_start=teacher)
        if abs(float(v @ teacher)) > eps / 2.0:
            continue
        p_pos = expit(train.a @ teacher)
        fairest = None
        for _ in range(DRAWS_PER_RHO):
            labels = np.where(rng.random(len(train)) < p_pos, 1, -1)
            candidate = Samples(train.x, train.s, labels, validate=False)
            relabeled = float(np.mean(labels != train.y))
            if relabeled > max_relabel_frac:
                continue
            audit = check_fair_proxy(candidate, original, budget, cfg)
            best_dbc = min(best_dbc, abs(audit.dbc_value))
            if audit.passed and (fairest is None or abs(audit.dbc_value) < fairest[0]):
                fairest = (abs(audit.dbc_value), candidate)
        if fairest is not None:
            return fairest[1]
    raise GenerationError(
        f"client {client.client_id}: no candidate met |DBC| <= {eps} "
        f"(best audited {best_dbc:.4f})",
        best_dbc=None if np.isinf(best_dbc) else float(best_dbc),
    )


def rank_clients_by_unfairness(
    clients: list[ClientDataset],
    metric: Metric,
    cfg: InnerSolveConfig | None = None,
) -> list[int]:
    """Order client ids from most to least unfair.

    Each client trains a plain logistic model on its own train split and
    measures |SPD| or |EOD| on its own test split; ties break toward the
    smaller client id.
    """
    if not clients:
        raise EmptyInputError("no clients to rank")
    cfg = cfg or InnerSolveConfig()
    scores: list[tuple[float, int]] = []
    for client in clients:
        if client.test is None or len(client.test) == 0:
            raise RankingError(f"client {client.client_id} has no test split")
        try:
            fit = solve_inner(GroupedSamples([client.original_train]), np.ones(1), cfg)
            value = spd(client.test, fit.theta) if metric is Metric.SP else eod(client.test, fit.theta)
        except Exception as exc:
            raise RankingError(f"client {client.client_id}: {exc}") from exc
        scores.append((abs(value), client.client_id))
    scores.sort(key=lambda pair: (-pair[0], pair[1]))
    return [cid for _, cid in scores]
