"""Server-side aggregation defense.

The server never sees raw client data quality directly; it learns client
weights w on the probability simplex by minimizing a penalty objective

    P(w) = regularized loss of theta_w on the pooled root samples
         + (1 - nu) * (rho/2) * DBC_sp(roots, theta_w)^2
         + nu       * (rho/2) * DBC_eo(roots, theta_w)^2

where theta_w solves the inner weighted fit on the pooled proxies.  The
root samples are the server's own audit set: every root sample counts
equally, so w enters P only through theta_w.  (Weighting the root terms
by w as well would let the outer loop cancel measured bias by shuffling
weight between clients' root shares instead of fixing the model, and it
would strip weight from whichever reliable clients drew the hardest root
samples; with the pooled form, clients holding identical proxy data keep
exactly equal weights.)  The hypergradient comes from implicit
differentiation of the inner optimality condition: one Cholesky
factorization of the inner Hessian, K right-hand sides for
d theta / d w, then the chain rule.  Outer steps are Adam followed by a
Euclidean projection back onto the simplex; Adam moments persist across
projections and rho jumps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .data import Samples
from .errors import ConfigError, DimensionError, DivergenceError, EmptyInputError, NumericalError
from .fairness import dbc_eo, dbc_sp, dbc_theta_gradient
from .logit import (
    GroupedLike,
    InnerSolveConfig,
    InnerSolveResult,
    as_grouped,
    grad_theta,
    hess_theta,
    mixed_partial,
    regularized_loss,
    solve_inner,
    weighted_loss,
)


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto {w : w >= 0, sum w = 1} (sort-based, exact).

    Sort descending into u, set tau_k = (sum_{i<=k} u_i - 1)/k, find the last
    k with u_k - tau_k > 0, clip at that tau.
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size == 0:
        raise DimensionError("cannot project an empty vector")
    if not np.all(np.isfinite(v)):
        raise NumericalError("cannot project a non-finite vector")
    u = np.sort(v)[::-1]
    tau = (np.cumsum(u) - 1.0) / np.arange(1, v.size + 1)
    k = np.nonzero(u - tau > 0)[0][-1]
    return np.maximum(v - tau[k], 0.0)


@dataclass(frozen=True)
class PenaltyConfig:
    """Outer-loop settings.  Defaults reproduce the reference schedule:
    rho in {10, 100, 1000, 10000} starting at iterations {1, 401, 801, 1201},
    capped, with t_max 2000, Adam lr 0.1, uniform init."""

    rho_schedule: tuple[tuple[int, float], ...] = ((1, 10.0), (401, 100.0), (801, 1000.0), (1201, 10000.0))
    nu: float = 0.0
    t_max: int = 2000
    outer_lr: float = 0.1
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    inner: InnerSolveConfig = field(default_factory=InnerSolveConfig)

    def __post_init__(self):
        if not self.rho_schedule:
            raise ConfigError("rho_schedule must be nonempty")
        starts = [t for t, _ in self.rho_schedule]
        values = [r for _, r in self.rho_schedule]
        if starts[0] != 1:
            raise ConfigError("rho_schedule must start at iteration 1")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ConfigError("rho_schedule iterations must increase")
        if any(r < 0 for r in values) or any(b < a for a, b in zip(values, values[1:])):
            raise ConfigError("rho values must be nonnegative and nondecreasing")
        if not 0.0 <= self.nu <= 1.0:
            raise ConfigError("nu must lie in [0, 1]")
        if self.t_max < 1:
            raise ConfigError("t_max must be >= 1")
        if self.outer_lr <= 0:
            raise ConfigError("outer_lr must be > 0")

    def rho_at(self, t: int) -> float:
        """Penalty weight in effect at outer iteration t (1-based)."""
        current = self.rho_schedule[0][1]
        for start, value in self.rho_schedule:
            if t >= start:
                current = value
        return current

    @classmethod
    def adaptive(cls, t_max: int = 2000, **kwargs) -> "PenaltyConfig":
        """Scale the default four-stage ladder to a different budget.

        Stage boundaries sit at the same 0.2/0.4/0.6 fractions of t_max, so
        t_max=2000 reproduces the default schedule exactly.
        """
        starts = [1] + [1 + round(0.2 * t_max * j) for j in (1, 2, 3)]
        values = [10.0, 100.0, 1000.0, 10000.0]
        schedule = []
        for start, value in zip(starts, values):
            if not schedule or start > schedule[-1][0]:
                schedule.append((start, value))
        return cls(rho_schedule=tuple(schedule), t_max=t_max, **kwargs)


@dataclass
class PenaltyDiagnostics:
    theta: np.ndarray
    value: float
    root_loss: float
    dbc_sp: float
    dbc_eo: float
    inner: InnerSolveResult


@dataclass
class TraceRecord:
    t: int
    w: tuple
    objective: float
    root_loss: float
    rho: float
    dbc_sp: float
    dbc_eo: float
    inner_iterations: int
    inner_converged: bool


@dataclass
class DefenseResult:
    weights: np.ndarray
    theta: np.ndarray
    trace: list[TraceRecord]
    final_inner: InnerSolveResult


def _w_on_simplex(w, k: int) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64).ravel()
    if w.shape[0] != k:
        raise DimensionError(f"got {w.shape[0]} weights for {k} clients")
    if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
        raise ConfigError("w must lie on the probability simplex")
    return w


def _parts(w, proxies, roots, cfg: PenaltyConfig, rho: float, warm_start) -> PenaltyDiagnostics:
    inner = solve_inner(proxies, w, cfg.inner, warm_start=warm_start)
    theta = inner.theta
    ## root data is the server's own audit set: every sample weighted 1
    pooled = np.ones(roots.n_clients)
    root_loss = regularized_loss(roots, pooled, theta, cfg.inner)
    d_sp = dbc_sp(roots, pooled, theta)
    d_eo = dbc_eo(roots, pooled, theta)
    value = root_loss + (1.0 - cfg.nu) * 0.5 * rho * d_sp**2 + cfg.nu * 0.5 * rho * d_eo**2
    return PenaltyDiagnostics(theta, value, root_loss, d_sp, d_eo, inner)


def penalty_objective(
    w, proxies: GroupedLike, roots: GroupedLike, cfg: PenaltyConfig, rho: float,
    warm_start: np.ndarray | None = None,
) -> tuple[float, PenaltyDiagnostics]:
    """Evaluate P(w) at the inner optimum for the given penalty weight."""
    if rho < 0:
        raise ConfigError("rho must be >= 0")
    proxies = as_grouped(proxies)
    roots = as_grouped(roots)
    if proxies.n_clients != roots.n_clients:
        raise DimensionError("proxies and roots disagree on client count")
    w = _w_on_simplex(w, proxies.n_clients)
    diag = _parts(w, proxies, roots, cfg, rho, warm_start)
    return diag.value, diag


def hypergradient(
    w, proxies: GroupedLike, roots: GroupedLike, cfg: PenaltyConfig, rho: float,
    warm_start: np.ndarray | None = None,
) -> tuple[np.ndarray, PenaltyDiagnostics]:
    """dP/dw via implicit differentiation of the inner fit.

    Solves H (d theta/d w) = -B with one factorization and K right-hand
    sides, then chains through dP/dtheta.  The root terms carry no
    explicit w-dependence, so the hypergradient is purely implicit.
    """
    if rho < 0:
        raise ConfigError("rho must be >= 0")
    proxies = as_grouped(proxies)
    roots = as_grouped(roots)
    if proxies.n_clients != roots.n_clients:
        raise DimensionError("proxies and roots disagree on client count")
    w = _w_on_simplex(w, proxies.n_clients)
    diag = _parts(w, proxies, roots, cfg, rho, warm_start)
    theta = diag.theta
    nu = cfg.nu

    hess = hess_theta(proxies, w, theta, cfg.inner)
    mixed = mixed_partial(proxies, w, theta, cfg.inner)
    try:
        factor = cho_factor(hess)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"inner Hessian not positive definite: {exc}") from exc
    dtheta_dw = -cho_solve(factor, mixed)

    pooled = np.ones(roots.n_clients)
    dP_dtheta = grad_theta(roots, pooled, theta, cfg.inner)
    if nu < 1.0:
        g_sp = dbc_theta_gradient(roots, pooled, mask_positive=False)
        dP_dtheta = dP_dtheta + (1.0 - nu) * rho * diag.dbc_sp * g_sp
    if nu > 0.0:
        g_eo = dbc_theta_gradient(roots, pooled, mask_positive=True)
        dP_dtheta = dP_dtheta + nu * rho * diag.dbc_eo * g_eo

    grad = dtheta_dw.T @ dP_dtheta
    return grad, diag


def run_defense(
    proxies: GroupedLike,
    roots: GroupedLike,
    cfg: PenaltyConfig,
) -> DefenseResult:
    """Learn aggregation weights by projected Adam on the penalty objective.

    Starts from uniform weights, runs t_max outer iterations with the
    scheduled rho, warm-starting each inner solve at the previous optimum,
    and fits the final model at the last weights.
    """
    proxies = as_grouped(proxies)
    roots = as_grouped(roots)
    if proxies.n_clients != roots.n_clients:
        raise DimensionError("proxies and roots disagree on client count")
    if np.any(roots.counts == 0):
        raise EmptyInputError("every client needs at least one root sample")
    k = proxies.n_clients
    w = np.full(k, 1.0 / k)
    m = np.zeros(k)
    v = np.zeros(k)
    b1, b2, eps = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps
    warm = None
    trace: list[TraceRecord] = []

    for t in range(1, cfg.t_max + 1):
        rho = cfg.rho_at(t)
        grad, diag = hypergradient(w, proxies, roots, cfg, rho, warm_start=warm)
        warm = diag.theta
        if not (np.isfinite(diag.value) and np.all(np.isfinite(grad))):
            err = DivergenceError(f"outer objective non-finite at iteration {t}")
            err.trace = trace
            raise err
        trace.append(
            TraceRecord(
                t=t,
                w=tuple(float(x) for x in w),
                objective=float(diag.value),
                root_loss=float(diag.root_loss),
                rho=float(rho),
                dbc_sp=float(diag.dbc_sp),
                dbc_eo=float(diag.dbc_eo),
                inner_iterations=diag.inner.iterations,
                inner_converged=diag.inner.converged,
            )
        )
        m = b1 * m + (1.0 - b1) * grad
        v = b2 * v + (1.0 - b2) * grad * grad
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
        w = project_simplex(w - cfg.outer_lr * m_hat / (np.sqrt(v_hat) + eps))

    final = solve_inner(proxies, w, cfg.inner, warm_start=warm)
    return DefenseResult(weights=w, theta=final.theta, trace=trace, final_inner=final)
