"""Multi-seed experiment execution.

Every (spec, seed) cell builds its scenario exactly once; all requested
methods then consume that same instance (asserted downstream through the
recorded content hash).  Failures are captured per cell so one diverging
run cannot abort a sweep.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from ..comparators import (
    aggregate_models,
    baseline_global,
    fedasl_weights,
    fednolowe_weights,
    train_local_models,
)
from ..defense import DefenseResult, run_defense
from ..errors import ConfigError, FairshotError
from ..logit import as_grouped, weighted_loss
from .scenario import EvalReport, ScenarioInstance, ScenarioSpec, build_scenario, evaluate

METHOD_BASELINE = "baseline"
METHOD_DEFENSE = "defense"
METHOD_FEDASL = "fedasl"
METHOD_FEDNOLOWE = "fednolowe"
METHODS = (METHOD_BASELINE, METHOD_DEFENSE, METHOD_FEDASL, METHOD_FEDNOLOWE)

LOSS_EVAL_OWN_PROXY = "own_proxy"
LOSS_EVAL_POOLED_ROOT = "pooled_root"


@dataclass(frozen=True)
class ComparatorSettings:
    """Knobs of the loss-based weighting schemes."""

    fedasl_alpha: float = 0.9
    fedasl_beta: float = 0.2
    ## client loss signal: each local model scored on its own proxy (the
    ## default) or on the pooled root data (sensitivity switch)
    loss_eval: str = LOSS_EVAL_OWN_PROXY

    def __post_init__(self):
        if self.loss_eval not in (LOSS_EVAL_OWN_PROXY, LOSS_EVAL_POOLED_ROOT):
            raise ConfigError(f"unknown loss_eval {self.loss_eval!r}")


def _local_losses(instance: ScenarioInstance, comparators: ComparatorSettings):
    cfg = instance.spec.penalty.inner
    local = train_local_models(instance.proxies, cfg)
    if comparators.loss_eval == LOSS_EVAL_OWN_PROXY:
        return local
    roots = as_grouped(instance.roots)
    pooled = np.ones(roots.n_clients)
    losses = np.array([weighted_loss(roots, pooled, theta) for theta in local.models])
    return replace(local, losses=losses)


def run_method(
    instance: ScenarioInstance,
    method: str,
    comparators: ComparatorSettings | None = None,
) -> tuple[np.ndarray, np.ndarray, DefenseResult | None]:
    """Train one method on a scenario; returns (theta, weights, defense result or None)."""
    comparators = comparators or ComparatorSettings()
    spec = instance.spec
    k = len(instance.clients)
    if method == METHOD_BASELINE:
        theta = baseline_global(instance.proxies, spec.penalty.inner)
        return theta, np.full(k, 1.0 / k), None
    if method == METHOD_DEFENSE:
        result = run_defense(instance.proxies, instance.roots, spec.penalty)
        return result.theta, result.weights, result
    if method == METHOD_FEDASL:
        local = _local_losses(instance, comparators)
        w = fedasl_weights(local.losses, comparators.fedasl_alpha, comparators.fedasl_beta)
        return aggregate_models(local.models, w), w, None
    if method == METHOD_FEDNOLOWE:
        local = _local_losses(instance, comparators)
        w = fednolowe_weights(local.losses)
        return aggregate_models(local.models, w), w, None
    raise ConfigError(f"unknown method {method!r} (expected one of {', '.join(METHODS)})")


@dataclass
class CellResult:
    """One (spec, seed, method) cell: either a report or a captured error."""

    spec: ScenarioSpec
    seed: int
    method: str
    report: EvalReport | None = None
    error: str | None = None
    content_hash: str = ""
    trace: list | None = None

    @property
    def ok(self) -> bool:
        return self.report is not None

    def run_key(self) -> str:
        return f"{self.spec.label()}_s{self.seed}_{self.method}"


@dataclass
class ExperimentResult:
    cells: list[CellResult]

    def records(self) -> list[dict]:
        """Deterministic JSON-ready run records (no wall-clock fields)."""
        out = []
        for cell in self.cells:
            spec = cell.spec
            record = {
                "dataset": spec.dataset,
                "metric": spec.metric.value,
                "mode": spec.mode,
                "unreliable_frac": spec.unreliable_frac,
                "k": spec.k,
                "root_frac": spec.root_frac,
                "seed": cell.seed,
                "method": cell.method,
                "scenario_hash": cell.content_hash,
                "error": cell.error,
            }
            if cell.report is not None:
                record.update(
                    accuracy_pct=cell.report.accuracy_pct,
                    spd_abs=cell.report.spd_abs,
                    eod_abs=cell.report.eod_abs,
                    weights=list(cell.report.weights),
                    per_client_proxy_fairness=list(cell.report.per_client_proxy_fairness),
                )
            out.append(record)
        return out

    def aggregates(self) -> list[dict]:
        return aggregate_records(self.records())


def aggregate_records(records: Sequence[Mapping]) -> list[dict]:
    """Mean-over-seeds rows grouped by (dataset, metric, mode, frac, method)."""
    groups: dict[tuple, list[Mapping]] = {}
    for rec in records:
        if rec.get("error"):
            continue
        key = (rec["dataset"], rec["metric"], rec["mode"], rec["unreliable_frac"], rec["method"])
        groups.setdefault(key, []).append(rec)
    rows = []
    for key in sorted(groups, key=lambda k: tuple(str(part) for part in k)):
        members = groups[key]
        dataset, metric, mode, frac, method = key
        rows.append({
            "dataset": dataset,
            "metric": metric,
            "mode": mode,
            "unreliable_frac": frac,
            "method": method,
            "n_seeds": len(members),
            "accuracy_pct_mean": float(np.mean([m["accuracy_pct"] for m in members])),
            "spd_abs_mean": float(np.mean([m["spd_abs"] for m in members])),
            "eod_abs_mean": float(np.mean([m["eod_abs"] for m in members])),
        })
    return rows


def run_experiment(
    specs: Sequence[ScenarioSpec],
    methods: Sequence[str],
    seeds: Sequence[int] | None,
    datasets: Mapping[str, "Samples"],
    comparators: ComparatorSettings | None = None,
) -> ExperimentResult:
    """Run every requested method on every (spec, seed) scenario.

    seeds=None runs each spec at its own embedded seed.  Scenario-build
    failures mark all of that cell's method rows failed; method failures
    are captured individually.
    """
    comparators = comparators or ComparatorSettings()
    for method in methods:
        if method not in METHODS:
            raise ConfigError(f"unknown method {method!r} (expected one of {', '.join(METHODS)})")
    cells: list[CellResult] = []
    for spec in specs:
        if spec.dataset not in datasets:
            raise ConfigError(f"no data supplied for dataset {spec.dataset!r}")
        for seed in seeds if seeds is not None else [spec.seed]:
            seeded = replace(spec, seed=seed)
            try:
                instance = build_scenario(seeded, datasets[spec.dataset])
            except FairshotError as exc:
                cells.extend(
                    CellResult(spec=seeded, seed=seed, method=m, error=f"scenario: {exc}")
                    for m in methods
                )
                continue
            for method in methods:
                start = time.perf_counter()
                try:
                    theta, weights, defense = run_method(instance, method, comparators)
                    report = evaluate(
                        theta, instance, method=method, weights=weights,
                        runtime_sec=time.perf_counter() - start,
                    )
                except FairshotError as exc:
                    cells.append(CellResult(
                        spec=seeded, seed=seed, method=method,
                        error=str(exc), content_hash=instance.content_hash,
                    ))
                    continue
                cells.append(CellResult(
                    spec=seeded, seed=seed, method=method, report=report,
                    content_hash=instance.content_hash,
                    trace=defense.trace if defense is not None else None,
                ))
    return ExperimentResult(cells=cells)
