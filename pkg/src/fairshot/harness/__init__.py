"""Experiment harness: scenario construction, sweeps, reports, CLI."""

from .scenario import (
    EvalReport,
    ScenarioInstance,
    ScenarioMode,
    ScenarioSpec,
    build_scenario,
    evaluate,
    proxy_fairness_by_client,
)
from .experiment import (
    METHODS,
    CellResult,
    ComparatorSettings,
    ExperimentResult,
    aggregate_records,
    run_experiment,
    run_method,
)
from .report import emit_report, load_runs
from .config import HarnessConfig, load_config

__all__ = [
    "METHODS",
    "CellResult",
    "ComparatorSettings",
    "EvalReport",
    "ExperimentResult",
    "HarnessConfig",
    "ScenarioInstance",
    "ScenarioMode",
    "ScenarioSpec",
    "aggregate_records",
    "build_scenario",
    "emit_report",
    "evaluate",
    "load_config",
    "load_runs",
    "proxy_fairness_by_client",
    "run_experiment",
    "run_method",
]
