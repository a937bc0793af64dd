"""One-shot fair collaborative learning with unreliable clients.

A single-machine toolkit: clients ship fairness-audited proxy datasets once,
the server learns client aggregation weights through a bilevel penalty
objective (implicit-differentiation hypergradients over a weighted logistic
fit), and an experiment harness compares the defense against loss-based
weighting schemes under planted unreliable clients.

Modules:

    data         CSV loading, client partitioning, splits, root sampling
    fairness     SPD / EOD metrics and their smooth DBC surrogates
    logit        weighted regularized logistic loss and the L-BFGS inner solver
    optim        shared L-BFGS machinery
    proxy        fair proxy generation, audits, unfairness ranking
    defense      simplex projection, penalty objective, hypergradient, outer loop
    comparators  plain pooled baseline, FedASL, FedNolowe
    harness      scenario builder, experiment runner, reports, INI config, CLI
"""

from .comparators import (
    LocalModelSet,
    aggregate_models,
    baseline_global,
    fedasl_weights,
    fednolowe_weights,
    train_local_models,
)
from .data import (
    ClientDataset,
    DataPoint,
    DatasetSpec,
    Samples,
    load_dataset,
    partition_clients,
    round_half_up,
    sample_root,
    split_train_test,
)
from .defense import (
    DefenseResult,
    PenaltyConfig,
    PenaltyDiagnostics,
    TraceRecord,
    hypergradient,
    penalty_objective,
    project_simplex,
    run_defense,
)
from .errors import FairshotError
from .fairness import (
    FairnessBudget,
    Metric,
    check_fair_proxy,
    dbc_eo,
    dbc_sp,
    eod,
    spd,
)
from .logit import (
    GroupedSamples,
    InnerSolveConfig,
    InnerSolveResult,
    grad_theta,
    predict,
    regularized_loss,
    solve_inner,
    weighted_loss,
)
from .proxy import generate_fair_proxy, passthrough_proxy, rank_clients_by_unfairness
from .seeding import stream

__version__ = "0.1.0"

__all__ = [
    "ClientDataset",
    "DataPoint",
    "DatasetSpec",
    "DefenseResult",
    "FairnessBudget",
    "FairshotError",
    "GroupedSamples",
    "InnerSolveConfig",
    "InnerSolveResult",
    "LocalModelSet",
    "Metric",
    "PenaltyConfig",
    "PenaltyDiagnostics",
    "Samples",
    "TraceRecord",
    "aggregate_models",
    "baseline_global",
    "check_fair_proxy",
    "dbc_eo",
    "dbc_sp",
    "eod",
    "fedasl_weights",
    "fednolowe_weights",
    "generate_fair_proxy",
    "grad_theta",
    "hypergradient",
    "load_dataset",
    "partition_clients",
    "passthrough_proxy",
    "penalty_objective",
    "predict",
    "project_simplex",
    "rank_clients_by_unfairness",
    "regularized_loss",
    "round_half_up",
    "run_defense",
    "sample_root",
    "solve_inner",
    "split_train_test",
    "spd",
    "stream",
    "train_local_models",
    "weighted_loss",
    "__version__",
]
