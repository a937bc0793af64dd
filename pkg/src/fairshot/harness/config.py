"""INI configuration for the harness.

Sections and keys (defaults in parentheses; every solver constant is a
key so sensitivity runs never need code edits):

    [dataset]     name, path, label_column, positive_label_value,
                  sensitive_column, privileged_sensitive_value,
                  feature_columns (all others), categorical_columns (auto),
                  standardize (true)
    [scenario]    metric (sp), mode (ideal), unreliable_fracs (0.2,0.4,0.6),
                  k (5), root_frac (0.005), seeds (1,2,3,4,5),
                  epsilon_sp (0.05), epsilon_eo (0.05), max_relabel_frac (1.0)
    [penalty]     nu (0.0), t_max (2000), outer_lr (0.1), adam_beta1 (0.9),
                  adam_beta2 (0.999), adam_eps (1e-8),
                  rho_values (10,100,1000,10000), rho_starts (1,401,801,1201),
                  adaptive_rho (false), lambda_theta (1e-4), inner_tol (1e-7),
                  inner_max_iter (1000), lbfgs_memory (10)
    [comparators] fedasl_alpha (0.9), fedasl_beta (0.2),
                  loss_eval (own_proxy | pooled_root)
    [output]      out_dir (out), trace (false)

adaptive_rho=true rescales the default four-stage rho ladder to t_max
(stage boundaries at the same fractions of the budget); otherwise
rho_starts/rho_values are used verbatim.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from ..data import DatasetSpec
from ..defense import PenaltyConfig
from ..errors import ConfigError
from ..fairness import FairnessBudget, Metric
from ..logit import InnerSolveConfig
from .experiment import METHODS, ComparatorSettings
from .scenario import ScenarioMode, ScenarioSpec

_KNOWN_KEYS = {
    "dataset": {
        "name", "path", "label_column", "positive_label_value", "sensitive_column",
        "privileged_sensitive_value", "feature_columns", "categorical_columns", "standardize",
    },
    "scenario": {
        "metric", "mode", "unreliable_fracs", "k", "root_frac", "seeds",
        "epsilon_sp", "epsilon_eo", "max_relabel_frac",
    },
    "penalty": {
        "nu", "t_max", "outer_lr", "adam_beta1", "adam_beta2", "adam_eps",
        "rho_values", "rho_starts", "adaptive_rho", "lambda_theta",
        "inner_tol", "inner_max_iter", "lbfgs_memory",
    },
    "comparators": {"fedasl_alpha", "fedasl_beta", "loss_eval"},
    "output": {"out_dir", "trace"},
}


@dataclass
class OutputSettings:
    out_dir: str = "out"
    trace: bool = False


@dataclass
class HarnessConfig:
    dataset: DatasetSpec
    dataset_path: str
    metric: Metric = Metric.SP
    mode: str = ScenarioMode.IDEAL
    unreliable_fracs: tuple = (0.2, 0.4, 0.6)
    k: int = 5
    root_frac: float = 0.005
    seeds: tuple = (1, 2, 3, 4, 5)
    budget: FairnessBudget = field(default_factory=FairnessBudget)
    max_relabel_frac: float = 1.0
    penalty: PenaltyConfig = field(default_factory=PenaltyConfig)
    comparators: ComparatorSettings = field(default_factory=ComparatorSettings)
    output: OutputSettings = field(default_factory=OutputSettings)

    def scenario_specs(self) -> list[ScenarioSpec]:
        """One spec per unreliable fraction (seeds are swept by the runner)."""
        return [
            ScenarioSpec(
                dataset=self.dataset.name,
                metric=self.metric,
                unreliable_frac=frac,
                mode=self.mode,
                k=self.k,
                seed=self.seeds[0],
                root_frac=self.root_frac,
                budget=self.budget,
                penalty=self.penalty,
                max_relabel_frac=self.max_relabel_frac,
            )
            for frac in self.unreliable_fracs
        ]


def _split_list(raw: str) -> list[str]:
    return [item.strip() for item in raw.split(",") if item.strip()]


def _floats(raw: str, key: str) -> tuple:
    try:
        return tuple(float(item) for item in _split_list(raw))
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _ints(raw: str, key: str) -> tuple:
    try:
        return tuple(int(item) for item in _split_list(raw))
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def load_config(path: str | Path) -> HarnessConfig:
    """Parse and validate a harness INI file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        unknown = set(parser[section]) - _KNOWN_KEYS[section]
        if unknown:
            raise ConfigError(f"{path}: unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")
    if "dataset" not in parser:
        raise ConfigError(f"{path}: missing required [dataset] section")

    ds = parser["dataset"]
    for required in ("name", "path", "label_column", "sensitive_column"):
        if required not in ds:
            raise ConfigError(f"{path}: [dataset] needs '{required}'")
    spec = DatasetSpec(
        name=ds["name"],
        label_column=ds["label_column"],
        sensitive_column=ds["sensitive_column"],
        positive_label_value=ds.get("positive_label_value", "1"),
        privileged_sensitive_value=ds.get("privileged_sensitive_value", "1"),
        feature_columns=tuple(_split_list(ds.get("feature_columns", ""))),
        categorical_columns=tuple(_split_list(ds.get("categorical_columns", ""))),
        standardize=ds.getboolean("standardize", fallback=True),
    )
    ## dataset paths are resolved relative to the config file's directory
    raw_path = Path(ds["path"])
    dataset_path = str(raw_path if raw_path.is_absolute() else (path.parent / raw_path))

    sc = parser["scenario"] if "scenario" in parser else {}
    getsc = sc.get if hasattr(sc, "get") else dict(sc).get
    budget = FairnessBudget(
        eps_sp=float(getsc("epsilon_sp", "0.05")),
        eps_eo=float(getsc("epsilon_eo", "0.05")),
        metric=Metric.parse(getsc("metric", "sp")),
    )

    pe = parser["penalty"] if "penalty" in parser else {}
    getpe = pe.get if hasattr(pe, "get") else dict(pe).get
    inner = InnerSolveConfig(
        lambda_theta=float(getpe("lambda_theta", "1e-4")),
        tol=float(getpe("inner_tol", "1e-7")),
        max_iter=int(getpe("inner_max_iter", "1000")),
        memory=int(getpe("lbfgs_memory", "10")),
    )
    t_max = int(getpe("t_max", "2000"))
    common = dict(
        nu=float(getpe("nu", "0.0")),
        t_max=t_max,
        outer_lr=float(getpe("outer_lr", "0.1")),
        adam_beta1=float(getpe("adam_beta1", "0.9")),
        adam_beta2=float(getpe("adam_beta2", "0.999")),
        adam_eps=float(getpe("adam_eps", "1e-8")),
        inner=inner,
    )
    if str(getpe("adaptive_rho", "false")).strip().lower() in ("1", "true", "yes", "on"):
        penalty = PenaltyConfig.adaptive(**common)
    else:
        values = _floats(getpe("rho_values", "10,100,1000,10000"), "rho_values")
        starts = _ints(getpe("rho_starts", "1,401,801,1201"), "rho_starts")
        if len(values) != len(starts):
            raise ConfigError(f"{path}: rho_values and rho_starts lengths differ")
        penalty = PenaltyConfig(rho_schedule=tuple(zip(starts, values)), **common)

    co = parser["comparators"] if "comparators" in parser else {}
    getco = co.get if hasattr(co, "get") else dict(co).get
    comparators = ComparatorSettings(
        fedasl_alpha=float(getco("fedasl_alpha", "0.9")),
        fedasl_beta=float(getco("fedasl_beta", "0.2")),
        loss_eval=str(getco("loss_eval", "own_proxy")).strip().lower(),
    )

    ou = parser["output"] if "output" in parser else {}
    getou = ou.get if hasattr(ou, "get") else dict(ou).get
    output = OutputSettings(
        out_dir=str(getou("out_dir", "out")),
        trace=str(getou("trace", "false")).strip().lower() in ("1", "true", "yes", "on"),
    )

    return HarnessConfig(
        dataset=spec,
        dataset_path=dataset_path,
        metric=budget.metric,
        mode=ScenarioMode.parse(getsc("mode", "ideal")),
        unreliable_fracs=_floats(getsc("unreliable_fracs", "0.2,0.4,0.6"), "unreliable_fracs"),
        k=int(getsc("k", "5")),
        root_frac=float(getsc("root_frac", "0.005")),
        seeds=_ints(getsc("seeds", "1,2,3,4,5"), "seeds"),
        budget=budget,
        max_relabel_frac=float(getsc("max_relabel_frac", "1.0")),
        penalty=penalty,
        comparators=comparators,
        output=output,
    )
