"""Scenario construction and evaluation.

A scenario takes one preprocessed dataset and produces K clients with
train/test splits, server-side root subsets, an unfairness ranking, and
per-client proxy data: the top round(frac*K) most unfair clients pass
their raw train split through, the rest share fair proxies.  REALISTIC
mode has every reliable client generate its own proxy; IDEAL mode gives
every reliable client a replica of the proxy generated from the most
reliable client's data.

All randomness comes from named streams of the scenario seed, so adding
or removing a method (or generating proxies for a different client set)
never perturbs the partition, splits, or root draws.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from ..data import ClientDataset, Samples, partition_clients, round_half_up, sample_root, split_train_test
from ..defense import PenaltyConfig
from ..errors import ConfigError, EvaluationError, FairshotError, ScenarioError
from ..fairness import FairnessBudget, Metric, eod, spd
from ..logit import GroupedSamples, predict, solve_inner
from ..proxy import generate_fair_proxy, passthrough_proxy, rank_clients_by_unfairness
from ..seeding import stream


class ScenarioMode:
    IDEAL = "ideal"
    REALISTIC = "realistic"

    @classmethod
    def parse(cls, raw: str) -> str:
        mode = str(raw).strip().lower()
        if mode not in (cls.IDEAL, cls.REALISTIC):
            raise ConfigError(f"unknown scenario mode {raw!r} (expected ideal or realistic)")
        return mode


@dataclass(frozen=True)
class ScenarioSpec:
    """Everything needed to materialize one experiment scenario."""

    dataset: str
    metric: Metric = Metric.SP
    unreliable_frac: float = 0.2
    mode: str = ScenarioMode.IDEAL
    k: int = 5
    seed: int = 1
    root_frac: float = 0.005
    budget: FairnessBudget = field(default_factory=FairnessBudget)
    penalty: PenaltyConfig = field(default_factory=PenaltyConfig)
    max_relabel_frac: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.unreliable_frac < 1.0:
            raise ConfigError(f"unreliable_frac must be in [0, 1), got {self.unreliable_frac}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.root_frac <= 1.0:
            raise ConfigError(f"root_frac must be in (0, 1], got {self.root_frac}")
        object.__setattr__(self, "mode", ScenarioMode.parse(self.mode))

    @property
    def n_unreliable(self) -> int:
        return round_half_up(self.unreliable_frac * self.k)

    def label(self) -> str:
        """Stable identifier used in file names and table rows."""
        return f"{self.dataset}_{self.metric.value}_{self.mode}_u{int(round(self.unreliable_frac * 100)):02d}"


@dataclass
class ScenarioInstance:
    spec: ScenarioSpec
    clients: list[ClientDataset]
    ranking: list[int]
    unreliable_ids: tuple[int, ...]
    content_hash: str

    @property
    def reliable_ids(self) -> tuple[int, ...]:
        bad = set(self.unreliable_ids)
        return tuple(c.client_id for c in self.clients if c.client_id not in bad)

    @property
    def proxies(self) -> list[Samples]:
        return [c.proxy for c in self.clients]

    @property
    def roots(self) -> list[Samples]:
        return [c.root for c in self.clients]


def _hash_scenario(spec: ScenarioSpec, clients: list[ClientDataset], unreliable: tuple[int, ...]) -> str:
    """Content hash over everything a method run can see."""
    h = hashlib.blake2b(digest_size=16)
    h.update(repr((spec.dataset, spec.metric.value, spec.mode, spec.unreliable_frac,
                   spec.k, spec.seed, spec.root_frac, unreliable)).encode())
    for client in clients:
        for part in (client.original_train, client.test, client.root, client.proxy):
            if part is None:
                h.update(b"-")
                continue
            for arr in (part.x, part.s, part.y):
                h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


def build_scenario(spec: ScenarioSpec, data: Samples) -> ScenarioInstance:
    """Materialize clients, splits, roots, ranking, and proxies for one spec."""
    seed = spec.seed
    clients = partition_clients(data, spec.k, stream(seed, "partition"))
    clients = [split_train_test(c, 0.8, stream(seed, "split", c.client_id)) for c in clients]
    for client in clients:
        sample_root(client, spec.root_frac, stream(seed, "root", client.client_id))

    ranking = rank_clients_by_unfairness(clients, spec.metric, spec.penalty.inner)
    unreliable = tuple(sorted(ranking[: spec.n_unreliable]))
    bad = set(unreliable)

    if spec.mode == ScenarioMode.IDEAL:
        generator_id = ranking[-1]
        try:
            shared = generate_fair_proxy(
                clients[generator_id], spec.budget, spec.penalty.inner,
                stream(seed, "proxy", generator_id), spec.max_relabel_frac,
            )
        except FairshotError as exc:
            raise ScenarioError(f"proxy generation failed for client {generator_id}: {exc}") from exc
        for client in clients:
            client.proxy = passthrough_proxy(client) if client.client_id in bad else shared
    else:
        for client in clients:
            if client.client_id in bad:
                client.proxy = passthrough_proxy(client)
                continue
            try:
                client.proxy = generate_fair_proxy(
                    client, spec.budget, spec.penalty.inner,
                    stream(seed, "proxy", client.client_id), spec.max_relabel_frac,
                )
            except FairshotError as exc:
                raise ScenarioError(f"proxy generation failed for client {client.client_id}: {exc}") from exc

    return ScenarioInstance(
        spec=spec,
        clients=clients,
        ranking=ranking,
        unreliable_ids=unreliable,
        content_hash=_hash_scenario(spec, clients, unreliable),
    )


@dataclass
class EvalReport:
    """Metrics of one method on one scenario instance."""

    method: str
    accuracy_pct: float
    spd_abs: float
    eod_abs: float
    weights: tuple
    per_client_proxy_fairness: tuple
    runtime_sec: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.accuracy_pct <= 100.0:
            raise EvaluationError(f"accuracy {self.accuracy_pct} outside [0, 100]")


def proxy_fairness_by_client(instance: ScenarioInstance) -> tuple:
    """Per-client proxy bias: fit a plain model on each client's proxy and
    measure |SPD| or |EOD| on that client's own test split (heatmap data)."""
    metric = instance.spec.metric
    cfg = instance.spec.penalty.inner
    values = []
    for client in instance.clients:
        fit = solve_inner(GroupedSamples([client.proxy]), np.ones(1), cfg)
        value = spd(client.test, fit.theta) if metric is Metric.SP else eod(client.test, fit.theta)
        values.append(abs(float(value)))
    return tuple(values)


def pooled_reliable_test(instance: ScenarioInstance) -> Samples:
    bad = set(instance.unreliable_ids)
    parts = [c.test for c in instance.clients if c.client_id not in bad and c.test is not None and len(c.test)]
    if not parts:
        raise EvaluationError("no reliable test data to evaluate on")
    return Samples.concat(parts)


def evaluate(
    theta: np.ndarray,
    instance: ScenarioInstance,
    method: str = "",
    weights=None,
    runtime_sec: float = 0.0,
) -> EvalReport:
    """Score a trained model on the pooled test data of reliable clients."""
    pooled = pooled_reliable_test(instance)
    preds = predict(theta, pooled.a)
    accuracy = 100.0 * float(np.mean(preds == pooled.y))
    if weights is None:
        weights = np.full(len(instance.clients), 1.0 / len(instance.clients))
    return EvalReport(
        method=method,
        accuracy_pct=accuracy,
        spd_abs=abs(float(spd(pooled, theta))),
        eod_abs=abs(float(eod(pooled, theta))),
        weights=tuple(float(w) for w in np.asarray(weights).ravel()),
        per_client_proxy_fairness=proxy_fairness_by_client(instance),
        runtime_sec=float(runtime_sec),
        seed=instance.spec.seed,
    )
