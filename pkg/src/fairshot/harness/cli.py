"""Command line interface.

Subcommands:

    run           sweep scenarios x methods x seeds from an INI config
    rank-clients  print the per-client unfairness ranking for one scenario
    defend        run the weight-learning defense on one scenario
    project       project a vector onto the probability simplex
    report        re-aggregate previously written run records

Config keys can be overridden per invocation, e.g.

    fairshot run --config configs/lawlike.ini --unreliable-frac 0.6 --trace
    fairshot defend --config configs/lawlike.ini --seeds 5 --t-max 400
    fairshot project 0.9,0.4,-0.2
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from ..data import load_dataset, partition_clients, split_train_test
from ..defense import PenaltyConfig, project_simplex
from ..errors import ConfigError, FairshotError
from ..fairness import Metric, eod, spd
from ..logit import GroupedSamples, solve_inner
from ..proxy import rank_clients_by_unfairness
from ..seeding import stream
from .config import load_config
from .experiment import METHOD_DEFENSE, METHODS, aggregate_records, run_experiment, run_method
from .report import SUMMARY_COLUMNS, _write_csv, emit_report, load_runs
from .scenario import build_scenario, evaluate


_AGG_ROW = "%-10s %-2s %-9s u=%.2f %-10s acc=%6.2f%%  |spd|=%.4f  |eod|=%.4f  (n=%d)"


def _add_common(parser: argparse.ArgumentParser, need_config: bool) -> None:
    parser.add_argument("--config", required=need_config, help="INI config file")
    parser.add_argument("--dataset", help="override the dataset name recorded in outputs")
    parser.add_argument("--metric", choices=["sp", "eo"], help="fairness metric override")
    parser.add_argument("--unreliable-frac", help="comma-separated fractions, e.g. 0.2,0.4,0.6")
    parser.add_argument("--mode", choices=["ideal", "realistic"], help="proxy generation mode")
    parser.add_argument("--seeds", help="comma-separated seeds, e.g. 1,2,3")
    parser.add_argument("--methods", help="comma-separated subset of: " + ",".join(METHODS))
    parser.add_argument("--t-max", type=int, dest="t_max",
                        help="outer iteration budget (the penalty ladder rescales to it)")
    parser.add_argument("--out", help="output directory override")
    parser.add_argument("--trace", action="store_true", default=None,
                        help="write per-iteration defense traces")


def _parse_floats(raw: str) -> tuple:
    try:
        return tuple(float(v) for v in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_ints(raw: str) -> tuple:
    try:
        return tuple(int(v) for v in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _configure(args) -> "HarnessConfig":
    cfg = load_config(args.config)
    if args.dataset:
        cfg.dataset = dataclasses.replace(cfg.dataset, name=args.dataset)
    if args.metric:
        cfg.metric = Metric.parse(args.metric)
        cfg.budget = dataclasses.replace(cfg.budget, metric=cfg.metric)
    if args.unreliable_frac:
        cfg.unreliable_fracs = _parse_floats(args.unreliable_frac)
    if args.mode:
        cfg.mode = args.mode
    if args.seeds:
        cfg.seeds = _parse_ints(args.seeds)
    if args.t_max:
        p = cfg.penalty
        cfg.penalty = PenaltyConfig.adaptive(
            t_max=args.t_max, nu=p.nu, outer_lr=p.outer_lr, adam_beta1=p.adam_beta1,
            adam_beta2=p.adam_beta2, adam_eps=p.adam_eps, inner=p.inner)
    if args.out:
        cfg.output.out_dir = args.out
    if args.trace is not None:
        cfg.output.trace = args.trace
    return cfg


def _single_instance(cfg):
    """Build one scenario from the config's first fraction and first seed."""
    data = load_dataset(cfg.dataset_path, cfg.dataset)
    spec = dataclasses.replace(cfg.scenario_specs()[0], seed=cfg.seeds[0])
    return build_scenario(spec, data)


def _cmd_run(args) -> int:
    cfg = _configure(args)
    methods = tuple(args.methods.replace(",", " ").split()) if args.methods else METHODS
    data = load_dataset(cfg.dataset_path, cfg.dataset)
    result = run_experiment(cfg.scenario_specs(), methods, cfg.seeds,
                            {cfg.dataset.name: data}, cfg.comparators)
    paths = emit_report(result, cfg.output.out_dir, include_trace=cfg.output.trace)
    failures = [c for c in result.cells if not c.ok]
    for cell in failures:
        print(f"FAILED {cell.run_key()}: {cell.error}", file=sys.stderr)
    for row in aggregate_records(result.records()):
        print(_AGG_ROW % (
            row["dataset"], row["metric"], row["mode"], row["unreliable_frac"], row["method"],
            row["accuracy_pct_mean"], row["spd_abs_mean"], row["eod_abs_mean"], row["n_seeds"]))
    print(f"wrote {len(paths)} files under {cfg.output.out_dir}/")
    return 1 if failures else 0


def _cmd_rank_clients(args) -> int:
    cfg = _configure(args)
    data = load_dataset(cfg.dataset_path, cfg.dataset)
    seed = cfg.seeds[0]
    clients = partition_clients(data, cfg.k, stream(seed, "partition"))
    clients = [split_train_test(c, 0.8, stream(seed, "split", c.client_id)) for c in clients]
    ranking = rank_clients_by_unfairness(clients, cfg.metric, cfg.penalty.inner)
    by_id = {c.client_id: c for c in clients}
    print(f"ranking for {cfg.dataset.name}, metric={cfg.metric.value}, seed={seed} (most unfair first)")
    for rank, cid in enumerate(ranking, start=1):
        client = by_id[cid]
        fit = solve_inner(GroupedSamples([client.original_train]), np.ones(1), cfg.penalty.inner)
        value = spd(client.test, fit.theta) if cfg.metric is Metric.SP else eod(client.test, fit.theta)
        print(f"  {rank}. client {cid}: |{cfg.metric.value}| = {abs(value):.4f}")
    return 0


def _cmd_defend(args) -> int:
    cfg = _configure(args)
    instance = _single_instance(cfg)
    theta, weights, defense = run_method(instance, METHOD_DEFENSE, cfg.comparators)
    report = evaluate(theta, instance, METHOD_DEFENSE, weights)
    bad = set(instance.unreliable_ids)
    print(f"scenario {instance.spec.label()} seed={instance.spec.seed} "
          f"(unreliable: {sorted(bad) or 'none'})")
    for client, weight in zip(instance.clients, weights):
        tag = "unreliable" if client.client_id in bad else "reliable"
        print(f"  client {client.client_id} ({tag:10s}): weight = {weight:.4f}")
    print(f"pooled accuracy = {report.accuracy_pct:.2f}%  |spd| = {report.spd_abs:.4f}  "
          f"|eod| = {report.eod_abs:.4f}")
    if cfg.output.trace:
        out = Path(cfg.output.out_dir) / "trace"
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"defend_{instance.spec.label()}_s{instance.spec.seed}.jsonl"
        with path.open("w") as fh:
            for rec in defense.trace:
                fh.write(json.dumps(dataclasses.asdict(rec), sort_keys=True) + "\n")
        print(f"trace written to {path}")
    return 0


def _cmd_project(args) -> int:
    vector = np.asarray(_parse_floats(args.vector))
    projected = project_simplex(vector)
    print(",".join(repr(float(v)) for v in projected))
    return 0


def _cmd_report(args) -> int:
    out = Path(args.out or "out")
    records = load_runs(out / "runs")
    rows = aggregate_records(records)
    _write_csv(out / "tables" / "summary.csv", SUMMARY_COLUMNS, rows)
    for row in rows:
        print(_AGG_ROW % (
            row["dataset"], row["metric"], row["mode"], row["unreliable_frac"], row["method"],
            row["accuracy_pct_mean"], row["spd_abs_mean"], row["eod_abs_mean"], row["n_seeds"]))
    print(f"re-aggregated {len(records)} run records into {out / 'tables' / 'summary.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairshot", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="sweep scenarios x methods x seeds")
    _add_common(p_run, need_config=True)
    p_run.set_defaults(func=_cmd_run)

    p_rank = sub.add_parser("rank-clients", help="print the unfairness ranking")
    _add_common(p_rank, need_config=True)
    p_rank.set_defaults(func=_cmd_rank_clients)

    p_def = sub.add_parser("defend", help="run the defense on one scenario")
    _add_common(p_def, need_config=True)
    p_def.set_defaults(func=_cmd_defend)

    p_proj = sub.add_parser("project", help="project a vector onto the simplex")
    p_proj.add_argument("vector", help="comma-separated components, e.g. 0.9,0.4,-0.2")
    p_proj.set_defaults(func=_cmd_project)

    p_rep = sub.add_parser("report", help="re-aggregate runs/*.json records")
    p_rep.add_argument("--out", help="directory holding runs/ (default: out)")
    p_rep.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FairshotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
