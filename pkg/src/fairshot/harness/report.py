"""Report emission and re-aggregation.

Layout under the output directory:

    tables/summary.csv   mean-over-seeds rows (accuracy %, |SPD|, |EOD|)
    runs/<cell>.json     one deterministic record per (spec, seed, method)
    heatmap.csv          per-client proxy bias per scenario cell
    bicriteria.csv       accuracy vs fairness point per aggregate row
    trace/<cell>.jsonl   defense trace when requested
    timings.csv          wall-clock seconds per run (kept out of the JSON
                         records so re-runs stay byte-identical)
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

from ..errors import ReportError
from .experiment import ExperimentResult, aggregate_records

SUMMARY_COLUMNS = (
    "dataset", "metric", "mode", "unreliable_frac", "method",
    "n_seeds", "accuracy_pct_mean", "spd_abs_mean", "eod_abs_mean",
)
HEATMAP_COLUMNS = ("dataset", "metric", "mode", "unreliable_frac", "seed", "client", "proxy_fairness")
BICRITERIA_COLUMNS = ("dataset", "metric", "mode", "unreliable_frac", "method", "accuracy_pct_mean", "fairness_mean")
TIMING_COLUMNS = ("run", "runtime_sec")


def _write_csv(path: Path, columns, rows) -> None:
    try:
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
            writer.writeheader()
            writer.writerows(rows)
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc}") from exc


def emit_report(result: ExperimentResult, out_dir: str | Path, include_trace: bool = False) -> list[Path]:
    """Write tables, per-run JSON records, heatmap/bi-criteria data, timings."""
    out = Path(out_dir)
    try:
        (out / "tables").mkdir(parents=True, exist_ok=True)
        (out / "runs").mkdir(exist_ok=True)
        if include_trace:
            (out / "trace").mkdir(exist_ok=True)
    except OSError as exc:
        raise ReportError(f"cannot create output directory {out}: {exc}") from exc

    written: list[Path] = []
    records = result.records()

    summary_path = out / "tables" / "summary.csv"
    _write_csv(summary_path, SUMMARY_COLUMNS, aggregate_records(records))
    written.append(summary_path)

    timings = []
    for cell, record in zip(result.cells, records):
        run_path = out / "runs" / f"{cell.run_key()}.json"
        try:
            run_path.write_text(json.dumps(record, sort_keys=True, indent=1) + "\n")
        except OSError as exc:
            raise ReportError(f"cannot write {run_path}: {exc}") from exc
        written.append(run_path)
        if cell.report is not None:
            timings.append({"run": cell.run_key(), "runtime_sec": f"{cell.report.runtime_sec:.3f}"})
        if include_trace and cell.trace:
            trace_path = out / "trace" / f"{cell.run_key()}.jsonl"
            try:
                with trace_path.open("w") as fh:
                    for step in cell.trace:
                        fh.write(json.dumps(asdict(step), sort_keys=True) + "\n")
            except OSError as exc:
                raise ReportError(f"cannot write {trace_path}: {exc}") from exc
            written.append(trace_path)

    heatmap_rows = []
    seen = set()
    for cell in result.cells:
        if cell.report is None:
            continue
        scenario_key = (cell.spec.label(), cell.seed)
        if scenario_key in seen:
            continue  ## proxy fairness is scenario-level; one method's row suffices
        seen.add(scenario_key)
        for client_id, value in enumerate(cell.report.per_client_proxy_fairness):
            heatmap_rows.append({
                "dataset": cell.spec.dataset,
                "metric": cell.spec.metric.value,
                "mode": cell.spec.mode,
                "unreliable_frac": cell.spec.unreliable_frac,
                "seed": cell.seed,
                "client": client_id,
                "proxy_fairness": repr(value),
            })
    heatmap_path = out / "heatmap.csv"
    _write_csv(heatmap_path, HEATMAP_COLUMNS, heatmap_rows)
    written.append(heatmap_path)

    bicriteria_rows = []
    for row in aggregate_records(records):
        fairness = row["spd_abs_mean"] if row["metric"] == "sp" else row["eod_abs_mean"]
        bicriteria_rows.append({
            "dataset": row["dataset"],
            "metric": row["metric"],
            "mode": row["mode"],
            "unreliable_frac": row["unreliable_frac"],
            "method": row["method"],
            "accuracy_pct_mean": repr(row["accuracy_pct_mean"]),
            "fairness_mean": repr(fairness),
        })
    bicriteria_path = out / "bicriteria.csv"
    _write_csv(bicriteria_path, BICRITERIA_COLUMNS, bicriteria_rows)
    written.append(bicriteria_path)

    timings_path = out / "timings.csv"
    _write_csv(timings_path, TIMING_COLUMNS, timings)
    written.append(timings_path)
    return written


def load_runs(runs_dir: str | Path) -> list[dict]:
    """Read back per-run JSON records (sorted by file name for determinism)."""
    runs = Path(runs_dir)
    if not runs.is_dir():
        raise ReportError(f"{runs} is not a directory")
    records = []
    for path in sorted(runs.glob("*.json")):
        try:
            records.append(json.loads(path.read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ReportError(f"cannot read {path}: {exc}") from exc
    return records
