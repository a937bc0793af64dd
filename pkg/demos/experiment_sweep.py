"""Run the shipped law-like experiment end to end and inspect the outputs.

Same pipeline the CLI drives: parse the INI config, build scenarios per
unreliable fraction, run all four methods, and emit the report tree
(summary table, heatmap and trade-off data, per-run JSON records).
Everything is keyed off the config's seeds, so re-running reproduces the
run records byte for byte.
"""

import tempfile
from pathlib import Path

from fairshot.data import load_dataset
from fairshot.harness.config import load_config
from fairshot.harness.experiment import METHODS, run_experiment
from fairshot.harness.report import emit_report

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "lawlike.ini"


def main():
    cfg = load_config(CONFIG)
    data = load_dataset(cfg.dataset_path, cfg.dataset)
    print(f"dataset {cfg.dataset.name}: {len(data)} samples, model dimension {data.dim}")
    print(f"metric {cfg.metric.value}, mode {cfg.mode}, fractions {cfg.unreliable_fracs}, "
          f"seeds {cfg.seeds}")

    result = run_experiment(cfg.scenario_specs(), METHODS, cfg.seeds,
                            {cfg.dataset.name: data}, cfg.comparators)
    ok = sum(1 for c in result.cells if c.ok)
    print(f"ran {len(result.cells)} cells ({ok} ok)")

    print("\naggregate rows (mean over seeds):")
    header = f"{'frac':>5} {'method':<10} {'acc %':>7} {'|spd|':>8} {'|eod|':>8}"
    print(header)
    for row in result.aggregates():
        print(f"{row['unreliable_frac']:5.1f} {row['method']:<10} "
              f"{row['accuracy_pct_mean']:7.2f} {row['spd_abs_mean']:8.4f} "
              f"{row['eod_abs_mean']:8.4f}")

    out = Path(tempfile.mkdtemp(prefix="fairshot-demo-"))
    paths = emit_report(result, out, include_trace=True)
    print(f"\nreport written to {out}:")
    for path in sorted(paths):
        print(f"  {Path(path).relative_to(out)}")


if __name__ == "__main__":
    main()
