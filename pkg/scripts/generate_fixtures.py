"""Regenerate the CSV fixtures under fixtures/.

lawlike.csv is a synthetic admissions-style dataset: five gaussian features,
a binary group attribute that shifts the first feature and the outcome score,
and a logistic-noise threshold label.  Group membership predicts the outcome,
so plain fits show a clear statistical-parity gap.  tiny.csv is a small messy
file (categorical column, missing cells) for loader edge-case tests.

Values are written with 17 significant digits; together with round-trip float
parsing in the loader this makes the CSV a lossless container.
"""

import csv
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "fixtures"


def write_lawlike(n=10000, seed=2024):
    rng = np.random.default_rng(seed)
    s = (rng.random(n) < 0.35).astype(int)
    x = rng.normal(size=(n, 5))
    x[:, 0] += 0.8 * s
    score = (1.1 * x[:, 0] - 0.9 * x[:, 1] + 0.6 * x[:, 2] + 0.3 * x[:, 3]
             + 1.3 * s - 0.4 + rng.logistic(scale=0.9, size=n))
    y = (score > 0).astype(int)
    path = OUT / "lawlike.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x0", "x1", "x2", "x3", "x4", "group", "outcome"])
        for i in range(n):
            writer.writerow(["%.17g" % v for v in x[i]] + [s[i], y[i]])
    print(f"wrote {path} ({n} rows, {y.mean():.3f} positive, {s.mean():.3f} privileged)")


def write_tiny(n=40, seed=7):
    rng = np.random.default_rng(seed)
    regions = ["north", "south", "east"]
    path = OUT / "tiny.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["age", "income", "region", "sex", "hired"])
        for i in range(n):
            age = int(rng.integers(20, 60))
            income = round(float(rng.normal(50, 12)), 2)
            region = regions[int(rng.integers(3))]
            sex = int(rng.integers(2))
            hired = int(rng.random() < 0.35 + 0.3 * sex + 0.004 * (income - 50))
            row = [age, income, region, sex, hired]
            ## rows 5 and 11 get a missing cell so loader row-rejection is exercised
            if i == 5:
                row[1] = ""
            if i == 11:
                row[2] = ""
            writer.writerow(row)
    print(f"wrote {path} ({n} rows, 2 with missing cells)")


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    write_lawlike()
    write_tiny()
