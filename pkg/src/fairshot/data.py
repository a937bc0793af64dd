"""Tabular ingestion, client partitioning, train/test splits, and root sampling.

Conventions fixed here and relied on everywhere else:
  * labels live in {-1, +1}, sensitive attributes in {0, 1};
  * continuous features are standardized over the full dataset before any
    partitioning;
  * a constant-1 feature is appended to x so the linear model has an intercept;
  * the model input vector is a = (x, s) with the sensitive bit last.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from .errors import (
    ConfigError,
    EmptyInputError,
    EncodingError,
    PartitionError,
    SamplingError,
    SchemaError,
)


def round_half_up(value: float) -> int:
    """Round with ties going up (round(2.5) in Python goes to even, not up)."""
    return int(math.floor(value + 0.5))


@dataclass(frozen=True)
class DataPoint:
    """One labeled sample: feature vector (with trailing constant 1), sensitive bit, label."""

    x: np.ndarray
    s: int
    y: int


class Samples:
    """Array-backed collection of data points with aligned x / s / y columns.

    x is (N, d) float64, s and y are (N,) int64.  The model input matrix
    `a` appends s as the last column, so the model dimension is d + 1.
    """

    __slots__ = ("x", "s", "y")

    def __init__(self, x: np.ndarray, s: np.ndarray, y: np.ndarray, *, validate: bool = True):
        x = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
        s = np.asarray(s, dtype=np.int64).ravel()
        y = np.asarray(y, dtype=np.int64).ravel()
        if x.ndim != 2:
            x = x.reshape(len(s), -1)
        if validate:
            if not (x.shape[0] == s.shape[0] == y.shape[0]):
                raise SchemaError(
                    f"misaligned columns: x has {x.shape[0]} rows, s has {s.shape[0]}, y has {y.shape[0]}"
                )
            if x.size and not np.all(np.isfinite(x)):
                raise SchemaError("non-finite feature values")
            if s.size and not np.isin(s, (0, 1)).all():
                raise EncodingError("sensitive attribute values outside {0, 1}")
            if y.size and not np.isin(y, (-1, 1)).all():
                raise EncodingError("label values outside {-1, +1}")
        self.x = x
        self.s = s
        self.y = y

    @property
    def a(self) -> np.ndarray:
        """Model input matrix (N, d+1): features with the sensitive bit appended."""
        return np.column_stack([self.x, self.s.astype(np.float64)])

    @property
    def n_features(self) -> int:
        return self.x.shape[1]

    @property
    def dim(self) -> int:
        """Model dimension: feature count plus the sensitive column."""
        return self.x.shape[1] + 1

    def __len__(self) -> int:
        return self.x.shape[0]

    def __getitem__(self, i: int) -> DataPoint:
        return DataPoint(self.x[i].copy(), int(self.s[i]), int(self.y[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def subset(self, indices) -> "Samples":
        idx = np.asarray(indices, dtype=np.int64)
        return Samples(self.x[idx], self.s[idx], self.y[idx], validate=False)

    def equals(self, other: "Samples") -> bool:
        """Bitwise equality of all three columns."""
        return (
            self.x.shape == other.x.shape
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.s, other.s)
            and np.array_equal(self.y, other.y)
        )

    @classmethod
    def concat(cls, parts: Iterable["Samples"]) -> "Samples":
        parts = [p for p in parts if p is not None]
        if not parts:
            raise EmptyInputError("nothing to concatenate")
        return cls(
            np.vstack([p.x for p in parts]),
            np.concatenate([p.s for p in parts]),
            np.concatenate([p.y for p in parts]),
            validate=False,
        )

    @classmethod
    def from_points(cls, points: Sequence[DataPoint]) -> "Samples":
        if not points:
            raise EmptyInputError("no points given")
        return cls(
            np.vstack([p.x for p in points]),
            np.array([p.s for p in points]),
            np.array([p.y for p in points]),
        )


@dataclass(frozen=True)
class DatasetSpec:
    """Schema description for one CSV dataset.

    feature_columns empty means "all columns other than label and sensitive".
    Non-numeric feature columns are one-hot encoded; categorical_columns forces
    that treatment for columns whose raw values happen to be numeric codes.
    """

    name: str
    label_column: str
    sensitive_column: str
    positive_label_value: str
    privileged_sensitive_value: str
    feature_columns: tuple[str, ...] = ()
    categorical_columns: tuple[str, ...] = ()
    standardize: bool = True


@dataclass
class ClientDataset:
    """One client's shard through the pipeline stages.

    partition_clients fills original_train with the whole shard (test None);
    split_train_test splits it; sample_root records the root subset and its
    indices into original_train; the scenario builder attaches the proxy.
    """

    client_id: int
    original_train: Samples
    test: Samples | None = None
    root: Samples | None = None
    root_indices: np.ndarray | None = None
    proxy: Samples | None = None

    @property
    def local_data(self) -> Samples:
        """The client's full original dataset (train and test pooled)."""
        if self.test is None or len(self.test) == 0:
            return self.original_train
        return Samples.concat([self.original_train, self.test])


def _binary_encode(raw: pd.Series, positive_value: str, what: str) -> np.ndarray:
    cleaned = raw.astype(str).str.strip()
    levels = sorted(cleaned.unique())
    if len(levels) != 2:
        raise EncodingError(f"{what} column must take exactly 2 values, found {levels[:6]}")
    target = str(positive_value).strip()
    if target not in levels:
        raise EncodingError(f"{what} value {target!r} not among observed values {levels}")
    return (cleaned == target).to_numpy()


def load_dataset(path: str | Path, spec: DatasetSpec) -> Samples:
    """Read a headered CSV into a Samples collection per the schema spec.

    Rows with missing values in any used column are dropped (the only
    imputation policy).  Standardization uses full-dataset population moments
    and runs before any partitioning, so every non-constant feature lands at
    mean 0 / stdev 1.  A constant-1 column is appended last inside x.
    """
    path = Path(path)
    try:
        ## round_trip parsing: decimal text always lands on the nearest float64,
        ## so re-reading a file written with 17 significant digits is lossless
        frame = pd.read_csv(path, float_precision="round_trip")
    except FileNotFoundError:
        raise SchemaError(f"dataset file not found: {path}")
    except pd.errors.EmptyDataError:
        raise EmptyInputError(f"dataset file has no rows: {path}")
    if frame.shape[0] == 0:
        raise EmptyInputError(f"dataset file has no rows: {path}")

    if spec.label_column == spec.sensitive_column:
        raise SchemaError("label and sensitive columns must be distinct")
    for col in (spec.label_column, spec.sensitive_column):
        if col not in frame.columns:
            raise SchemaError(f"missing column {col!r} in {path.name}")

    if spec.feature_columns:
        features = list(spec.feature_columns)
        missing = [c for c in features if c not in frame.columns]
        if missing:
            raise SchemaError(f"missing feature columns {missing} in {path.name}")
        if spec.label_column in features or spec.sensitive_column in features:
            raise SchemaError("label/sensitive columns cannot also be features")
    else:
        features = [c for c in frame.columns if c not in (spec.label_column, spec.sensitive_column)]
    if not features:
        raise SchemaError("no feature columns left after removing label and sensitive")

    used = features + [spec.label_column, spec.sensitive_column]
    frame = frame[used].replace("", np.nan).dropna()
    if frame.shape[0] == 0:
        raise EmptyInputError("every row was rejected for missing values")

    y01 = _binary_encode(frame[spec.label_column], spec.positive_label_value, "label")
    y = np.where(y01, 1, -1).astype(np.int64)
    s = _binary_encode(
        frame[spec.sensitive_column], spec.privileged_sensitive_value, "sensitive"
    ).astype(np.int64)

    blocks: list[np.ndarray] = []
    for col in features:
        values = frame[col]
        numeric = pd.to_numeric(values, errors="coerce")
        if col in spec.categorical_columns or numeric.isna().any():
            ## one-hot over sorted levels, first level dropped to avoid an
            ## exact linear dependence with the appended constant column
            levels = sorted(values.astype(str).str.strip().unique())
            for level in levels[1:]:
                blocks.append((values.astype(str).str.strip() == level).to_numpy(np.float64))
        else:
            blocks.append(numeric.to_numpy(np.float64))
    x = np.column_stack(blocks)

    if spec.standardize:
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        live = std > 0
        x[:, live] = (x[:, live] - mean[live]) / std[live]

    x = np.column_stack([x, np.ones(x.shape[0])])
    return Samples(x, s, y)


def partition_clients(data: Samples, n_clients: int, rng: np.random.Generator) -> list[ClientDataset]:
    """Randomly split the dataset into n_clients shards with sizes differing by at most one."""
    if n_clients < 1:
        raise ConfigError(f"n_clients must be >= 1, got {n_clients}")
    if len(data) == 0:
        raise EmptyInputError("cannot partition an empty dataset")
    if n_clients > len(data):
        raise PartitionError(f"cannot split {len(data)} rows into {n_clients} clients")
    order = rng.permutation(len(data))
    shards = np.array_split(order, n_clients)
    return [
        ClientDataset(client_id=c, original_train=data.subset(np.sort(idx)))
        for c, idx in enumerate(shards)
    ]


def split_train_test(client: ClientDataset, train_frac: float, rng: np.random.Generator) -> ClientDataset:
    """Split the client's shard into train/test; train size is round-half-up of frac*N."""
    if not 0.0 < train_frac < 1.0:
        raise ConfigError(f"train_frac must be in (0, 1), got {train_frac}")
    shard = client.original_train
    n = len(shard)
    if n == 0:
        raise EmptyInputError(f"client {client.client_id} has no data to split")
    n_train = round_half_up(train_frac * n)
    order = rng.permutation(n)
    train_idx = np.sort(order[:n_train])
    test_idx = np.sort(order[n_train:])
    if test_idx.size == 0:
        warnings.warn(f"client {client.client_id}: empty test split ({n} points, frac {train_frac})")
    return replace(client, original_train=shard.subset(train_idx), test=shard.subset(test_idx))


def sample_root(client: ClientDataset, root_frac: float, rng: np.random.Generator) -> Samples:
    """Draw the trusted root subset from the client's train split (no replacement).

    Size is max(1, round-half-up(frac * train size)).  The subset and its
    indices into original_train are stored on the client record.
    """
    if not 0.0 < root_frac <= 1.0:
        raise ConfigError(f"root_frac must be in (0, 1], got {root_frac}")
    train = client.original_train
    if len(train) == 0:
        raise SamplingError(f"client {client.client_id} has an empty train split")
    k = max(1, round_half_up(root_frac * len(train)))
    idx = np.sort(rng.choice(len(train), size=k, replace=False))
    client.root_indices = idx
    client.root = train.subset(idx)
    return client.root
