"""Datasets, preprocessing, splitting, min-max scaling and quality measures."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .errors import EmptyAfterFiltering, InvalidCounts, LengthMismatch, PrelimError, TooSmall

log = logging.getLogger(__name__)

TARGET_COLUMN = "y"


@dataclass(frozen=True)
class Dataset:
    """N x M real feature matrix with binary labels."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple = ()

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        if X.ndim != 2:
            raise PrelimError("features must be a 2-D matrix")
        y = np.asarray(self.y)
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise PrelimError("dataset needs at least one row and one feature")
        if y.shape != (X.shape[0],):
            raise LengthMismatch(f"{X.shape[0]} rows but {y.shape} labels")
        if not np.isfinite(X).all():
            raise PrelimError("features contain missing or non-finite values")
        if not np.isin(y, (0, 1)).all():
            raise PrelimError("labels must be 0 or 1")
        names = tuple(self.feature_names) or tuple(f"x{j}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise LengthMismatch("feature_names does not match the number of columns")
        X.setflags(write=False)
        y = y.astype(np.int64)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx], self.feature_names)

    def with_features(self, X) -> "Dataset":
        return Dataset(X, self.y, self.feature_names)

    def __len__(self):
        return self.n


def read_csv(path) -> Dataset:
    """Read the interchange CSV: header, numeric features, final column ``y``."""
    df = pd.read_csv(path, encoding="utf-8", float_precision="round_trip")
    if df.columns[-1] != TARGET_COLUMN:
        raise PrelimError(f"{path}: last column must be named {TARGET_COLUMN!r}")
    X = df.iloc[:, :-1].to_numpy(dtype=np.float64)
    y = df.iloc[:, -1].to_numpy()
    return Dataset(X, y, tuple(df.columns[:-1]))


def write_table(path, X, targets, feature_names, target_fmt=None):
    """Write features plus a target column in the interchange CSV layout.

    Features are written with 17 significant digits so a read/write round trip
    is exact. ``targets`` may be hard labels or real-valued scores.
    """
    targets = np.asarray(targets)
    if target_fmt is None:
        target_fmt = "{:d}" if np.issubdtype(targets.dtype, np.integer) else "{:.17g}"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(feature_names) + [TARGET_COLUMN])
        for row, t in zip(np.asarray(X), targets):
            w.writerow([f"{v:.17g}" for v in row] + [target_fmt.format(t.item())])


def write_csv(path, d: Dataset):
    write_table(path, d.X, d.y, d.feature_names)


def preprocess(raw: pd.DataFrame, target: str = TARGET_COLUMN, positive=None,
               min_unique: int = 20) -> Dataset:
    """Keep numeric columns with at least ``min_unique`` distinct values, drop
    rows with missing values in what is kept, and binarize the target.

    ``positive`` names the target value mapped to 1. When omitted, a target
    that already is 0/1 is kept and any other two-valued target maps its
    larger value to 1.
    """
    if target not in raw.columns:
        raise PrelimError(f"target column {target!r} not found")
    keep = []
    for col in raw.columns:
        if col == target:
            continue
        s = raw[col]
        if not pd.api.types.is_numeric_dtype(s) or pd.api.types.is_bool_dtype(s):
            continue
        if s.nunique(dropna=True) < min_unique:
            continue
        keep.append(col)
    if not keep:
        raise EmptyAfterFiltering("no numeric feature with enough unique values")
    table = raw[keep + [target]].dropna(axis=0, how="any")
    if table.empty:
        raise EmptyAfterFiltering("every row has a missing value")
    t = table[target]
    if positive is not None:
        y = (t == positive).to_numpy().astype(np.int64)
    else:
        values = sorted(pd.unique(t))
        if set(values) <= {0, 1}:
            y = t.to_numpy().astype(np.int64)
        elif len(values) == 2:
            y = (t == values[1]).to_numpy().astype(np.int64)
        else:
            raise PrelimError("target has more than two values; pass `positive`")
    return Dataset(table[keep].to_numpy(dtype=np.float64), y, tuple(str(c) for c in keep))


# --- splitting --------------------------------------------------------------

@dataclass(frozen=True)
class SplitPlan:
    splits: tuple
    n_train: int
    k: int

    def __iter__(self):
        return iter(self.splits)

    def __len__(self):
        return len(self.splits)

    def __getitem__(self, i):
        return self.splits[i]


def make_splits(d, n_train: int, k: int, seed) -> SplitPlan:
    """K train/test splits whose train sets overlap as little as possible.

    The rows are shuffled once; split ``s`` takes the ``n_train`` consecutive
    positions starting at ``s * n_train`` (wrapping around), so every row lands
    in at most ``ceil(k * n_train / |D|)`` train sets.
    """
    size = d if isinstance(d, (int, np.integer)) else len(d)
    if n_train >= size:
        raise TooSmall(f"n_train={n_train} leaves no test rows out of {size}")
    if n_train < 1 or k < 1:
        raise PrelimError("n_train and k must be positive")
    perm = np.random.default_rng(seed).permutation(size)
    splits = []
    for s in range(k):
        pos = (s * n_train + np.arange(n_train)) % size
        train = np.sort(perm[pos])
        mask = np.ones(size, dtype=bool)
        mask[train] = False
        splits.append((train, np.flatnonzero(mask)))
    return SplitPlan(tuple(splits), n_train, k)


def kfold_indices(n, n_splits, rng, labels=None):
    """Shuffled (optionally stratified) K-fold; yields (train_idx, test_idx)."""
    n_splits = max(2, min(n_splits, n))
    fold = np.empty(n, dtype=np.int64)
    if labels is None:
        perm = rng.permutation(n)
        fold[perm] = np.arange(n) % n_splits
    else:
        labels = np.asarray(labels)
        offset = 0
        for c in np.unique(labels):
            idx = np.flatnonzero(labels == c)
            idx = idx[rng.permutation(idx.size)]
            fold[idx] = (offset + np.arange(idx.size)) % n_splits
            offset += idx.size
    for f in range(n_splits):
        test = np.flatnonzero(fold == f)
        if test.size == 0:
            continue
        yield np.flatnonzero(fold != f), test


# --- scaling ----------------------------------------------------------------

@dataclass(frozen=True)
class Scaler:
    low: np.ndarray
    high: np.ndarray

    @property
    def span(self):
        return self.high - self.low

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        span = self.span
        safe = np.where(span > 0, span, 1.0)
        out = (X - self.low) / safe
        out[:, span <= 0] = 0.0
        return out

    def inverse_transform(self, Z):
        return np.asarray(Z, dtype=np.float64) * self.span + self.low

    def digest(self) -> str:
        import hashlib

        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.low).tobytes())
        h.update(np.ascontiguousarray(self.high).tobytes())
        return h.hexdigest()[:16]


def fit_scaler(d) -> Scaler:
    X = d.X if isinstance(d, Dataset) else np.asarray(d, dtype=np.float64)
    return Scaler(X.min(axis=0).copy(), X.max(axis=0).copy())


def apply_scaler(s: Scaler, d: Dataset) -> Dataset:
    """Min-max transform; values outside the fitted range are not clipped."""
    return d.with_features(s.transform(d.X))


# --- quality measures -------------------------------------------------------

def _pair(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise LengthMismatch(f"lengths differ: {a.shape} vs {b.shape}")
    return a, b


def accuracy(pred, truth) -> float:
    pred, truth = _pair(pred, truth)
    if pred.size == 0:
        return 0.0
    return float(np.mean(pred == truth))


def balanced_accuracy(pred, truth) -> float:
    """Mean of TPR and TNR; plain accuracy when ``truth`` lacks a class."""
    pred, truth = _pair(pred, truth)
    pos = truth == 1
    neg = ~pos
    if not pos.any() or not neg.any():
        return accuracy(pred, truth)
    tpr = np.mean(pred[pos] == 1)
    tnr = np.mean(pred[neg] == 0)
    return float((tpr + tnr) / 2)


def fidelity(wb_pred, bb_pred) -> float:
    return accuracy(wb_pred, bb_pred)


def wracc(n, n_plus, N, N_plus) -> float:
    """Weighted relative accuracy (n/N) * (n+/n - N+/N); 0 for an empty cover.

    ``n_plus``/``N_plus`` may be real (sums of probability targets). Evaluated
    as (n+ * N - n * N+) / N^2 so covers with equal scores give equal floats.
    """
    if N <= 0 or n < 0 or n > N or n_plus < 0 or n_plus > n or N_plus < 0 or N_plus > N:
        raise InvalidCounts(f"invalid counts n={n} n+={n_plus} N={N} N+={N_plus}")
    if n == 0:
        return 0.0
    return (n_plus * N - n * N_plus) / (N * N)


def naive_class(y_train) -> int:
    """Majority class of the training labels; an exact tie goes to class 1."""
    y_train = np.asarray(y_train)
    ones = int(np.sum(y_train == 1))
    return 1 if 2 * ones >= y_train.size else 0


def relative_increase(metric_wb: float, metric_naive: float) -> float:
    return metric_wb - metric_naive


def class_weights(y) -> np.ndarray:
    """Per-row weights N / (2 * N_class) for hard labels."""
    y = np.asarray(y).astype(np.int64)
    n = y.size
    counts = np.bincount(y, minlength=2).astype(np.float64)
    per_class = np.where(counts > 0, n / (2.0 * np.maximum(counts, 1.0)), 0.0)
    return per_class[y]


@dataclass
class QualityReport:
    accuracy: float = math.nan
    balanced_accuracy: float = math.nan
    fidelity: float = math.nan
    wracc: float = math.nan
    rel_acc_inc: float = math.nan
    rel_ba_inc: float = math.nan
    rel_fid_inc: float = math.nan
    complexity: int = 0
    outcome: str = ""
    extra: dict = field(default_factory=dict)


def compare(metric, baseline, tol=1e-9) -> str:
    """win / draw / loss of ``metric`` against ``baseline``."""
    delta = metric - baseline
    if abs(delta) <= tol:
        return "draw"
    return "win" if delta > 0 else "loss"


def box_cover_counts(covered, targets):
    """(n, n+) for a boolean cover mask and (possibly real) targets."""
    covered = np.asarray(covered, dtype=bool)
    t = np.asarray(targets, dtype=np.float64)
    return int(covered.sum()), float(t[covered].sum())


def wracc_of_cover(covered, targets) -> float:
    targets = np.asarray(targets, dtype=np.float64)
    n, n_plus = box_cover_counts(covered, targets)
    N = targets.size
    return wracc(n, min(n_plus, n), N, min(float(targets.sum()), N))


def canonical_order(X, y=None):
    """Row permutation sorting by feature 0, then 1, ..., then the target.

    Learners that draw random row subsets apply it first so their output does
    not depend on the order rows arrive in.
    """
    X = np.asarray(X)
    keys = [X[:, j] for j in range(X.shape[1])]
    if y is not None:
        extra = np.asarray(y)
        keys.extend(extra.T if extra.ndim == 2 else [extra])
    return np.lexsort(keys[::-1])


def feature_names_or_default(names: Sequence[str] | None, m: int):
    return tuple(names) if names else tuple(f"x{j}" for j in range(m))


def as_path(p) -> Path:
    return p if isinstance(p, Path) else Path(p)
