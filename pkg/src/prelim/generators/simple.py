"""Generators that replay or resample the marginals: dummy, unif, norm, rerx, ssl."""
import logging

import numpy as np

from ..errors import EmptySubset
from .base import Generator, Replay, features, labels

log = logging.getLogger(__name__)


class Uniform(Generator):
    kind = "unif"

    def __init__(self, X, seed=None):
        super().__init__(seed)
        self.low = X.min(axis=0)
        self.high = X.max(axis=0)
        self.m = X.shape[1]

    def _sample(self, L, rng):
        return self.low + (self.high - self.low) * rng.random((L, self.m))


class Normal(Generator):
    kind = "norm"

    def __init__(self, X, seed=None):
        super().__init__(seed)
        self.mean = X.mean(axis=0)
        self.std = X.std(axis=0, ddof=1) if X.shape[0] > 1 else np.zeros(X.shape[1])
        self.m = X.shape[1]

    def _sample(self, L, rng):
        return self.mean + self.std * rng.standard_normal((L, self.m))


def fit_simple(d, kind, seed=None) -> Generator:
    X = features(d)
    if kind == "dummy":
        return Replay(X, seed, "dummy")
    if kind == "unif":
        return Uniform(X, seed)
    if kind == "norm":
        return Normal(X, seed)
    raise ValueError(f"not a simple generator: {kind!r}")


def fit_rerx(d, bb, y=None, seed=None) -> Generator:
    """Replay the train points the black box labels correctly."""
    X = features(d)
    y = labels(d, y)
    keep = np.asarray(bb.predict(X)) == y
    if not keep.any():
        err = EmptySubset("black box misclassifies every train point")
        log.warning("rerx: %s; falling back to dummy", err)
        g = Replay(X, seed, "rerx")
        g.fallback = "dummy"
        return g
    g = Replay(X[keep], seed, "rerx")
    g.kept_ = np.flatnonzero(keep)
    return g


def ssl_size(n_train: int, dataset_size: int) -> int:
    return max(0, min(10_000 - n_train, (dataset_size - n_train) // 2))


def fit_ssl(pool, n_train: int, seed=None) -> Generator:
    """Draw distinct unlabeled points from ``pool`` (the rows outside D^tr).

    ``indices_`` holds the drawn pool rows so callers can drop them from
    evaluation.
    """
    P = features(pool)
    L = ssl_size(n_train, n_train + P.shape[0])
    idx = np.sort(np.random.default_rng(seed).choice(P.shape[0], size=L, replace=False))
    g = Replay(P[idx], seed, "ssl")
    g.indices_ = idx
    return g
