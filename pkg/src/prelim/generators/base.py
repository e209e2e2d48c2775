"""Common generator interface.

``sample(L)`` is a pure function of the fitted state and the seed: every call
starts a fresh stream, so two calls with the same ``L`` agree bit for bit and
smaller samples of the i.i.d. generators are prefixes of larger ones.
"""
from __future__ import annotations

import numpy as np

from ..core import Dataset


def features(d) -> np.ndarray:
    X = d.X if isinstance(d, Dataset) else d
    return np.ascontiguousarray(np.asarray(X, dtype=np.float64))


def labels(d, y=None):
    if y is not None:
        return np.asarray(y)
    return d.y if isinstance(d, Dataset) else None


class Generator:
    kind = "base"
    # replaying generators emit a fixed number of points
    fixed_size = None

    def __init__(self, seed=None):
        self.seed = seed
        self.fallback = None

    def _stream(self, rng):
        return rng if rng is not None else np.random.default_rng(self.seed)

    def sample(self, L: int, rng=None) -> np.ndarray:
        L = int(L)
        if L < 0:
            raise ValueError("L must be non-negative")
        out = self._sample(L, self._stream(rng))
        return np.ascontiguousarray(out, dtype=np.float64).reshape(L, self.m)

    def _sample(self, L, rng):
        raise NotImplementedError

    def describe(self) -> dict:
        info = {"kind": self.kind}
        if self.fallback:
            info["fallback"] = self.fallback
        return info


class Replay(Generator):
    """Emits stored points in order, cycling when more are requested."""

    kind = "dummy"

    def __init__(self, points, seed=None, kind=None):
        super().__init__(seed)
        self.points = np.ascontiguousarray(points, dtype=np.float64)
        self.m = self.points.shape[1]
        self.fixed_size = self.points.shape[0]
        if kind:
            self.kind = kind

    def _sample(self, L, rng):
        if self.fixed_size == 0:
            if L:
                raise ValueError("nothing to replay")
            return np.empty((0, self.m))
        return self.points[np.arange(L) % self.fixed_size]
