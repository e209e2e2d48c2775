"""Neighbor-based generators: vva, smote, adasyn and munge."""
import logging

import numpy as np
from scipy.spatial import cKDTree

from ..errors import NoOppositePair, TooFewPoints
from .base import Generator, Replay, features

log = logging.getLogger(__name__)

VVA_RATIO = 0.2
SMOTE_K = 5
ADASYN_K_STEP = 5
ADASYN_K_MAX = 20
MUNGE_P = 0.5
MUNGE_S = 5.0


def _knn(X, k):
    """Indices of the k nearest other points of every row."""
    _, idx = cKDTree(X).query(X, k=k + 1)
    # with duplicate rows the point itself need not come first
    own = idx == np.arange(X.shape[0])[:, None]
    drop = np.where(own.any(axis=1), own.argmax(axis=1), k)
    keep = np.ones_like(idx, dtype=bool)
    keep[np.arange(idx.shape[0]), drop] = False
    return idx[keep].reshape(idx.shape[0], k)


def _allocate(shares, L):
    """Integer quotas summing to L, largest remainders first (ties by index)."""
    raw = shares / shares.sum() * L
    q = np.floor(raw).astype(np.int64)
    rest = L - int(q.sum())
    if rest > 0:
        order = np.lexsort((np.arange(raw.size), -(raw - q)))
        q[order[:rest]] += 1
    return q


class SegmentSampler(Generator):
    """Uniform points on segments ``a[i] -> b[i]``, visiting segments in order."""

    kind = "vva"

    def __init__(self, a, b, seed=None):
        super().__init__(seed)
        self.a = np.asarray(a, dtype=np.float64)
        self.b = np.asarray(b, dtype=np.float64)
        self.m = self.a.shape[1]

    def _sample(self, L, rng):
        pair = np.arange(L) % self.a.shape[0]
        u = rng.random((L, 1))
        return self.a[pair] + u * (self.b[pair] - self.a[pair])


def fit_vva(d, bb, seed=None, ratio=VVA_RATIO) -> Generator:
    """Interpolate between the least certain points and their nearest
    neighbor of the opposite predicted class."""
    X = features(d)
    scores = np.asarray(bb.predict_proba(X), dtype=np.float64)
    pred = scores >= 0.5
    if pred.all() or not pred.any():
        err = NoOppositePair("black box predicts a single class on the train set")
        log.warning("vva: %s; falling back to dummy", err)
        g = Replay(X, seed, "vva")
        g.fallback = "dummy"
        return g
    nv = max(1, int(round(ratio * X.shape[0])))
    chosen = np.argsort(np.abs(scores - 0.5), kind="stable")[:nv]
    partner = np.empty(nv, dtype=np.int64)
    dist = np.empty(nv)
    for cls in (False, True):
        pool = np.flatnonzero(pred != cls)
        mine = pred[chosen] == cls
        if not mine.any():
            continue
        dd, ii = cKDTree(X[pool]).query(X[chosen[mine]], k=1)
        partner[mine] = pool[ii]
        dist[mine] = dd
    order = np.argsort(dist, kind="stable")
    g = SegmentSampler(X[chosen[order]], X[partner[order]], seed)
    g.pairs_ = np.stack([chosen[order], partner[order]], axis=1)
    return g


class Interpolator(Generator):
    """SMOTE-style interpolation ``gap * x + (1 - gap) * x'`` toward a neighbor.

    ``gap="point"`` draws one gap per new point so outputs stay on the segment;
    ``gap="coordinate"`` draws one per coordinate.
    """

    kind = "smote"

    def __init__(self, X, neighbors, quotas=None, seed=None, gap="point", kind="smote"):
        super().__init__(seed)
        self.X = X
        self.neighbors = neighbors
        self.quotas = quotas
        self.gap = gap
        self.kind = kind
        self.m = X.shape[1]

    def _sources(self, L, rng):
        if self.quotas is None:
            return rng.integers(self.X.shape[0], size=L)
        q = _allocate(self.quotas, L)
        return np.repeat(np.arange(self.X.shape[0]), q)

    def sample_pairs(self, L, rng=None):
        """Points plus the (source, neighbor) row pair behind each."""
        rng = self._stream(rng)
        src = self._sources(int(L), rng)
        nb = self.neighbors[src, rng.integers(self.neighbors.shape[1], size=src.size)]
        shape = (src.size, 1) if self.gap == "point" else (src.size, self.m)
        gap = rng.random(shape)
        pts = gap * self.X[src] + (1 - gap) * self.X[nb]
        return pts, src, nb

    def _sample(self, L, rng):
        return self.sample_pairs(L, rng)[0]


def fit_smote_family(d, kind="smote", k=SMOTE_K, seed=None, gap="point") -> Generator:
    """smote or adasyn with the train points as the minority class.

    For adasyn the majority class is an equal number of uniform points over
    the train bounding box; hardness of each train point is the majority share
    among its k neighbors. If no point has a majority neighbor, k grows by 5
    up to min(20, N - 1) before falling back to smote.
    """
    X = features(d)
    n = X.shape[0]
    if n <= k:
        raise TooFewPoints(f"need more than {k} points, got {n}")
    neighbors = _knn(X, k)
    if kind == "smote":
        return Interpolator(X, neighbors, seed=seed, gap=gap)
    if kind != "adasyn":
        raise ValueError(f"not a smote-family generator: {kind!r}")
    rng = np.random.default_rng(seed)
    low, high = X.min(axis=0), X.max(axis=0)
    majority = low + (high - low) * rng.random(X.shape)
    both = np.vstack([X, majority])
    kk = k
    limit = min(ADASYN_K_MAX, n - 1)
    while True:
        nb = _knn(both, kk)[:n]
        hardness = np.mean(nb >= n, axis=1)
        if hardness.sum() > 0:
            g = Interpolator(X, neighbors, quotas=hardness, seed=seed, gap=gap, kind="adasyn")
            g.k_ = kk
            return g
        if kk >= limit:
            break
        kk = min(kk + ADASYN_K_STEP, limit)
    log.warning("adasyn: no train point has a majority neighbor; falling back to smote")
    g = Interpolator(X, neighbors, seed=seed, gap=gap, kind="adasyn")
    g.fallback = "smote"
    return g


class Munge(Generator):
    kind = "munge"

    def __init__(self, X, p=MUNGE_P, s=MUNGE_S, seed=None):
        super().__init__(seed)
        if X.shape[0] < 2:
            raise TooFewPoints("munge needs at least two points")
        self.X = X
        self.p = float(p)
        self.s = float(s)
        nb = _knn(X, 1)[:, 0]
        self.spread = np.linalg.norm(X - X[nb], axis=1) / self.s
        self.m = X.shape[1]

    def _sample(self, L, rng):
        src = rng.integers(self.X.shape[0], size=L)
        base = self.X[src]
        swap = rng.random((L, self.m)) < self.p
        noise = rng.standard_normal((L, self.m)) * self.spread[src, None]
        return np.where(swap, base + noise, base)


def fit_munge(d, p=MUNGE_P, s=MUNGE_S, seed=None) -> Munge:
    return Munge(features(d), p, s, seed)
