"""Uniform sampling inside the leaf regions of a random forest."""
import numpy as np

from .base import Generator, features


class RegionSampler(Generator):
    """Pick a region by train coverage, then a uniform point inside it.

    Region ``r`` spans ``low[r] < x <= high[r]``.
    """

    kind = "cmm"

    def __init__(self, low, high, coverage, seed=None):
        super().__init__(seed)
        self.low = np.asarray(low, dtype=np.float64)
        self.high = np.asarray(high, dtype=np.float64)
        cov = np.asarray(coverage, dtype=np.float64)
        self.prob = cov / cov.sum()
        self.m = self.low.shape[1]

    def sample_regions(self, L, rng=None):
        """Points and the region each was drawn from."""
        rng = self._stream(rng)
        region = rng.choice(self.prob.size, size=int(L), p=self.prob)
        lo, hi = self.low[region], self.high[region]
        # hi - span * u with u in [0, 1) stays inside (lo, hi]
        pts = hi - (hi - lo) * rng.random((int(L), self.m))
        return pts, region

    def _sample(self, L, rng):
        return self.sample_regions(L, rng)[0]


def forest_regions(trees, X):
    """Leaf boxes of every tree clipped to the data range, with train coverage."""
    gmin, gmax = X.min(axis=0), X.max(axis=0)
    lows, highs, cover = [], [], []
    for tree in trees:
        counts = np.bincount(tree.apply(X), minlength=tree.node_count)
        for leaf, lo, hi in tree.leaf_boxes():
            lows.append(np.maximum(lo, gmin))
            highs.append(np.minimum(hi, gmax))
            cover.append(counts[leaf])
    return np.array(lows), np.array(highs), np.array(cover, dtype=np.float64)


def fit_cmm(d, forest, seed=None) -> RegionSampler:
    X = features(d)
    trees = getattr(forest, "trees_", None) or [forest]
    low, high, cover = forest_regions(trees, X)
    keep = cover > 0
    return RegionSampler(low[keep], high[keep], cover[keep], seed)
