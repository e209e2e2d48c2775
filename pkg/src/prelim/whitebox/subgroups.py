"""Single-box subgroup discovery: PRIM peeling and BestInterval.

Targets may be hard labels or class-1 scores in [0, 1]; the positive count of
a cover is the sum of its targets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..blackbox import presort
from ..core import canonical_order, kfold_indices, wracc
from ..errors import InvalidAlpha, InvalidBudget

PRIM_ALPHAS = (0.03, 0.05, 0.07, 0.1, 0.13, 0.16, 0.2)
MIN_SUPPORT = 10
MAX_FEATURE_BUDGET = 15
MAX_BI_PASSES = 1000


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box; -inf/inf mark an unrestricted side."""

    low: np.ndarray
    high: np.ndarray

    @classmethod
    def full(cls, m):
        return cls(np.full(m, -np.inf), np.full(m, np.inf))

    def contains(self, X):
        X = np.asarray(X, dtype=np.float64)
        return np.all((X >= self.low) & (X <= self.high), axis=1)

    def restricted(self):
        return np.flatnonzero(np.isfinite(self.low) | np.isfinite(self.high))

    @property
    def restricted_count(self) -> int:
        return int(self.restricted().size)

    def predict(self, X):
        return self.contains(X).astype(np.int64)

    def predict_proba(self, X):
        return self.predict(X).astype(np.float64)


def box_wracc(box: Box, X, targets) -> float:
    t = np.asarray(targets, dtype=np.float64)
    cov = box.contains(X)
    return wracc(int(cov.sum()), float(t[cov].sum()), t.size, float(t.sum()))


def _prepare(X, targets):
    X = np.ascontiguousarray(X, dtype=np.float64)
    t = np.ascontiguousarray(targets, dtype=np.float64)
    return X, t


# --- PRIM -------------------------------------------------------------------

def prim_fit(X, targets, alpha, min_support=MIN_SUPPORT) -> Box:
    """Peel ``alpha``-slabs greedily and return the best box on the trajectory."""
    if not 0 < alpha < 0.5:
        raise InvalidAlpha(f"alpha must lie in (0, 0.5), got {alpha}")
    X, t = _prepare(X, targets)
    N = t.size
    total = float(t.sum())
    feats, sides, bounds, ns, nps = kernels.prim_peel(
        X, t, presort(X), float(alpha), int(min_support), total)
    best_step, best = -1, 0.0  # the full box has WRAcc 0
    for s in range(feats.size):
        v = wracc(int(ns[s]), min(max(float(nps[s]), 0.0), int(ns[s])), N, total)
        if v > best:
            best_step, best = s, v
    box = Box.full(X.shape[1])
    for s in range(best_step + 1):
        if sides[s] == 0:
            box.low[feats[s]] = bounds[s]
        else:
            box.high[feats[s]] = bounds[s]
    return box


def _cv_pick(X, t, candidates, fit, seed, folds):
    """Candidate with the best mean held-out WRAcc; ties go to the earlier one."""
    o = canonical_order(X, t)
    X, t = X[o], t[o]
    rng = np.random.default_rng(seed)
    hard = np.all((t == 0) | (t == 1))
    scores = {c: [] for c in candidates}
    for tr, te in kfold_indices(t.size, folds, rng, labels=t if hard else None):
        for c in candidates:
            box = fit(X[tr], t[tr], c)
            scores[c].append(box_wracc(box, X[te], t[te]))
    means = {c: float(np.mean(v)) for c, v in scores.items()}
    best = candidates[0]
    for c in candidates[1:]:
        if means[c] > means[best]:
            best = c
    return best, means


def prim_cv_fit(X, targets, alphas=PRIM_ALPHAS, seed=None, folds=5):
    """Choose alpha by k-fold held-out WRAcc, then refit on everything."""
    X, t = _prepare(X, targets)
    alpha, means = _cv_pick(X, t, tuple(alphas), prim_fit, seed, folds)
    return prim_fit(X, t, alpha), {"alpha": alpha, "cv": means}


# --- BestInterval -----------------------------------------------------------

def best_interval_1d(x, scores):
    """Best closed interval of ``x`` by summed score.

    Returns (value, lo, hi, count) with ``lo``/``hi`` taken from ``x``; among
    equal values the interval covering more points wins. An empty selection
    is never returned.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    uniq, start = np.unique(xs, return_index=True)
    gsum = np.add.reduceat(scores[order], start)
    gcnt = np.diff(np.append(start, xs.size))
    P = np.concatenate(([0.0], np.cumsum(gsum)))
    C = np.concatenate(([0], np.cumsum(gcnt)))
    # earliest index of the running minimum of P[0..j-1]
    run = np.minimum.accumulate(P[:-1])
    new_min = np.concatenate(([True], P[1:-1] < run[:-1]))
    arg = np.maximum.accumulate(np.where(new_min, np.arange(P.size - 1), 0))
    vals = P[1:] - run
    cover = C[1:] - C[arg]
    best = np.lexsort((-cover, -vals))[0]
    i, j = arg[best], best
    return float(vals[best]), float(uniq[i]), float(uniq[j]), int(cover[best])


def _interval_scores(t, total, N):
    # n+ * N - n * N+ summed over the cover, i.e. N^2 * WRAcc
    return t * N - total


def bestinterval_fit(X, targets, feature_budget, max_passes=MAX_BI_PASSES) -> Box:
    """Greedy coordinate ascent on WRAcc, one feature interval at a time.

    Each pass scans every feature for its best interval with the other bounds
    fixed and applies the single most improving change. At most
    ``feature_budget`` features end up restricted.
    """
    if int(feature_budget) < 1:
        raise InvalidBudget(f"feature budget must be >= 1, got {feature_budget}")
    X, t = _prepare(X, targets)
    N, m = X.shape
    total = float(t.sum())
    s = _interval_scores(t, total, N)
    low = np.full(m, -np.inf)
    high = np.full(m, np.inf)
    inside = (X >= low) & (X <= high)
    current = 0.0
    # scores are N^2 * WRAcc; smaller gains are float noise from real targets
    tol = 1e-12 * N * N
    for _ in range(max_passes):
        restricted = np.isfinite(low) | np.isfinite(high)
        full_budget = restricted.sum() >= feature_budget
        best = None
        for f in range(m):
            if full_budget and not restricted[f]:
                continue
            others = np.all(np.delete(inside, f, axis=1), axis=1) if m > 1 else np.ones(N, bool)
            if not others.any():
                continue
            val, lo, hi, cnt = best_interval_1d(X[others, f], s[others])
            if best is None or val > best[0] or (val == best[0] and cnt > best[4]):
                xo = X[others, f]
                lo = -np.inf if lo <= xo.min() else lo
                hi = np.inf if hi >= xo.max() else hi
                best = (val, f, lo, hi, cnt)
        if best is None or not best[0] > current + tol:
            break
        current, f, lo, hi, _ = best
        low[f], high[f] = lo, hi
        inside[:, f] = (X[:, f] >= lo) & (X[:, f] <= hi)
    return Box(low, high)


def bi_budgets(m: int):
    """Five budget variants Z - j*ceil(Z/5) for Z = min(15, M), largest first."""
    z = min(MAX_FEATURE_BUDGET, int(m))
    step = math.ceil(z / 5)
    return tuple(z - j * step for j in range(5) if z - j * step > 0)


def bi_cv_fit(X, targets, baseline_budget=None, seed=None, folds=5):
    """Choose the feature budget by k-fold held-out WRAcc, then refit."""
    X, t = _prepare(X, targets)
    cands = bi_budgets(X.shape[1])
    if baseline_budget is not None:
        cands = tuple(c for c in cands if c <= baseline_budget) or (int(baseline_budget),)
    # ties go to the smaller budget
    cands = tuple(sorted(cands))
    budget, means = _cv_pick(X, t, cands, bestinterval_fit, seed, folds)
    return bestinterval_fit(X, t, budget), {"budget": budget, "cv": means}
