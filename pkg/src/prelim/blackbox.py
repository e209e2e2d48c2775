"""Tree ensembles used as the labelling oracle: CART, random forest, boosting.

All models expose ``predict`` (hard labels, score >= 0.5) and ``predict_proba``
(class-1 score).
"""
from __future__ import annotations

import logging
import math

import numpy as np

from . import kernels
from .core import accuracy, balanced_accuracy, kfold_indices
from .errors import DimensionMismatch, InvalidHyperparameter

log = logging.getLogger(__name__)

# search space for boosted trees
BT_SPACE = {
    "n_estimators": (10, 990),
    "learning_rate": (0.0001, 0.2),
    "gamma": (0.0, 0.4),
    "subsample": (0.5, 1.0),
}
BT_MAX_DEPTH = 6
BT_BUDGET = 25
RF_TREES = 100
CV_FOLDS = 5


def _as_matrix(X):
    return np.ascontiguousarray(np.asarray(X, dtype=np.float64))


def presort(X):
    """Per-feature stable argsort, shape (M, N)."""
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.int64))


def _check_dims(X, m):
    X = _as_matrix(X)
    if X.ndim != 2 or X.shape[1] != m:
        raise DimensionMismatch(f"expected {m} columns, got {X.shape}")
    return X


class _TreeArrays:
    """Flat node arrays shared by classification and regression trees."""

    def _set_arrays(self, res, value):
        self.feature_ = res["feature"]
        self.threshold_ = res["threshold"]
        self.left_ = res["left"]
        self.right_ = res["right"]
        self.sum1_ = res["sum1"]
        self.sum2_ = res["sum2"]
        self.n_node_ = res["n_node"]
        self.depth_ = res["depth"]
        self.gain_ = res["gain"]
        self.expansion_ = res["expansion"]
        self.value_ = value

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature_ < 0))

    @property
    def node_count(self) -> int:
        return self.feature_.size

    def apply(self, X):
        X = _check_dims(X, self.n_features_)
        return kernels.apply_tree(X, self.feature_, self.threshold_, self.left_, self.right_)

    def leaves(self):
        return np.flatnonzero(self.feature_ < 0)

    def leaf_boxes(self):
        """(leaf id, lower bounds, upper bounds) for every leaf.

        A point reaches the leaf iff lower < x <= upper on every feature.
        """
        m = self.n_features_
        out = []
        stack = [(0, np.full(m, -np.inf), np.full(m, np.inf))]
        while stack:
            node, lo, hi = stack.pop()
            f = self.feature_[node]
            if f < 0:
                out.append((node, lo, hi))
                continue
            t = self.threshold_[node]
            lhi = hi.copy()
            lhi[f] = min(hi[f], t)
            rlo = lo.copy()
            rlo[f] = max(lo[f], t)
            stack.append((self.right_[node], rlo, hi))
            stack.append((self.left_[node], lo, lhi))
        out.sort(key=lambda r: r[0])
        return out

    def same_structure(self, other) -> bool:
        return (
            np.array_equal(self.feature_, other.feature_)
            and np.array_equal(self.threshold_, other.threshold_)
            and np.array_equal(self.left_, other.left_)
            and np.array_equal(self.right_, other.right_)
        )


def _grow(X, s1, s2, order, mask, criterion, *, max_leaves=None, max_depth=None,
          min_samples_split=2, min_samples_leaf=1, min_child_weight=0.0,
          reg_lambda=0.0, gamma=0.0, max_features=None, rng=None):
    m = X.shape[1]
    n_inc = int(mask.sum())
    if max_features is not None and max_features < m:
        cap = max(2 * n_inc - 1, 1)
        draws = np.ascontiguousarray(rng.random((cap, m)).argsort(axis=1).astype(np.int64))
        mf = int(max_features)
    else:
        draws = np.zeros((1, m), dtype=np.int64)
        mf = m
    return kernels.grow_tree(
        X, s1, s2, order, mask, criterion,
        -1 if max_leaves is None else int(max_leaves),
        -1 if max_depth is None else int(max_depth),
        int(min_samples_split), int(min_samples_leaf),
        float(min_child_weight), float(reg_lambda), float(gamma), draws, mf,
    )


class DecisionTree(_TreeArrays):
    """Weighted-Gini CART grown best-first.

    Parameters
    ----------
    max_leaves : int or None
        Leaf cap; the frontier leaf with the largest impurity decrease is
        expanded first.
    min_samples_internal : int or None
        Internal nodes must have seen more than this many training rows.
    max_features : int or None
        Features examined per node (random subset), as in random forests.
    """

    def __init__(self, max_leaves=None, min_samples_internal=None, max_depth=None,
                 min_samples_leaf=1, max_features=None, random_state=None):
        self.max_leaves = max_leaves
        self.min_samples_internal = min_samples_internal
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.random_state = random_state

    def fit(self, X, y, sample_weight=None, order=None, mask=None):
        X = _as_matrix(X)
        y = np.asarray(y, dtype=np.float64)
        w = np.ones(X.shape[0]) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
        if mask is None:
            mask = (w > 0).astype(np.uint8)
        if order is None:
            order = presort(X)
        msi = self.min_samples_internal
        min_split = 2 if msi is None else int(msi) + 1
        res = _grow(
            X, np.ascontiguousarray(w * y), np.ascontiguousarray(w), order, mask, kernels.GINI,
            max_leaves=self.max_leaves, max_depth=self.max_depth,
            min_samples_split=min_split, min_samples_leaf=self.min_samples_leaf,
            max_features=self.max_features, rng=np.random.default_rng(self.random_state),
        )
        with np.errstate(invalid="ignore", divide="ignore"):
            value = np.where(res["sum2"] > 0, res["sum1"] / res["sum2"], 0.0)
        self.n_features_ = X.shape[1]
        self._set_arrays(res, value)
        return self

    def predict_proba(self, X):
        return self.value_[self.apply(X)]

    def predict(self, X):
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def truncated(self, n_leaves: int) -> "DecisionTree":
        """The tree best-first growth would have produced with ``n_leaves`` cap."""
        n_split = max(0, min(int(n_leaves) - 1, self.expansion_.size))
        keep_split = self.expansion_[:n_split]
        alive = np.zeros(self.node_count, dtype=bool)
        alive[0] = True
        for node in keep_split:
            alive[self.left_[node]] = True
            alive[self.right_[node]] = True
        # renumber surviving nodes in original order
        new_id = np.cumsum(alive) - 1
        split_set = np.zeros(self.node_count, dtype=bool)
        split_set[keep_split] = True
        idx = np.flatnonzero(alive)
        t = DecisionTree(n_leaves, self.min_samples_internal, self.max_depth,
                         self.min_samples_leaf, self.max_features, self.random_state)
        t.n_features_ = self.n_features_
        feat = np.where(split_set[idx], self.feature_[idx], -1)
        left = np.where(split_set[idx], new_id[np.maximum(self.left_[idx], 0)], -1)
        right = np.where(split_set[idx], new_id[np.maximum(self.right_[idx], 0)], -1)
        res = {
            "feature": feat.astype(np.int64),
            "threshold": np.where(split_set[idx], self.threshold_[idx], 0.0),
            "left": left.astype(np.int64),
            "right": right.astype(np.int64),
            "sum1": self.sum1_[idx],
            "sum2": self.sum2_[idx],
            "n_node": self.n_node_[idx],
            "depth": self.depth_[idx],
            "gain": np.where(split_set[idx], self.gain_[idx], 0.0),
            "expansion": new_id[keep_split].astype(np.int64),
        }
        t._set_arrays(res, self.value_[idx])
        return t


def cart_fit(X, y, sample_weight=None, **constraints) -> DecisionTree:
    return DecisionTree(**constraints).fit(X, y, sample_weight)


class RandomForest:
    """Bootstrap forest of Gini trees; score is the mean of tree leaf scores."""

    def __init__(self, n_trees=RF_TREES, max_features=None, bootstrap=True, random_state=None):
        self.n_trees = n_trees
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.random_state = random_state

    def fit(self, X, y, sample_weight=None):
        X = _as_matrix(X)
        y = np.asarray(y, dtype=np.float64)
        n, m = X.shape
        w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
        order = presort(X)
        mf = self.max_features if self.max_features is not None else math.ceil(math.sqrt(m))
        seeds = np.random.SeedSequence(self.random_state).spawn(self.n_trees)
        self.trees_ = []
        for ss in seeds:
            rng = np.random.default_rng(ss)
            if self.bootstrap:
                counts = np.bincount(rng.integers(0, n, n), minlength=n).astype(np.float64)
            else:
                counts = np.ones(n)
            tree = DecisionTree(max_features=mf, random_state=rng.integers(2**63))
            tree.fit(X, y, counts * w, order=order, mask=(counts > 0).astype(np.uint8))
            self.trees_.append(tree)
        self.n_features_ = m
        return self

    def tree_scores(self, X):
        X = _check_dims(X, self.n_features_)
        return np.stack([t.predict_proba(X) for t in self.trees_])

    def predict_proba(self, X):
        X = _check_dims(X, self.n_features_)
        total = np.zeros(X.shape[0])
        for t in self.trees_:
            total += t.predict_proba(X)
        return total / len(self.trees_)

    def predict(self, X):
        return (self.predict_proba(X) >= 0.5).astype(np.int64)


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


class _NewtonTree(_TreeArrays):
    def predict_value(self, X):
        return self.value_[self.apply(X)]


class BoostedTrees:
    """Logistic-loss gradient boosting with second-order leaf weights.

    ``gamma`` is the minimum split gain; leaves use -G / (H + reg_lambda).
    """

    def __init__(self, n_estimators=100, learning_rate=0.1, gamma=0.0, subsample=1.0,
                 max_depth=BT_MAX_DEPTH, reg_lambda=1.0, min_child_weight=1.0, random_state=None):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.gamma = gamma
        self.subsample = subsample
        self.max_depth = max_depth
        self.reg_lambda = reg_lambda
        self.min_child_weight = min_child_weight
        self.random_state = random_state

    def fit(self, X, y, sample_weight=None):
        X = _as_matrix(X)
        y = np.asarray(y, dtype=np.float64)
        n, m = X.shape
        w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
        rate = float(np.clip(np.sum(w * y) / np.sum(w), 1e-6, 1 - 1e-6))
        self.base_score_ = math.log(rate / (1 - rate))
        order = presort(X)
        rng = np.random.default_rng(self.random_state)
        margin = np.full(n, self.base_score_)
        full = np.ones(n, dtype=np.uint8)
        self.trees_ = []
        self.train_loss_ = []
        for _ in range(int(self.n_estimators)):
            p = _sigmoid(margin)
            g = np.ascontiguousarray(w * (p - y))
            h = np.ascontiguousarray(w * p * (1 - p))
            if self.subsample < 1.0:
                mask = (rng.random(n) < self.subsample).astype(np.uint8)
                if not mask.any():
                    mask[rng.integers(n)] = 1
            else:
                mask = full
            res = _grow(X, g, h, order, mask, kernels.NEWTON, max_depth=self.max_depth,
                        min_samples_split=2, min_samples_leaf=1,
                        min_child_weight=self.min_child_weight, reg_lambda=self.reg_lambda,
                        gamma=self.gamma)
            tree = _NewtonTree()
            tree.n_features_ = m
            tree._set_arrays(res, -res["sum1"] / (res["sum2"] + self.reg_lambda))
            margin = margin + self.learning_rate * tree.value_[tree.apply(X)]
            self.trees_.append(tree)
            self.train_loss_.append(logistic_loss(margin, y, w))
        self.n_features_ = m
        return self

    def decision_function(self, X):
        X = _check_dims(X, self.n_features_)
        total = np.zeros(X.shape[0])
        for t in self.trees_:
            total += t.predict_value(X)
        return self.base_score_ + self.learning_rate * total

    def predict_proba(self, X):
        return _sigmoid(self.decision_function(X))

    def predict(self, X):
        return (self.predict_proba(X) >= 0.5).astype(np.int64)


def logistic_loss(margin, y, w=None):
    # log(1 + e^m) - y m, computed stably
    loss = np.logaddexp(0.0, margin) - y * margin
    return float(np.mean(loss) if w is None else np.sum(w * loss) / np.sum(w))


# --- model selection --------------------------------------------------------

def _score(pred, truth, balanced):
    return balanced_accuracy(pred, truth) if balanced else accuracy(pred, truth)


def _cv_score(make, X, y, w, seed, folds=CV_FOLDS, balanced=False):
    rng = np.random.default_rng(seed)
    scores = []
    for tr, te in kfold_indices(len(y), folds, rng, labels=y):
        model = make().fit(X[tr], y[tr], None if w is None else w[tr])
        scores.append(_score(model.predict(X[te]), y[te], balanced))
    return float(np.mean(scores))


def _child_seeds(seed, k):
    return [int(c.generate_state(1)[0]) for c in np.random.SeedSequence(seed).spawn(k)]


def rf_grid(m: int):
    """Candidate max_features values {2, ceil(sqrt(M)), M} restricted to [1, M]."""
    return sorted({min(max(v, 1), m) for v in (2, math.ceil(math.sqrt(m)), m)})


def rf_fit(X, y, sample_weight=None, seed=None, n_trees=RF_TREES, max_features=None,
           folds=CV_FOLDS) -> RandomForest:
    """Random forest; ``max_features`` chosen by k-fold CV when not given."""
    X = _as_matrix(X)
    y = np.asarray(y)
    cv_seed, fit_seed = _child_seeds(seed, 2)
    balanced = sample_weight is not None
    results = {}
    if max_features is None:
        for mf in rf_grid(X.shape[1]):
            results[mf] = _cv_score(
                lambda: RandomForest(n_trees, mf, random_state=fit_seed),
                X, y, sample_weight, cv_seed, folds, balanced)
        max_features = max(results, key=lambda k: (results[k], -k))
    model = RandomForest(n_trees, max_features, random_state=fit_seed).fit(X, y, sample_weight)
    model.cv_results_ = results
    return model


def draw_bt_params(rng):
    lo, hi = BT_SPACE["n_estimators"]
    return {
        "n_estimators": int(rng.integers(lo, hi + 1)),
        "learning_rate": float(rng.uniform(*BT_SPACE["learning_rate"])),
        "gamma": float(rng.uniform(*BT_SPACE["gamma"])),
        "subsample": float(rng.uniform(*BT_SPACE["subsample"])),
    }


def check_bt_params(params):
    for key, (lo, hi) in BT_SPACE.items():
        if key in params and not lo <= params[key] <= hi:
            raise InvalidHyperparameter(f"{key}={params[key]} outside [{lo}, {hi}]")
    if params.get("max_depth", BT_MAX_DEPTH) != BT_MAX_DEPTH:
        raise InvalidHyperparameter("max_depth is fixed at 6")


def bt_fit(X, y, sample_weight=None, seed=None, space=None, budget=BT_BUDGET,
           folds=CV_FOLDS) -> BoostedTrees:
    """Boosted trees via random search with k-fold CV.

    ``space`` may be a list of explicit parameter dicts (each validated) that
    replaces the random draws.
    """
    X = _as_matrix(X)
    y = np.asarray(y)
    draw_seed, cv_seed, fit_seed = _child_seeds(seed, 3)
    if space is None:
        rng = np.random.default_rng(draw_seed)
        space = [draw_bt_params(rng) for _ in range(budget)]
    for params in space:
        check_bt_params(params)
    balanced = sample_weight is not None
    if len(space) == 1:
        best = dict(space[0])
        scores = []
    else:
        scores = [
            _cv_score(lambda p=p: BoostedTrees(**p, random_state=fit_seed),
                      X, y, sample_weight, cv_seed, folds, balanced)
            for p in space
        ]
        best = dict(space[int(np.argmax(scores))])
    model = BoostedTrees(**best, random_state=fit_seed).fit(X, y, sample_weight)
    model.search_ = list(zip(space, scores))
    return model


def fit_blackbox(kind: str, X, y, sample_weight=None, seed=None, **options):
    kind = kind.upper()
    if kind == "RF":
        return rf_fit(X, y, sample_weight, seed=seed, **options)
    if kind == "BT":
        return bt_fit(X, y, sample_weight, seed=seed, **options)
    raise InvalidHyperparameter(f"unknown black box {kind!r}")


def predict(model, X):
    return model.predict(X)


def predict_proba(model, X):
    return model.predict_proba(X)
