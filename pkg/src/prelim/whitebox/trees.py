"""Decision-tree white boxes: DT, DTcomp and DTcv."""
import numpy as np

from ..blackbox import DecisionTree, presort
from ..core import accuracy, balanced_accuracy, canonical_order, kfold_indices

DT_MIN_INTERNAL = 10
DTCOMP_LEAVES = 8
DTCV_GRID = (2, 4, 8, 16, 32, 64, 128)
TREE_VARIANTS = ("DT", "DTcomp", "DTcv")


def capped_grid(grid, cap):
    """Grid values not above ``cap``; ``cap`` itself joins when nothing else fits below it."""
    if cap is None:
        return tuple(grid)
    cap = int(cap)
    vals = sorted({g for g in grid if g <= cap} | ({cap} if cap < max(grid) else set()))
    return tuple(vals) if vals else (cap,)


def select_leaves(X, y, grid, sample_weight=None, seed=None, folds=5):
    """Pick the leaf cap by k-fold CV accuracy (balanced accuracy when weighted).

    One tree is grown per fold with the largest cap; smaller caps are read off
    as prefixes of its best-first expansion order.
    """
    y = np.asarray(y)
    balanced = sample_weight is not None
    rng = np.random.default_rng(seed)
    scores = {g: [] for g in grid}
    for tr, te in kfold_indices(len(y), folds, rng, labels=y):
        w = None if sample_weight is None else sample_weight[tr]
        full = DecisionTree(max_leaves=max(grid)).fit(X[tr], y[tr], w)
        for g in grid:
            pred = full.truncated(g).predict(X[te])
            s = balanced_accuracy(pred, y[te]) if balanced else accuracy(pred, y[te])
            scores[g].append(s)
    means = {g: float(np.mean(v)) for g, v in scores.items()}
    best = max(grid, key=lambda g: (means[g], -g))
    return best, means


def dt_variant_fit(X, y, variant, baseline_leaf_count=None, sample_weight=None, seed=None,
                   folds=5):
    """Fit one of the tree variants. Returns ``(tree, info)``."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    o = canonical_order(X, y if sample_weight is None else np.column_stack([y, sample_weight]))
    X, y = np.ascontiguousarray(X[o]), y[o]
    sample_weight = None if sample_weight is None else np.asarray(sample_weight)[o]
    order = presort(X)
    if variant == "DT":
        tree = DecisionTree(min_samples_internal=DT_MIN_INTERNAL)
        return tree.fit(X, y, sample_weight, order=order), {}
    if variant == "DTcomp":
        return DecisionTree(max_leaves=DTCOMP_LEAVES).fit(X, y, sample_weight, order=order), {}
    if variant == "DTcv":
        grid = capped_grid(DTCV_GRID, baseline_leaf_count)
        best, means = select_leaves(X, y, grid, sample_weight, seed, folds)
        tree = DecisionTree(max_leaves=best).fit(X, y, sample_weight, order=order)
        return tree, {"max_leaves": best, "cv": means}
    raise ValueError(f"not a tree variant: {variant!r}")
