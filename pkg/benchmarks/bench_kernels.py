"""Time the compiled kernels against the numpy fallback and check they agree.

    python benchmarks/bench_kernels.py [--rows 100000] [--features 8] [--repeat 3]
"""
import argparse
import time

import numpy as np

from prelim.blackbox import presort
from prelim.kernels import GINI, NEWTON, get_backend


def _best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(n, m, seed):
    rng = np.random.default_rng(seed)
    X = rng.random((n, m))
    y = ((X[:, 0] + X[:, 1] + 0.3 * rng.standard_normal(n)) > 1).astype(np.float64)
    order = presort(X)
    mask = np.ones(n, dtype=np.uint8)
    draws = np.zeros((1, m), dtype=np.int64)
    p = np.full(n, 0.5)
    return {
        "gini tree": lambda k: k.grow_tree(X, y, np.ones(n), order, mask, GINI, -1, -1, 2, 1,
                                           0.0, 0.0, 0.0, draws, m),
        "newton tree depth 6": lambda k: k.grow_tree(X, p - y, p * (1 - p), order, mask, NEWTON,
                                                     -1, 6, 2, 1, 1.0, 1.0, 0.0, draws, m),
        "prim peel a=0.05": lambda k: k.prim_peel(X, y, order, 0.05, 10, float(y.sum())),
    }, X


def _same(a, b):
    if isinstance(a, dict):
        return all(np.array_equal(a[key], b[key]) for key in a)
    return all(np.array_equal(u, v) for u, v in zip(a, b))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=100_000)
    ap.add_argument("--features", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    fast, slow = get_backend("cython"), get_backend("python")
    table, X = cases(args.rows, args.features, args.seed)
    print(f"{'kernel':<22}{'cython s':>10}{'python s':>10}{'speedup':>9}  identical")
    tree = None
    for name, fn in table.items():
        tc, rc = _best_of(lambda: fn(fast), args.repeat)
        tp, rp = _best_of(lambda: fn(slow), args.repeat)
        if name == "gini tree":
            tree = rc
        print(f"{name:<22}{tc:>10.4f}{tp:>10.4f}{tp / tc:>9.1f}  {_same(rc, rp)}")
    args_apply = (X, tree["feature"], tree["threshold"], tree["left"], tree["right"])
    tc, rc = _best_of(lambda: fast.apply_tree(*args_apply), args.repeat)
    tp, rp = _best_of(lambda: slow.apply_tree(*args_apply), args.repeat)
    print(f"{'apply full tree':<22}{tc:>10.4f}{tp:>10.4f}{tp / tc:>9.1f}  {np.array_equal(rc, rp)}")


if __name__ == "__main__":
    main()
