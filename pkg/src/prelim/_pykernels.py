"""Pure numpy versions of the compiled kernels.

Same contracts and the same floating point operation order as ``_ckernels``,
so results agree exactly; used when the extension is unavailable or when
``PRELIM_PURE_PYTHON=1`` is set.
"""
import heapq
import math

import numpy as np

GINI = 0
NEWTON = 1


def _best_split(X, s1, s2, work, a, b, node, depth, p):
    n = b - a
    seg0 = work[0, a:b]
    S1 = np.cumsum(s1[seg0])[-1] if n else 0.0
    S2 = np.cumsum(s2[seg0])[-1] if n else 0.0
    S1, S2 = float(S1), float(S2)
    if n < p["min_split"] or n < 2 * p["min_leaf"]:
        return S1, S2, None
    if p["max_depth"] >= 0 and depth >= p["max_depth"]:
        return S1, S2, None
    if p["criterion"] == GINI:
        if not (S1 > 0.0 and S1 < S2):
            return S1, S2, None
        pterm = S1 * (S2 - S1) / S2
    else:
        pterm = S1 * S1 / (S2 + p["lam"])
    M = X.shape[1]
    if p["max_features"] < M:
        candidates = p["draws"][node]
    else:
        candidates = range(M)
    best = None
    used = 0
    nl = np.arange(1, n)
    for f in candidates:
        if p["max_features"] < M and used >= p["max_features"]:
            break
        f = int(f)
        seg = work[f, a:b]
        xs = X[seg, f]
        if xs[0] == xs[-1]:
            continue
        used += 1
        L1 = np.cumsum(s1[seg])[:-1]
        L2 = np.cumsum(s2[seg])[:-1]
        R1 = S1 - L1
        R2 = S2 - L2
        valid = (xs[1:] > xs[:-1]) & (nl >= p["min_leaf"]) & (n - nl >= p["min_leaf"])
        with np.errstate(divide="ignore", invalid="ignore"):
            if p["criterion"] == GINI:
                valid &= (L2 > 0.0) & (R2 > 0.0)
                g = ((pterm - L1 * (L2 - L1) / L2) - R1 * (R2 - R1) / R2) * 2.0
            else:
                lam = p["lam"]
                valid &= (L2 >= p["mcw"]) & (R2 >= p["mcw"])
                g = ((L1 * L1 / (L2 + lam) + R1 * R1 / (R2 + lam)) - pterm) * 0.5
        if not valid.any():
            continue
        g = np.where(valid, g, -np.inf)
        k = int(np.argmax(g))
        gk = float(g[k])
        if best is None or gk > best[0] or (gk == best[0] and f < best[1]):
            xv, xn = float(xs[k]), float(xs[k + 1])
            thr = (xv + xn) * 0.5
            if not thr < xn:
                thr = xv
            best = (gk, f, thr, k + 1)
    if best is None:
        return S1, S2, None
    if p["criterion"] == NEWTON and not (best[0] > p["gamma"] and best[0] > 0.0):
        return S1, S2, None
    return S1, S2, best


def grow_tree(X, s1, s2, order, mask, criterion, max_leaves, max_depth, min_samples_split,
              min_samples_leaf, min_child_weight, reg_lambda, gamma, feature_draws, max_features):
    n, M = X.shape
    keep = mask.astype(bool)
    work = np.stack([order[f][keep[order[f]]] for f in range(M)]) if M else np.empty((0, 0), int)
    n_inc = work.shape[1]
    params = {
        "criterion": criterion,
        "max_depth": max_depth,
        "min_split": min_samples_split,
        "min_leaf": min_samples_leaf,
        "mcw": min_child_weight,
        "lam": reg_lambda,
        "gamma": gamma,
        "draws": feature_draws,
        "max_features": max_features if max_features > 0 else M,
    }
    feature, threshold, left, right = [-1], [0.0], [-1], [-1]
    sum1, sum2, gain, depth = [0.0], [0.0], [0.0], [0]
    start, end = [0], [n_inc]
    cand = [None]
    expansion = []
    heap = []

    def evaluate(node):
        S1, S2, best = _best_split(X, s1, s2, work, start[node], end[node], node, depth[node], params)
        sum1[node], sum2[node], cand[node] = S1, S2, best
        if best is not None:
            heapq.heappush(heap, (-best[0], node))

    if n_inc > 0:
        evaluate(0)
    n_leaves = 1
    goes_left = np.zeros(n, dtype=bool)
    while heap and (max_leaves < 0 or n_leaves < max_leaves):
        _, node = heapq.heappop(heap)
        g, f, thr, nleft = cand[node]
        a, b = start[node], end[node]
        seg = work[f, a:b]
        goes_left[seg] = False
        goes_left[seg[:nleft]] = True
        block = work[:, a:b]
        perm = np.argsort(~goes_left[block], axis=1, kind="stable")
        work[:, a:b] = np.take_along_axis(block, perm, axis=1)
        lc = len(feature)
        rc = lc + 1
        for _ in range(2):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            sum1.append(0.0)
            sum2.append(0.0)
            gain.append(0.0)
            depth.append(depth[node] + 1)
            cand.append(None)
        start.extend([a, a + nleft])
        end.extend([a + nleft, b])
        feature[node], threshold[node], gain[node] = f, thr, g
        left[node], right[node] = lc, rc
        expansion.append(node)
        n_leaves += 1
        evaluate(lc)
        evaluate(rc)
    return {
        "feature": np.asarray(feature, dtype=np.int64),
        "threshold": np.asarray(threshold, dtype=np.float64),
        "left": np.asarray(left, dtype=np.int64),
        "right": np.asarray(right, dtype=np.int64),
        "sum1": np.asarray(sum1, dtype=np.float64),
        "sum2": np.asarray(sum2, dtype=np.float64),
        "n_node": np.asarray(end, dtype=np.int64) - np.asarray(start, dtype=np.int64),
        "depth": np.asarray(depth, dtype=np.int64),
        "gain": np.asarray(gain, dtype=np.float64),
        "expansion": np.asarray(expansion, dtype=np.int64),
    }


def apply_tree(X, feature, threshold, left, right):
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int64)
    active = np.flatnonzero(feature[node] >= 0)
    while active.size:
        cur = node[active]
        f = feature[cur]
        go_left = X[active, f] <= threshold[cur]
        node[active] = np.where(go_left, left[cur], right[cur])
        active = active[feature[node[active]] >= 0]
    return node


def prim_peel(X, t, order, alpha, min_support, nplus_total):
    n, M = X.shape
    N = float(n)
    Np = float(nplus_total)
    inbox = np.ones(n, dtype=bool)
    cur_n = n
    cur_np = Np
    feats, sides, bounds, ns, nps = [], [], [], [], []
    while cur_n > min_support:
        k = max(int(math.ceil(alpha * cur_n)), 1)
        best = None
        for j in range(M):
            idx = order[j][inbox[order[j]]]
            vals = X[idx, j]
            for side in (0, 1):
                if side == 0:
                    last = vals[k - 1]
                    r = int(np.searchsorted(vals, last, side="right"))
                    walk = idx
                else:
                    last = vals[len(vals) - k]
                    r = len(vals) - int(np.searchsorted(vals, last, side="left"))
                    walk = idx[::-1]
                if r >= len(vals):
                    continue
                rem = cur_n - r
                if rem < min_support:
                    continue
                rs = float(np.cumsum(t[walk[:r]])[-1])
                np_new = cur_np - rs
                wr = (rem / N) * (np_new / rem - Np / N)
                if best is None or wr > best[0] or (wr == best[0] and rem > best[1]):
                    best = (wr, rem, rs, j, side, walk[:r], float(X[walk[r], j]))
        if best is None:
            break
        _, rem, rs, j, side, removed, bound = best
        inbox[removed] = False
        cur_n = rem
        cur_np = cur_np - rs
        feats.append(j)
        sides.append(side)
        bounds.append(bound)
        ns.append(cur_n)
        nps.append(cur_np)
    return (np.asarray(feats, dtype=np.int64), np.asarray(sides, dtype=np.int64),
            np.asarray(bounds, dtype=np.float64), np.asarray(ns, dtype=np.int64),
            np.asarray(nps, dtype=np.float64))
