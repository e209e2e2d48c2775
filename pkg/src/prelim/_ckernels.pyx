# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: tree growing, tree traversal and PRIM peeling.

Every routine here has a line-for-line twin in ``_pykernels``; both perform the
same floating point operations in the same order so the two backends agree
bit for bit.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport ceil

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.uint8_t u8

cdef enum:
    GINI = 0
    NEWTON = 1


cdef inline bint _heap_less(double ga, i64 ia, double gb, i64 ib) noexcept nogil:
    # "a has lower priority than b": smaller gain, or equal gain and larger id
    if ga < gb:
        return True
    if ga == gb and ia > ib:
        return True
    return False


cdef void _heap_push(double[::1] hk, i64[::1] hid, Py_ssize_t* size, double g, i64 node) noexcept nogil:
    cdef Py_ssize_t pos = size[0]
    cdef Py_ssize_t parent
    size[0] += 1
    hk[pos] = g
    hid[pos] = node
    while pos > 0:
        parent = (pos - 1) // 2
        if _heap_less(hk[parent], hid[parent], hk[pos], hid[pos]):
            hk[parent], hk[pos] = hk[pos], hk[parent]
            hid[parent], hid[pos] = hid[pos], hid[parent]
            pos = parent
        else:
            break


cdef i64 _heap_pop(double[::1] hk, i64[::1] hid, Py_ssize_t* size) noexcept nogil:
    cdef i64 top = hid[0]
    cdef Py_ssize_t n, pos, child, best
    size[0] -= 1
    n = size[0]
    hk[0] = hk[n]
    hid[0] = hid[n]
    pos = 0
    while True:
        child = 2 * pos + 1
        if child >= n:
            break
        best = child
        if child + 1 < n and _heap_less(hk[child], hid[child], hk[child + 1], hid[child + 1]):
            best = child + 1
        if _heap_less(hk[pos], hid[pos], hk[best], hid[best]):
            hk[pos], hk[best] = hk[best], hk[pos]
            hid[pos], hid[best] = hid[best], hid[pos]
            pos = best
        else:
            break
    return top


cdef class _Grower:
    cdef const double[:, ::1] X
    cdef const double[::1] s1
    cdef const double[::1] s2
    cdef i64[:, ::1] work
    cdef const i64[:, ::1] draws
    cdef int criterion
    cdef Py_ssize_t M, max_features, max_depth, min_split, min_leaf
    cdef double mcw, lam, gamma
    # node storage
    cdef i64[::1] start, end, depth, feature, left, right, nleft, cand_feature
    cdef double[::1] threshold, sum1, sum2, gain, cand_thr, cand_gain

    cdef void evaluate(self, i64 node) noexcept:
        cdef Py_ssize_t a = self.start[node]
        cdef Py_ssize_t b = self.end[node]
        cdef Py_ssize_t n = b - a
        cdef Py_ssize_t k, j, f, nl, used, nf
        cdef i64 i
        cdef double S1 = 0.0, S2 = 0.0, L1, L2, R1, R2, g, pterm, xv, xn, thr
        cdef double best_gain = 0.0
        cdef i64 best_f = -1
        cdef double best_thr = 0.0
        cdef i64 best_nl = 0
        for k in range(a, b):
            i = self.work[0, k]
            S1 += self.s1[i]
            S2 += self.s2[i]
        self.sum1[node] = S1
        self.sum2[node] = S2
        self.cand_feature[node] = -1
        if n < self.min_split or n < 2 * self.min_leaf:
            return
        if self.max_depth >= 0 and self.depth[node] >= self.max_depth:
            return
        if self.criterion == GINI:
            if not (S1 > 0.0 and S1 < S2):
                return
            pterm = S1 * (S2 - S1) / S2
        else:
            pterm = S1 * S1 / (S2 + self.lam)
        used = 0
        nf = self.M
        for j in range(nf):
            if self.max_features < self.M:
                if used >= self.max_features:
                    break
                f = self.draws[node, j]
            else:
                f = j
            if self.X[self.work[f, a], f] == self.X[self.work[f, b - 1], f]:
                continue
            used += 1
            L1 = 0.0
            L2 = 0.0
            for k in range(a, b - 1):
                i = self.work[f, k]
                L1 += self.s1[i]
                L2 += self.s2[i]
                xv = self.X[i, f]
                xn = self.X[self.work[f, k + 1], f]
                if not (xn > xv):
                    continue
                nl = k + 1 - a
                if nl < self.min_leaf or n - nl < self.min_leaf:
                    continue
                R1 = S1 - L1
                R2 = S2 - L2
                if self.criterion == GINI:
                    if not (L2 > 0.0 and R2 > 0.0):
                        continue
                    g = ((pterm - L1 * (L2 - L1) / L2) - R1 * (R2 - R1) / R2) * 2.0
                else:
                    if L2 < self.mcw or R2 < self.mcw:
                        continue
                    g = ((L1 * L1 / (L2 + self.lam) + R1 * R1 / (R2 + self.lam)) - pterm) * 0.5
                if best_f < 0 or g > best_gain or (g == best_gain and f < best_f):
                    thr = (xv + xn) * 0.5
                    if not (thr < xn):
                        thr = xv
                    best_gain = g
                    best_f = f
                    best_thr = thr
                    best_nl = nl
        if best_f < 0:
            return
        if self.criterion == NEWTON and not (best_gain > self.gamma and best_gain > 0.0):
            return
        self.cand_feature[node] = best_f
        self.cand_thr[node] = best_thr
        self.cand_gain[node] = best_gain
        self.nleft[node] = best_nl


def grow_tree(const double[:, ::1] X, const double[::1] s1, const double[::1] s2,
              const i64[:, ::1] order, const u8[::1] mask, int criterion,
              Py_ssize_t max_leaves, Py_ssize_t max_depth, Py_ssize_t min_samples_split,
              Py_ssize_t min_samples_leaf, double min_child_weight, double reg_lambda,
              double gamma, const i64[:, ::1] feature_draws, Py_ssize_t max_features):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t M = X.shape[1]
    cdef Py_ssize_t n_inc = 0
    cdef Py_ssize_t i, f, k, c, cap, a, b, nl, wl, wr
    cdef i64 row, node, lc, rc, n_nodes, n_leaves
    cdef Py_ssize_t hsize = 0
    for i in range(n):
        if mask[i]:
            n_inc += 1
    cap = 2 * n_inc - 1 if n_inc > 0 else 1

    work_arr = np.empty((M, max(n_inc, 1)), dtype=np.int64)
    cdef i64[:, ::1] work = work_arr
    for f in range(M):
        c = 0
        for k in range(n):
            row = order[f, k]
            if mask[row]:
                work[f, c] = row
                c += 1
    tmp_arr = np.empty(max(n_inc, 1), dtype=np.int64)
    cdef i64[::1] tmp = tmp_arr
    goes_arr = np.zeros(n, dtype=np.uint8)
    cdef u8[::1] goes_left = goes_arr

    cdef _Grower g = _Grower()
    g.X = X
    g.s1 = s1
    g.s2 = s2
    g.work = work
    g.draws = feature_draws
    g.criterion = criterion
    g.M = M
    g.max_features = max_features if max_features > 0 else M
    g.max_depth = max_depth
    g.min_split = min_samples_split
    g.min_leaf = min_samples_leaf
    g.mcw = min_child_weight
    g.lam = reg_lambda
    g.gamma = gamma

    start = np.zeros(cap, dtype=np.int64)
    end = np.zeros(cap, dtype=np.int64)
    depth = np.zeros(cap, dtype=np.int64)
    feature = np.full(cap, -1, dtype=np.int64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    nleft = np.zeros(cap, dtype=np.int64)
    cand_feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    sum1 = np.zeros(cap, dtype=np.float64)
    sum2 = np.zeros(cap, dtype=np.float64)
    gain = np.zeros(cap, dtype=np.float64)
    cand_thr = np.zeros(cap, dtype=np.float64)
    cand_gain = np.zeros(cap, dtype=np.float64)
    g.start = start
    g.end = end
    g.depth = depth
    g.feature = feature
    g.left = left
    g.right = right
    g.nleft = nleft
    g.cand_feature = cand_feature
    g.threshold = threshold
    g.sum1 = sum1
    g.sum2 = sum2
    g.gain = gain
    g.cand_thr = cand_thr
    g.cand_gain = cand_gain

    hk_arr = np.zeros(cap, dtype=np.float64)
    hid_arr = np.zeros(cap, dtype=np.int64)
    cdef double[::1] hk = hk_arr
    cdef i64[::1] hid = hid_arr
    expansion_arr = np.zeros(cap, dtype=np.int64)
    cdef i64[::1] expansion = expansion_arr
    cdef Py_ssize_t n_exp = 0

    n_nodes = 1
    n_leaves = 1
    g.start[0] = 0
    g.end[0] = n_inc
    g.depth[0] = 0
    if n_inc > 0:
        g.evaluate(0)
        if g.cand_feature[0] >= 0:
            _heap_push(hk, hid, &hsize, g.cand_gain[0], 0)

    while hsize > 0 and (max_leaves < 0 or n_leaves < max_leaves):
        node = _heap_pop(hk, hid, &hsize)
        f = g.cand_feature[node]
        a = g.start[node]
        b = g.end[node]
        nl = g.nleft[node]
        for k in range(a, b):
            goes_left[work[f, k]] = 1 if k - a < nl else 0
        for c in range(M):
            wl = a
            wr = 0
            for k in range(a, b):
                row = work[c, k]
                if goes_left[row]:
                    work[c, wl] = row
                    wl += 1
                else:
                    tmp[wr] = row
                    wr += 1
            for k in range(wr):
                work[c, wl + k] = tmp[k]
        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        n_leaves += 1
        g.feature[node] = f
        g.threshold[node] = g.cand_thr[node]
        g.gain[node] = g.cand_gain[node]
        g.left[node] = lc
        g.right[node] = rc
        expansion[n_exp] = node
        n_exp += 1
        g.start[lc] = a
        g.end[lc] = a + nl
        g.start[rc] = a + nl
        g.end[rc] = b
        g.depth[lc] = g.depth[node] + 1
        g.depth[rc] = g.depth[node] + 1
        g.evaluate(lc)
        if g.cand_feature[lc] >= 0:
            _heap_push(hk, hid, &hsize, g.cand_gain[lc], lc)
        g.evaluate(rc)
        if g.cand_feature[rc] >= 0:
            _heap_push(hk, hid, &hsize, g.cand_gain[rc], rc)

    m = n_nodes
    return {
        "feature": feature[:m].copy(),
        "threshold": threshold[:m].copy(),
        "left": left[:m].copy(),
        "right": right[:m].copy(),
        "sum1": sum1[:m].copy(),
        "sum2": sum2[:m].copy(),
        "n_node": (end[:m] - start[:m]).copy(),
        "depth": depth[:m].copy(),
        "gain": gain[:m].copy(),
        "expansion": expansion_arr[:n_exp].copy(),
    }


def apply_tree(const double[:, ::1] X, const i64[::1] feature, const double[::1] threshold,
               const i64[::1] left, const i64[::1] right):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t i
    cdef i64 node, f
    out_arr = np.empty(n, dtype=np.int64)
    cdef i64[::1] out = out_arr
    with nogil:
        for i in range(n):
            node = 0
            f = feature[0]
            while f >= 0:
                if X[i, f] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
                f = feature[node]
            out[i] = node
    return out_arr


def prim_peel(const double[:, ::1] X, const double[::1] t, const i64[:, ::1] order,
              double alpha, Py_ssize_t min_support, double nplus_total):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t M = X.shape[1]
    cdef double N = <double>n
    cdef double Np = nplus_total
    cdef Py_ssize_t cur_n = n
    cdef double cur_np = nplus_total
    cdef Py_ssize_t j, side, pos, step, removed, k, rem, best_rem, best_pos
    cdef Py_ssize_t best_j, best_side
    cdef i64 i
    cdef double rs, last, wr, best_wr, best_rs, best_bound, np_new
    cdef bint valid
    inbox_arr = np.ones(n, dtype=np.uint8)
    cdef u8[::1] inbox = inbox_arr
    lo_arr = np.zeros(M, dtype=np.int64)
    hi_arr = np.full(M, n - 1, dtype=np.int64)
    cdef i64[::1] lo_ptr = lo_arr
    cdef i64[::1] hi_ptr = hi_arr
    feats = []
    sides = []
    bounds = []
    ns = []
    nps = []
    while cur_n > min_support:
        k = <Py_ssize_t>ceil(alpha * cur_n)
        if k < 1:
            k = 1
        best_j = -1
        best_side = 0
        best_wr = 0.0
        best_rem = 0
        best_rs = 0.0
        best_bound = 0.0
        best_pos = 0
        for j in range(M):
            for side in range(2):
                if side == 0:
                    pos = lo_ptr[j]
                    step = 1
                else:
                    pos = hi_ptr[j]
                    step = -1
                removed = 0
                rs = 0.0
                last = 0.0
                while removed < k:
                    i = order[j, pos]
                    if inbox[i]:
                        rs += t[i]
                        removed += 1
                        last = X[i, j]
                    pos += step
                valid = False
                while 0 <= pos < n:
                    i = order[j, pos]
                    if not inbox[i]:
                        pos += step
                        continue
                    if X[i, j] == last:
                        rs += t[i]
                        removed += 1
                        pos += step
                        continue
                    valid = True
                    break
                if not valid:
                    continue
                rem = cur_n - removed
                if rem < min_support:
                    continue
                np_new = cur_np - rs
                wr = (rem / N) * (np_new / rem - Np / N)
                if best_j < 0 or wr > best_wr or (wr == best_wr and rem > best_rem):
                    best_j = j
                    best_side = side
                    best_wr = wr
                    best_rem = rem
                    best_rs = rs
                    best_pos = pos
                    best_bound = X[order[j, pos], j]
        if best_j < 0:
            break
        j = best_j
        if best_side == 0:
            pos = lo_ptr[j]
            step = 1
        else:
            pos = hi_ptr[j]
            step = -1
        while pos != best_pos:
            inbox[order[j, pos]] = 0
            pos += step
        if best_side == 0:
            lo_ptr[j] = best_pos
        else:
            hi_ptr[j] = best_pos
        cur_n = best_rem
        cur_np = cur_np - best_rs
        feats.append(j)
        sides.append(best_side)
        bounds.append(best_bound)
        ns.append(cur_n)
        nps.append(cur_np)
    return (np.asarray(feats, dtype=np.int64), np.asarray(sides, dtype=np.int64),
            np.asarray(bounds, dtype=np.float64), np.asarray(ns, dtype=np.int64),
            np.asarray(nps, dtype=np.float64))
