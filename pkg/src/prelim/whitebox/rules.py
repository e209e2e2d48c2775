"""Decision lists learned by sequential covering (IREP and RIPPER).

Rules always predict class 1 and the default class is 0; ``DecisionList``
itself accepts any consequent so hand-built lists can mix classes.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..core import canonical_order

log = logging.getLogger(__name__)

MAX_RULES = 8
MDL_SLACK = 64.0
# guard on how many rules the covering loop may emit before the final cap
MAX_BUILD_RULES = 64


@dataclass(frozen=True)
class Condition:
    feature: int
    op: str  # "<=" or ">"
    threshold: float

    def mask(self, X):
        col = X[:, self.feature]
        return col <= self.threshold if self.op == "<=" else col > self.threshold


@dataclass(frozen=True)
class Rule:
    conditions: tuple
    consequent: int = 1

    def covers(self, X):
        m = np.ones(X.shape[0], dtype=bool)
        for c in self.conditions:
            m &= c.mask(X)
        return m

    def __len__(self):
        return len(self.conditions)


@dataclass
class DecisionList:
    rules: list = field(default_factory=list)
    default_class: int = 0

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = np.full(X.shape[0], self.default_class, dtype=np.int64)
        undecided = np.ones(X.shape[0], dtype=bool)
        for r in self.rules:
            fire = undecided & r.covers(X)
            out[fire] = r.consequent
            undecided &= ~fire
        return out

    def predict_proba(self, X):
        return self.predict(X).astype(np.float64)

    @property
    def n_rules(self):
        return len(self.rules)


def _covered(rules, X):
    m = np.zeros(X.shape[0], dtype=bool)
    for r in rules:
        m |= r.covers(X)
    return m


# --- growing and pruning ----------------------------------------------------

def _best_condition(X, pos, w, p0, n0):
    """Condition with the largest FOIL gain on the covered rows, or None."""
    base = math.log2(p0 / (p0 + n0))
    best = None
    wp = w * pos
    wn = w * ~pos
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        if xs[0] == xs[-1]:
            continue
        cp = np.cumsum(wp[order])[:-1]
        cn = np.cumsum(wn[order])[:-1]
        valid = xs[1:] > xs[:-1]
        thr = (xs[1:] + xs[:-1]) * 0.5
        thr = np.where(thr < xs[1:], thr, xs[:-1])
        for op, p1, n1 in (("<=", cp, cn), (">", p0 - cp, n0 - cn)):
            ok = valid & (p1 > 0)
            if not ok.any():
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                gain = p1 * (np.log2(p1 / (p1 + n1)) - base)
            gain = np.where(ok, gain, -np.inf)
            k = int(np.argmax(gain))
            if best is None or gain[k] > best[0]:
                best = (float(gain[k]), Condition(f, op, float(thr[k])))
    return best


def grow_rule(X, y, w, initial=()):
    """Greedy FOIL-gain specialization until no negatives are covered."""
    conds = list(initial)
    pos = y == 1
    cov = np.ones(X.shape[0], dtype=bool)
    for c in conds:
        cov &= c.mask(X)
    while True:
        p0 = float(np.sum(w[cov & pos]))
        n0 = float(np.sum(w[cov & ~pos]))
        if p0 <= 0 or n0 <= 0:
            break
        best = _best_condition(X[cov], pos[cov], w[cov], p0, n0)
        if best is None or not best[0] > 0:
            break
        conds.append(best[1])
        cov &= best[1].mask(X)
    return conds


def _prefix_masks(conds, X):
    m = np.ones(X.shape[0], dtype=bool)
    for c in conds:
        m = m & c.mask(X)
        yield m


def prune_rule(conds, X, y, w, min_len=1):
    """Keep the prefix maximizing (p - n) / (p + n) on the prune rows.

    Ties go to the shorter prefix. With no prune coverage at all the rule is
    returned unchanged.
    """
    if not conds or X.shape[0] == 0:
        return list(conds)
    pos = y == 1
    best_len, best_v = None, -math.inf
    for j, m in enumerate(_prefix_masks(conds, X), start=1):
        p = float(np.sum(w[m & pos]))
        n = float(np.sum(w[m & ~pos]))
        if j < min_len or p + n <= 0:
            continue
        v = (p - n) / (p + n)
        if v > best_v:
            best_len, best_v = j, v
    if best_len is None:
        return list(conds)
    return list(conds[:best_len])


def _prune_by_error(conds, others, X, y, w, min_len=1):
    """Prefix minimizing the error of the whole rule set on the prune rows."""
    if not conds or X.shape[0] == 0:
        return list(conds)
    pos = y == 1
    base = _covered(others, X)
    best_len, best_err = None, math.inf
    for j, m in enumerate(_prefix_masks(conds, X), start=1):
        if j < min_len:
            continue
        pred = base | m
        err = float(np.sum(w[pred != pos]))
        if err < best_err:
            best_len, best_err = j, err
    return list(conds[:best_len]) if best_len else list(conds)


def _grow_prune_split(y, rng, ratio=2 / 3):
    grow, prune = [], []
    for c in (0, 1):
        idx = np.flatnonzero(y == c)
        idx = idx[rng.permutation(idx.size)]
        k = int(round(ratio * idx.size))
        grow.append(idx[:k])
        prune.append(idx[k:])
    return np.sort(np.concatenate(grow)), np.sort(np.concatenate(prune))


def _prepare(X, y, sample_weight):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    w = np.ones(y.size) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    o = canonical_order(X, np.column_stack([y, w]))
    return X[o], y[o], w[o]


def _degenerate(y):
    classes = np.unique(y)
    if classes.size < 2:
        log.warning("only class %s present; returning an empty decision list", classes)
        return DecisionList([], int(classes[0]) if classes.size else 0)
    return None


def irep_fit(X, y, sample_weight=None, max_rules=MAX_RULES, seed=None) -> DecisionList:
    """IREP: grow on 2/3, prune on 1/3, stop once a pruned rule's precision is <= 0.5."""
    X, y, w = _prepare(X, y, sample_weight)
    empty = _degenerate(y)
    if empty is not None:
        return empty
    rng = np.random.default_rng(seed)
    rules = []
    remaining = np.arange(y.size)
    while len(rules) < max_rules and np.any(y[remaining] == 1):
        yr = y[remaining]
        g, p = _grow_prune_split(yr, rng)
        gi, pi = remaining[g], remaining[p]
        conds = grow_rule(X[gi], y[gi], w[gi])
        if not conds:
            break
        conds = prune_rule(conds, X[pi], y[pi], w[pi])
        rule = Rule(tuple(conds))
        rows = pi
        m = rule.covers(X[rows])
        if not m.any():
            rows = gi
            m = rule.covers(X[rows])
        pw = float(np.sum(w[rows][m & (y[rows] == 1)]))
        cw = float(np.sum(w[rows][m]))
        if cw <= 0 or pw / cw <= 0.5:
            break
        rules.append(rule)
        remaining = remaining[~rule.covers(X[remaining])]
    return DecisionList(rules, 0)


# --- description length -----------------------------------------------------

def _log2_comb(n, k):
    if k <= 0 or k >= n:
        return 0.0
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)) / math.log(2)


def count_conditions(X) -> int:
    """Number of distinct single-feature tests available on X."""
    total = 0
    for f in range(X.shape[1]):
        total += 2 * max(np.unique(X[:, f]).size - 1, 0)
    return max(total, 1)


def rule_bits(k: int, n_cond: int) -> float:
    if k <= 0:
        return 0.0
    p = k / n_cond
    s = -k * math.log2(p)
    if k < n_cond:
        s -= (n_cond - k) * math.log2(1 - p)
    return 0.5 * (math.log2(k) + s)


def description_length(rules, X, y, w, n_cond) -> float:
    """Bits for the rules plus bits for their exceptions on (X, y)."""
    pred = _covered(rules, X)
    pos = y == 1
    covered = float(np.sum(w[pred]))
    uncovered = float(np.sum(w[~pred]))
    fp = float(np.sum(w[pred & ~pos]))
    fn = float(np.sum(w[~pred & pos]))
    theory = sum(rule_bits(len(r), n_cond) for r in rules)
    return theory + _log2_comb(covered, fp) + _log2_comb(uncovered, fn)


def _irep_star(X, y, w, rules, rng, n_cond, slack=MDL_SLACK):
    rules = list(rules)
    best_dl = description_length(rules, X, y, w, n_cond)
    remaining = np.flatnonzero(~_covered(rules, X))
    while np.any(y[remaining] == 1) and len(rules) < MAX_BUILD_RULES:
        yr = y[remaining]
        g, p = _grow_prune_split(yr, rng)
        gi, pi = remaining[g], remaining[p]
        conds = grow_rule(X[gi], y[gi], w[gi])
        if not conds:
            break
        conds = prune_rule(conds, X[pi], y[pi], w[pi])
        rule = Rule(tuple(conds))
        hit = rule.covers(X[remaining])
        if not np.any(hit & (y[remaining] == 1)):
            break
        rules.append(rule)
        remaining = remaining[~hit]
        dl = description_length(rules, X, y, w, n_cond)
        if dl > best_dl + slack:
            break
        best_dl = min(best_dl, dl)
    return rules


def _simplify(rules, X, y, w, n_cond):
    rules = list(rules)
    dl = description_length(rules, X, y, w, n_cond)
    for i in reversed(range(len(rules))):
        cand = rules[:i] + rules[i + 1:]
        cdl = description_length(cand, X, y, w, n_cond)
        if cdl < dl:
            rules, dl = cand, cdl
    return rules


def optimize_rules(rules, X, y, w, n_cond, rng, slack=MDL_SLACK):
    """One RIPPER optimization round; never returns a longer description."""
    before = description_length(rules, X, y, w, n_cond)
    new = list(rules)
    for i in range(len(new)):
        others = new[:i] + new[i + 1:]
        g, p = _grow_prune_split(y, rng)
        free = g[~_covered(others, X[g])]
        options = [new[i]]
        repl = grow_rule(X[free], y[free], w[free])
        if repl:
            repl = _prune_by_error(repl, others, X[p], y[p], w[p])
            options.append(Rule(tuple(repl)))
        rev = grow_rule(X[free], y[free], w[free], initial=new[i].conditions)
        if len(rev) > len(new[i]):
            rev = _prune_by_error(rev, others, X[p], y[p], w[p], min_len=len(new[i]))
            options.append(Rule(tuple(rev)))
        scores = [description_length(others[:i] + [o] + others[i:], X, y, w, n_cond)
                  for o in options]
        new[i] = options[int(np.argmin(scores))]
    new = _irep_star(X, y, w, new, rng, n_cond, slack)
    new = _simplify(new, X, y, w, n_cond)
    if description_length(new, X, y, w, n_cond) > before:
        return list(rules)
    return new


def ripper_fit(X, y, sample_weight=None, max_rules=MAX_RULES, seed=None, optimize=True,
               slack=MDL_SLACK) -> DecisionList:
    """RIPPER: IREP* with description-length stopping, one optimization round,
    then the rule cap."""
    X, y, w = _prepare(X, y, sample_weight)
    empty = _degenerate(y)
    if empty is not None:
        return empty
    rng = np.random.default_rng(seed)
    n_cond = count_conditions(X)
    rules = _irep_star(X, y, w, [], rng, n_cond, slack)
    rules = _simplify(rules, X, y, w, n_cond)
    if optimize and rules:
        rules = optimize_rules(rules, X, y, w, n_cond, rng, slack)
    return DecisionList(rules[:max_rules], 0)
