"""Line-oriented text form of fitted white boxes (one node/rule/bound per line)."""
import numpy as np

from ..blackbox import DecisionTree
from .rules import DecisionList
from .subgroups import Box


def _num(v) -> str:
    return f"{v:.9g}"


def _names(names, m):
    return list(names) if names else [f"x{j}" for j in range(m)]


def tree_lines(tree: DecisionTree, names=None):
    names = _names(names, tree.n_features_)
    lines = []
    for node in range(tree.node_count):
        f = tree.feature_[node]
        if f < 0:
            lines.append(f"node {node} leaf p1={_num(tree.value_[node])} n={int(tree.n_node_[node])}")
        else:
            lines.append(
                f"node {node} {names[f]} <= {_num(tree.threshold_[node])} "
                f"? {int(tree.left_[node])} : {int(tree.right_[node])}"
            )
    return lines


def rules_lines(dl: DecisionList, names=None, m=None):
    m = m if m is not None else 1 + max(
        (c.feature for r in dl.rules for c in r.conditions), default=-1)
    names = _names(names, m)
    lines = []
    for r in dl.rules:
        body = " and ".join(f"{names[c.feature]} {c.op} {_num(c.threshold)}" for c in r.conditions)
        lines.append(f"if {body or 'true'} then {r.consequent}")
    lines.append(f"else {dl.default_class}")
    return lines


def box_lines(box: Box, names=None):
    names = _names(names, box.low.size)
    lines = []
    for j in box.restricted():
        lines.append(f"{names[j]} in [{_num(box.low[j])}, {_num(box.high[j])}]")
    return lines or ["true"]


def to_text(model, names=None) -> str:
    if isinstance(model, DecisionTree):
        lines = ["tree"] + tree_lines(model, names)
    elif isinstance(model, DecisionList):
        lines = ["rules"] + rules_lines(model, names, len(names) if names else None)
    elif isinstance(model, Box):
        lines = ["box"] + box_lines(model, names)
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return "\n".join(lines) + "\n"


def _rows(text):
    return [ln for ln in text.splitlines() if ln.strip()]


def box_from_text(text, names) -> Box:
    rows = _rows(text)
    if rows[0] != "box":
        raise ValueError("not a box")
    index = {n: j for j, n in enumerate(names)}
    low = np.full(len(names), -np.inf)
    high = np.full(len(names), np.inf)
    for ln in rows[1:]:
        if ln == "true":
            continue
        name, rest = ln.split(" in ")
        lo, hi = rest.strip("[]").split(", ")
        low[index[name]] = float(lo)
        high[index[name]] = float(hi)
    return Box(low, high)
