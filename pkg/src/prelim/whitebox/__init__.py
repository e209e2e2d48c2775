"""Interpretable learners with fixed complexity caps.

``fit_whitebox`` dispatches on the variant name and returns the model plus a
dict of what was selected (CV choices, the cap a paired run must respect).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..blackbox import DecisionTree
from ..errors import UnknownSpec
from .rules import MAX_RULES, Condition, DecisionList, Rule, irep_fit, ripper_fit
from .subgroups import (PRIM_ALPHAS, Box, bestinterval_fit, bi_budgets, bi_cv_fit, box_wracc,
                        prim_cv_fit, prim_fit)
from .text import to_text
from .trees import DTCOMP_LEAVES, DTCV_GRID, TREE_VARIANTS, dt_variant_fit

RULE_VARIANTS = ("IREP", "RIPPER")
SUBGROUP_VARIANTS = ("PRIM", "BI")
VARIANTS = TREE_VARIANTS + RULE_VARIANTS + SUBGROUP_VARIANTS


@dataclass(frozen=True)
class WhiteBoxConfig:
    variant: str
    max_rules: int = MAX_RULES
    dtcomp_leaves: int = DTCOMP_LEAVES
    cv_folds: int = 5
    weighted: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise UnknownSpec(f"unknown white box {self.variant!r}; choose from {VARIANTS}")

    @property
    def is_tree(self):
        return self.variant in TREE_VARIANTS

    @property
    def is_subgroup(self):
        return self.variant in SUBGROUP_VARIANTS


def fit_whitebox(cfg: WhiteBoxConfig, X, targets, sample_weight=None, cap=None, seed=None):
    """Fit the configured white box.

    ``cap`` is the paired baseline's selected complexity (DTcv leaves, BI
    budget); the returned info carries the value to pass as ``cap`` later.
    Subgroup variants accept real-valued targets and ignore weights.
    """
    v = cfg.variant
    if v in TREE_VARIANTS:
        model, info = dt_variant_fit(X, targets, v, baseline_leaf_count=cap,
                                     sample_weight=sample_weight, seed=seed, folds=cfg.cv_folds)
        if v == "DTcv":
            info["cap"] = model.n_leaves
        return model, info
    if v == "IREP":
        return irep_fit(X, targets, sample_weight, cfg.max_rules, seed=seed), {}
    if v == "RIPPER":
        return ripper_fit(X, targets, sample_weight, cfg.max_rules, seed=seed), {}
    if v == "PRIM":
        return prim_cv_fit(X, targets, seed=seed, folds=cfg.cv_folds)
    box, info = bi_cv_fit(X, targets, baseline_budget=cap, seed=seed, folds=cfg.cv_folds)
    info["cap"] = info["budget"]
    return box, info


def complexity(model) -> int:
    """Leaves of a tree, rules of a list, restricted features of a box."""
    if isinstance(model, DecisionTree):
        return model.n_leaves
    if isinstance(model, DecisionList):
        return model.n_rules
    if isinstance(model, Box):
        return model.restricted_count
    raise TypeError(f"no complexity measure for {type(model).__name__}")


def model_predict(model, X):
    return np.asarray(model.predict(X), dtype=np.int64)


__all__ = [
    "Box", "Condition", "DecisionList", "Rule", "WhiteBoxConfig", "VARIANTS", "DTCV_GRID",
    "PRIM_ALPHAS", "bestinterval_fit", "bi_budgets", "bi_cv_fit", "box_wracc", "complexity",
    "dt_variant_fit", "fit_whitebox", "irep_fit", "model_predict", "prim_cv_fit", "prim_fit",
    "ripper_fit", "to_text",
]
