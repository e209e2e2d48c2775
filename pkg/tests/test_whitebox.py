from pathlib import Path

import numpy as np
import pytest
from oracles import best_box_2d, best_interval

from prelim.core import wracc
from prelim.errors import InvalidAlpha, InvalidBudget, UnknownSpec
from prelim.whitebox import (DTCV_GRID, PRIM_ALPHAS, Box, Condition, DecisionList, Rule,
                             WhiteBoxConfig, bestinterval_fit, bi_budgets, box_wracc, complexity,
                             dt_variant_fit, fit_whitebox, irep_fit, prim_fit, ripper_fit)
from prelim.whitebox.rules import count_conditions, description_length, optimize_rules
from prelim.whitebox.subgroups import best_interval_1d
from prelim.whitebox.text import box_from_text, to_text
from prelim.whitebox.trees import capped_grid, select_leaves


def _checker(n, cells, seed):
    rng = np.random.default_rng(seed)
    X = rng.random((n, 2))
    idx = np.floor(X * cells).astype(int)
    return X, ((idx[:, 0] + idx[:, 1]) % 2).astype(int)


# --- trees ---------------------------------------------------------------------

def test_tree_grids():
    assert DTCV_GRID == (2, 4, 8, 16, 32, 64, 128)
    assert capped_grid(DTCV_GRID, 4) == (2, 4)
    assert capped_grid(DTCV_GRID, 10) == (2, 4, 8, 10)
    assert capped_grid(DTCV_GRID, 1) == (1,)
    assert capped_grid(DTCV_GRID, None) == DTCV_GRID


def test_dtcomp_cap(rng):
    for seed in range(5):
        X, y = _checker(500, 4, seed)
        tree, _ = dt_variant_fit(X, y, "DTcomp")
        assert tree.n_leaves <= 8


def test_dt_min_internal(rng):
    X, y = _checker(400, 4, 1)
    tree, _ = dt_variant_fit(X, y, "DT")
    internal = tree.feature_ >= 0
    assert (tree.n_node_[internal] > 10).all()


def test_dtcv_cap_binds():
    X, y = _checker(1200, 4, 2)
    _, free = dt_variant_fit(X, y, "DTcv", seed=0)
    assert free["max_leaves"] >= 8
    tree, info = dt_variant_fit(X, y, "DTcv", baseline_leaf_count=4, seed=0)
    assert tree.n_leaves <= 4
    assert set(info["cv"]) == {2, 4}


def test_dtcv_selection_uses_prefix_trees():
    X, y = _checker(300, 2, 5)
    best, means = select_leaves(X, y, (2, 4, 8), seed=1)
    assert best == max((2, 4, 8), key=lambda g: (means[g], -g))


# --- rules ---------------------------------------------------------------------

def test_single_threshold_rule():
    x = np.linspace(0, 1, 201)[:, None]
    y = (x[:, 0] > 0.7).astype(int)
    for fit in (irep_fit, ripper_fit):
        dl = fit(x, y, seed=0)
        assert dl.n_rules == 1
        (cond,) = dl.rules[0].conditions
        assert cond.op == ">" and cond.threshold == pytest.approx(0.7, abs=0.005)
        assert (dl.predict(x) == y).all()


def test_single_class_gives_empty_list():
    X = np.random.default_rng(0).random((20, 2))
    for fit in (irep_fit, ripper_fit):
        dl = fit(X, np.zeros(20, int))
        assert dl.rules == [] and dl.default_class == 0
        assert complexity(dl) == 0


def test_rule_cap_binds_on_many_clusters():
    # ten separate positive intervals need ten rules
    x = np.linspace(0, 20, 2001)[:-1]
    y = (np.floor(x) % 2 == 0).astype(int)
    for fit in (irep_fit, ripper_fit):
        dl = fit(x[:, None], y, seed=0)
        assert dl.n_rules == 8


@pytest.mark.parametrize("seed", range(10))
def test_optimization_never_increases_description_length(seed):
    rng = np.random.default_rng(seed)
    X = rng.random((120, 3))
    y = ((X[:, 0] > 0.5) ^ (rng.random(120) < 0.15)).astype(int)
    w = np.ones(120)
    n_cond = count_conditions(X)
    rules = ripper_fit(X, y, seed=seed, optimize=False, max_rules=64).rules
    before = description_length(rules, X, y, w, n_cond)
    after = description_length(optimize_rules(rules, X, y, w, n_cond,
                                              np.random.default_rng(seed)), X, y, w, n_cond)
    assert after <= before + 1e-9


def test_decision_list_order_matters():
    r1 = Rule((Condition(0, ">", 0.5),), consequent=1)
    r0 = Rule((Condition(1, ">", 0.5),), consequent=0)
    witness = np.array([[0.9, 0.9]])
    assert DecisionList([r1, r0], 0).predict(witness)[0] == 1
    assert DecisionList([r0, r1], 1).predict(witness)[0] == 0


@pytest.mark.parametrize("fit", [irep_fit, ripper_fit])
def test_rules_row_order_invariant(fit):
    rng = np.random.default_rng(3)
    X = rng.random((150, 2))
    y = ((X[:, 0] > 0.4) & (X[:, 1] < 0.7)).astype(int)
    perm = rng.permutation(150)
    assert fit(X, y, seed=1).rules == fit(X[perm], y[perm], seed=1).rules


# --- subgroups -----------------------------------------------------------------

def test_prim_alpha_grid_and_validation():
    assert PRIM_ALPHAS == (0.03, 0.05, 0.07, 0.1, 0.13, 0.16, 0.2)
    for a in (0, 0.5, -0.1, 0.7):
        with pytest.raises(InvalidAlpha):
            prim_fit(np.zeros((20, 1)), np.zeros(20), a)


def test_prim_upper_tail_example():
    x = np.linspace(0, 1, 100)[:, None]
    t = (x[:, 0] >= 0.9).astype(float)
    box = prim_fit(x, t, 0.1)
    assert 0.88 <= box.low[0] <= 0.91 and box.high[0] == np.inf
    # exhaustive optimum is 0.09 (the 10 positives alone); the 10-row minimum
    # support and alpha-sized peels stop one row short
    assert box_wracc(box, x, t) == pytest.approx(0.09, abs=0.002)


def test_prim_flat_targets_keep_full_box():
    X = np.random.default_rng(0).random((80, 3))
    box = prim_fit(X, np.full(80, 0.5), 0.1)
    assert box.restricted_count == 0
    assert box_wracc(box, X, np.full(80, 0.5)) == 0


@pytest.mark.parametrize("seed", range(5))
def test_prim_never_worse_than_full_box(seed):
    rng = np.random.default_rng(seed)
    X = rng.random((150, 3))
    t = rng.random(150)
    assert box_wracc(prim_fit(X, t, 0.05), X, t) >= 0


def test_bi_budget_variants():
    assert bi_budgets(20) == (15, 12, 9, 6, 3)
    assert bi_budgets(15) == (15, 12, 9, 6, 3)
    assert bi_budgets(8) == (8, 6, 4, 2)
    assert bi_budgets(1) == (1,)
    with pytest.raises(InvalidBudget):
        bestinterval_fit(np.zeros((5, 2)), np.zeros(5), 0)


@pytest.mark.parametrize("seed", range(15))
def test_bi_matches_interval_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 60))
    x = rng.integers(0, 12, n).astype(float)
    t = (rng.random(n) < 0.4).astype(float)
    box = bestinterval_fit(x[:, None], t, 1)
    assert box_wracc(box, x[:, None], t) == float(best_interval(x, t))


def test_best_interval_prefers_coverage_on_ties():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    s = np.array([1.0, 0.0, 1.0, -1.0])
    val, lo, hi, cnt = best_interval_1d(x, s)
    assert (val, lo, hi, cnt) == (2.0, 0.0, 2.0, 3)


def test_bi_budget_one_picks_signal_feature():
    rng = np.random.default_rng(4)
    X = rng.random((300, 2))
    t = (X[:, 1] > 0.6).astype(float)
    box = bestinterval_fit(X, t, 1)
    assert box.restricted().tolist() == [1]


def test_prim_reaches_grid_oracle_on_quadrant():
    g = np.linspace(0, 1, 10)
    X = np.array([(a, b) for a in g for b in g])
    t = ((X[:, 0] >= 0.5) & (X[:, 1] >= 0.5)).astype(float)
    box = prim_fit(X, t, 0.1)
    assert box_wracc(box, X, t) == pytest.approx(float(best_box_2d(X, t, 10)), abs=1e-12)


def test_complexity_examples():
    from prelim.blackbox import cart_fit

    assert complexity(cart_fit(np.zeros((4, 1)), np.zeros(4))) == 1
    assert complexity(DecisionList()) == 0
    low = np.full(10, -np.inf)
    high = np.full(10, np.inf)
    low[[1, 4]] = 0.2
    high[[4, 7]] = 0.9
    assert complexity(Box(low, high)) == 3


def test_whitebox_config_and_dispatch(linear_data):
    X, y = linear_data
    with pytest.raises(UnknownSpec):
        WhiteBoxConfig("C4.5")
    for v in ("DT", "DTcomp", "DTcv", "IREP", "RIPPER", "PRIM", "BI"):
        model, info = fit_whitebox(WhiteBoxConfig(v), X, y, seed=0)
        assert model.predict(X).shape == (200,)
        if v in ("DTcv", "BI"):
            assert "cap" in info


def test_bi_respects_inherited_budget():
    rng = np.random.default_rng(9)
    X = rng.random((200, 6))
    t = ((X[:, 0] > 0.3) & (X[:, 1] > 0.3) & (X[:, 2] > 0.3)).astype(float)
    box, info = fit_whitebox(WhiteBoxConfig("BI"), X, t, cap=2, seed=0)
    assert info["budget"] <= 2 and box.restricted_count <= 2


def test_wracc_helper_consistency():
    box = Box(np.array([0.5]), np.array([np.inf]))
    x = np.array([[0.1], [0.6], [0.9], [0.3]])
    t = np.array([0, 1, 1, 0])
    assert box_wracc(box, x, t) == wracc(2, 2, 4, 2)


# --- text form -----------------------------------------------------------------

GOLDEN = Path(__file__).parent / "golden"


def test_text_goldens():
    from prelim.blackbox import cart_fit

    x = np.linspace(0, 1, 201)[:, None]
    y = (x[:, 0] > 0.7).astype(int)
    assert to_text(irep_fit(x, y, seed=0), ["a"]) == (GOLDEN / "rules_threshold.txt").read_text()
    assert to_text(cart_fit(x, y, max_leaves=2), ["a"]) == (GOLDEN / "tree_threshold.txt").read_text()
    box = Box(np.array([0.25, -np.inf]), np.array([np.inf, 0.5]))
    assert to_text(box, ["a", "b"]) == (GOLDEN / "box_two_sided.txt").read_text()


def test_box_text_round_trip(rng):
    low = np.where(rng.random(6) < 0.5, rng.random(6), -np.inf)
    high = np.where(rng.random(6) < 0.5, rng.random(6) + 1, np.inf)
    names = [f"f{j}" for j in range(6)]
    back = box_from_text(to_text(Box(low, high), names), names)
    assert np.allclose(back.low, low, rtol=1e-8) and np.allclose(back.high, high, rtol=1e-8)
    assert to_text(DecisionList(), ["a"]) == "rules\nelse 0\n"
    assert to_text(Box.full(2), ["a", "b"]) == "box\ntrue\n"
