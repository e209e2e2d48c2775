from collections import Counter

import numpy as np
import pytest
from checks import (frequencies_ok, kde_variance_ok, max_distance_to_set, segment_distances,
                    uniform_means_ok)

from prelim.blackbox import DecisionTree, RandomForest, cart_fit
from prelim.errors import TooFewPoints, UnknownSpec
from prelim.generators import (KINDS, GeneratorSpec, bandwidth_matrix, bandwidths, fit_cmm,
                               fit_generator, fit_gmm, fit_kde_family, fit_munge, fit_rerx,
                               fit_simple, fit_smote_family, fit_ssl, fit_vva, kdeb_radius,
                               silverman_bandwidth, ssl_size)
from prelim.generators.neighbors import Interpolator, _allocate


class FixedScores:
    """Stand-in black box with preset scores."""

    def __init__(self, fn):
        self.fn = fn

    def predict_proba(self, X):
        return self.fn(np.asarray(X))

    def predict(self, X):
        return (self.predict_proba(X) >= 0.5).astype(int)


def _unit_std(n):
    # evenly spread values scaled to sample std exactly 1; their IQR/1.349
    # exceeds the std, so the std is the binding spread
    x = np.linspace(0, 1, n)
    return (x - x.mean()) / x.std(ddof=1)


# --- bandwidths ----------------------------------------------------------------

def test_silverman_closed_forms():
    assert silverman_bandwidth(_unit_std(100)) == pytest.approx(0.9 / 100 ** 0.2, abs=1e-9)
    assert silverman_bandwidth(_unit_std(100)) == pytest.approx(0.358297, abs=1e-6)
    assert silverman_bandwidth(_unit_std(100_000)) == pytest.approx(0.09, abs=1e-9)


def test_silverman_uses_iqr_when_smaller():
    # a heavy tail inflates the std but not the IQR
    x = np.concatenate([np.linspace(-1, 1, 98), [50.0, -50.0]])
    q75, q25 = np.percentile(x, [75, 25])
    expected = 0.9 * (q75 - q25) / 1.349 * 100 ** -0.2
    assert silverman_bandwidth(x) == pytest.approx(expected, rel=1e-12)


def test_constant_feature_gets_floor():
    assert silverman_bandwidth(np.full(50, 3.0)) == 1e-6


def test_bandwidth_matrix_is_mean_times_identity():
    H = bandwidth_matrix([0.2, 0.4])
    assert np.allclose(H, 0.3 * np.eye(2), atol=1e-12)


# --- simple --------------------------------------------------------------------

def test_dummy_replays_train_points(rng):
    X = rng.random((100, 3))
    g = fit_simple(X, "dummy")
    assert g.fixed_size == 100
    assert np.array_equal(g.sample(100), X)


def test_unif_moments_and_bounds(rng):
    X = rng.random((60, 2))
    X[0], X[1] = 0.0, 1.0
    s = fit_simple(X, "unif", seed=1).sample(100_000)
    assert s.min() >= 0 and s.max() <= 1
    ok, _ = uniform_means_ok(s, np.zeros(2), np.ones(2))
    assert ok


def test_norm_constant_feature():
    X = np.column_stack([np.full(20, 2.5), np.arange(20.0)])
    s = fit_simple(X, "norm", seed=0).sample(500)
    assert (s[:, 0] == 2.5).all()


def test_unif_prefix_property(rng):
    g = fit_simple(rng.random((30, 4)), "unif", seed=3)
    big = g.sample(10_000)
    assert np.array_equal(g.sample(1000), big[:1000])


def test_rerx_keeps_correct_points(rng):
    X = rng.random((100, 2))
    X[:70, 0] += 10
    y = np.ones(100, int)
    # predicts 1 only on the shifted rows, so rows 70..99 are wrong
    bb = FixedScores(lambda Z: (Z[:, 0] > 5).astype(float))
    g = fit_rerx(X, bb, y)
    assert g.kept_.tolist() == list(range(70))
    assert np.array_equal(g.sample(g.fixed_size), X[:70])


def test_rerx_perfect_bb_is_dummy(rng):
    X = rng.random((40, 2))
    y = (X[:, 0] > 0.5).astype(int)
    g = fit_rerx(X, FixedScores(lambda Z: (Z[:, 0] > 0.5).astype(float)), y)
    assert np.array_equal(g.sample(g.fixed_size), X)


def test_rerx_falls_back_when_all_wrong(rng):
    X = rng.random((20, 2))
    g = fit_rerx(X, FixedScores(lambda Z: np.ones(len(Z))), np.zeros(20, int))
    assert g.fallback == "dummy" and g.fixed_size == 20


def test_ssl_budget_examples():
    assert ssl_size(100, 4885) == 2392
    assert ssl_size(400, 10 ** 6) == 9600


def test_ssl_draws_distinct_pool_rows(rng):
    pool = rng.random((500, 3))
    g = fit_ssl(pool, 100, seed=2)
    assert g.fixed_size == ssl_size(100, 600) == 250
    assert len(set(g.indices_.tolist())) == 250
    assert np.array_equal(g.sample(250), pool[g.indices_])


# --- kde family ----------------------------------------------------------------

def test_kde_variance_identity(rng):
    X = rng.standard_normal((200, 3)) * [1.0, 0.5, 2.0]
    g = fit_kde_family(X, "kde", seed=4)
    s = g.sample(100_000)
    ok, err = kde_variance_ok(s, X, g.scale)
    assert ok, err
    assert g.scale == pytest.approx(bandwidths(X).mean(), abs=1e-15)


def test_kdem_marginal_means(rng):
    X = rng.random((150, 2)) * [1, 5]
    s = fit_kde_family(X, "kdem", seed=5).sample(100_000)
    sd = s.std(axis=0)
    assert np.all(np.abs(s.mean(axis=0) - X.mean(axis=0)) <= 3 * sd / np.sqrt(1e5))


def test_kdeb_points_inside_balls(rng):
    X = rng.random((80, 3))
    g = fit_kde_family(X, "kdeb", seed=6)
    assert g.radius == pytest.approx(kdeb_radius(X))
    assert max_distance_to_set(g.sample(20_000), X) <= g.radius + 1e-12


def test_kdeb_radius_small_sets():
    X = np.array([[0.0], [1.0], [3.0]])
    # two neighbors available: distances to the 2nd are 3, 2, 3
    assert kdeb_radius(X) == pytest.approx(8 / 3)


# --- gmm -----------------------------------------------------------------------

def test_gmm_single_cluster_selects_one_component():
    picks = []
    for seed in range(20):
        X = np.random.default_rng(seed).standard_normal((200, 2)) * 0.1 + 3
        picks.append(fit_gmm(X, seed=seed, max_components=5).n_components)
    assert Counter(picks).most_common(1)[0][0] == 1


def test_gmm_full_search_and_weights():
    rng = np.random.default_rng(0)
    X = np.vstack([rng.standard_normal((100, 2)) * 0.1, rng.standard_normal((100, 2)) * 0.1 + 5])
    g = fit_gmm(X, seed=0)
    assert max(k for _, k in g.bic_) == 29
    assert g.n_components == 2
    assert abs(g.weights.sum() - 1) <= 1e-12
    s = g.sample(1000)
    assert np.isfinite(s).all()


def test_gmmal_searches_diagonal_only():
    X = np.random.default_rng(1).standard_normal((60, 2))
    g = fit_gmm(X, diagonal_only=True, seed=0, max_components=3)
    assert {c for c, _ in g.bic_} == {"diag"} and g.kind == "gmmal"


# --- cmm -----------------------------------------------------------------------

def test_cmm_single_leaf_is_uniform(rng):
    X = rng.random((50, 2))
    tree = DecisionTree(max_leaves=1).fit(X, np.zeros(50))
    g = fit_cmm(X, tree, seed=0)
    assert g.prob.tolist() == [1.0]
    assert np.array_equal(g.low[0], X.min(axis=0)) and np.array_equal(g.high[0], X.max(axis=0))


def test_cmm_region_frequencies_follow_coverage():
    x = np.arange(100, dtype=float)[:, None]
    y = (x[:, 0] >= 90).astype(int)
    tree = cart_fit(x, y, max_leaves=2)
    g = fit_cmm(x, tree, seed=1)
    assert sorted(g.prob.tolist()) == [0.1, 0.9]
    pts, region = g.sample_regions(10_000)
    ok, z = frequencies_ok(region, g.prob)
    assert ok, z
    assert np.all((pts > g.low[region]) & (pts <= g.high[region]))


def test_cmm_forest_samples_inside_data_box(rng):
    X = rng.random((120, 3))
    y = (X[:, 0] > 0.4).astype(int)
    forest = RandomForest(n_trees=5, random_state=0).fit(X, y)
    s = fit_cmm(X, forest, seed=2).sample(5000)
    assert np.all(s >= X.min(axis=0)) and np.all(s <= X.max(axis=0))


# --- vva -----------------------------------------------------------------------

def test_vva_points_on_opposite_pairs(rng):
    X = rng.random((100, 2))
    bb = FixedScores(lambda Z: 1 / (1 + np.exp(-10 * (Z[:, 0] - 0.5))))
    g = fit_vva(X, bb, seed=0)
    assert g.pairs_.shape == (20, 2)
    pred = bb.predict(X)
    assert np.all(pred[g.pairs_[:, 0]] != pred[g.pairs_[:, 1]])
    L = 1000
    s = g.sample(L)
    pair = np.arange(L) % 20
    d = segment_distances(s, X[g.pairs_[pair, 0]], X[g.pairs_[pair, 1]])
    assert d.max() <= 1e-9
    # pairs are visited shortest first
    lengths = np.linalg.norm(X[g.pairs_[:, 0]] - X[g.pairs_[:, 1]], axis=1)
    assert np.all(np.diff(lengths) >= 0)


def test_vva_single_class_falls_back(rng):
    X = rng.random((30, 2))
    g = fit_vva(X, FixedScores(lambda Z: np.full(len(Z), 0.9)))
    assert g.fallback == "dummy"


# --- smote family and munge ----------------------------------------------------

def test_interpolation_formula():
    X = np.array([[0.0, 0.0], [1.0, 1.0]])
    g = Interpolator(X, np.array([[1], [0]]), gap="coordinate")

    class Half:
        def integers(self, n, size):
            return np.zeros(size, dtype=np.int64)

        def random(self, shape):
            return np.full(shape, 0.5)

    pts, _, _ = g.sample_pairs(1, Half())
    assert pts.tolist() == [[0.5, 0.5]]

    class One(Half):
        def random(self, shape):
            return np.ones(shape)

    assert g.sample_pairs(1, One())[0].tolist() == [[0.0, 0.0]]


def test_smote_points_on_neighbor_segments(rng):
    X = rng.random((60, 3))
    g = fit_smote_family(X, "smote", seed=1)
    pts, src, nb = g.sample_pairs(20_000)
    assert segment_distances(pts, X[src], X[nb]).max() <= 1e-9
    assert all(n in g.neighbors[s] for s, n in zip(src[:200], nb[:200]))
    assert np.all(pts >= X.min(axis=0)) and np.all(pts <= X.max(axis=0))


def test_smote_coordinate_gaps_stay_in_box(rng):
    X = rng.random((40, 2))
    s = fit_smote_family(X, "smote", seed=1, gap="coordinate").sample(5000)
    assert np.all(s >= X.min(axis=0)) and np.all(s <= X.max(axis=0))


def test_smote_needs_more_than_k_points():
    with pytest.raises(TooFewPoints):
        fit_smote_family(np.zeros((5, 2)), "smote")


def test_adasyn_quotas_sum_to_L(rng):
    X = rng.random((50, 2))
    g = fit_smote_family(X, "adasyn", seed=3)
    assert g.kind == "adasyn"
    assert g.sample(777).shape == (777, 2)
    assert _allocate(np.array([1.0, 1.0, 2.0]), 5).tolist() == [1, 1, 3]


def test_adasyn_grows_k_then_falls_back(rng, monkeypatch, caplog):
    from prelim.generators import neighbors

    tried = []

    def train_only(X, k):
        # every point's neighbors are train rows, so no hardness is ever found
        tried.append(k)
        return (np.arange(X.shape[0])[:, None] + 1 + np.arange(k)) % 30

    monkeypatch.setattr(neighbors, "_knn", train_only)
    g = fit_smote_family(rng.random((30, 2)), "adasyn", seed=0)
    assert tried == [5, 5, 10, 15, 20]
    assert g.fallback == "smote" and g.quotas is None
    assert "falling back" in caplog.text


def test_munge_noise_scale():
    X = np.array([[0.0, 0.0], [1.0, 0.0]])
    g = fit_munge(X, p=1.0, seed=0)
    assert g.spread.tolist() == [0.2, 0.2]
    s = g.sample(100_000)
    assert s[:, 1].std() == pytest.approx(0.2, rel=0.02)


def test_munge_zero_probability_replays(rng):
    X = rng.random((25, 3))
    s = fit_munge(X, p=0.0, seed=0).sample(300)
    assert max_distance_to_set(s, X) == 0


# --- interface -----------------------------------------------------------------

def test_all_kinds_finite_and_deterministic(linear_data):
    X, y = linear_data
    forest = RandomForest(n_trees=5, random_state=0).fit(X, y)
    bb = forest
    pool = np.random.default_rng(1).random((300, 3))
    for kind in KINDS:
        params = {"max_components": 3} if kind.startswith("gmm") else {}
        spec = GeneratorSpec(kind, params)
        a = fit_generator(spec, X, y, bb=bb, forest=forest, pool=pool, seed=11)
        b = fit_generator(spec, X, y, bb=bb, forest=forest, pool=pool, seed=11)
        L = a.fixed_size if a.fixed_size is not None else 500
        sa = a.sample(L)
        assert sa.shape == (L, 3) and np.isfinite(sa).all(), kind
        assert np.array_equal(sa, b.sample(L)), kind
        assert a.sample(0).shape == (0, 3)
    with pytest.raises(UnknownSpec):
        GeneratorSpec("copula")


def test_zero_variance_columns_tolerated(rng):
    X = np.column_stack([rng.random(40), np.zeros(40)])
    y = (X[:, 0] > 0.5).astype(int)
    forest = RandomForest(n_trees=3, random_state=0).fit(X, y)
    for kind in ("unif", "norm", "kdem", "kde", "kdeb", "cmm", "smote", "adasyn", "munge"):
        s = fit_generator(kind, X, y, forest=forest, seed=0).sample(200)
        assert np.isfinite(s).all(), kind
