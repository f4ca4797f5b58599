import numpy as np
import pytest
from hypothesis import given, strategies as st
from sklearn.tree import DecisionTreeClassifier

from multihop.models import Cart, DecisionTree, FitConfig, Hard, Real, Soft, fit, gini, predict


class TestGini:
    @pytest.mark.parametrize("counts, expected", [((10, 0), 0.0), ((5, 5), 0.5), ((3, 1), 0.375)])
    def test_values(self, counts, expected):
        assert gini(counts) == pytest.approx(expected, abs=1e-15)

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            gini((0, 0))


class TestCart:
    def test_stump_separates(self):
        x = np.linspace(-1, 1, 41)
        y = (x >= 0).astype(int)
        m = fit(Cart(1), x[:, None], Hard(y, 2))
        tree = m.estimator.tree_
        assert tree.n_nodes == 3
        assert x[y == 0].max() <= tree.threshold[0] < x[y == 1].min()
        assert np.mean(np.argmax(predict(m, x[:, None]), axis=1) == y) == 1.0

    @pytest.mark.parametrize("depth", [1, 2, 3])
    def test_matches_reference_gini_tree(self, blobs, depth):
        # same exhaustive Gini search as an established implementation
        X, y = blobs
        ours = DecisionTree(max_depth=depth).fit(X, y)
        ref = DecisionTreeClassifier(max_depth=depth, random_state=0).fit(X, y)
        np.testing.assert_allclose(ours.predict_proba(X), ref.predict_proba(X), atol=1e-12)

    def test_rows_sum_to_one(self, blobs):
        X, y = blobs
        P = DecisionTree(max_depth=4).fit(X, y).predict_proba(X[:7])
        np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)
        assert np.all((P >= 0) & (P <= 1))

    def test_soft_targets_fit_leaf_means(self, rng):
        X = rng.normal(size=(100, 2))
        p1 = 1 / (1 + np.exp(-3 * X[:, 0]))
        P = np.column_stack([1 - p1, p1])
        m = fit(Cart(2), X, Soft(P))
        leaves = m.estimator.apply(X)
        out = predict(m, X)
        for leaf in np.unique(leaves):
            np.testing.assert_allclose(out[leaves == leaf][0], P[leaves == leaf].mean(axis=0), atol=1e-12)

    def test_regression_tree(self):
        x = np.arange(10.0)
        y = np.where(x < 5, 1.0, 3.0)
        m = fit(Cart(1, task="regression"), x[:, None], Real(y))
        np.testing.assert_allclose(predict(m, x[:, None])[:, 0], y)

    def test_min_leaf_respected(self, blobs):
        X, y = blobs
        est = DecisionTree(max_depth=6, min_leaf=15).fit(X, y)
        counts = np.bincount(est.apply(X), minlength=est.tree_.n_nodes)
        assert counts[est.tree_.leaves].min() >= 15

    def test_deterministic(self, blobs):
        X, y = blobs
        a = DecisionTree(max_depth=4).fit(X, y).tree_
        b = DecisionTree(max_depth=4).fit(X, y).tree_
        np.testing.assert_array_equal(a.threshold, b.threshold)
        np.testing.assert_array_equal(a.value, b.value)

    def test_zero_weight_rows_ignored(self, blobs):
        X, y = blobs
        w = np.ones(len(y))
        w[::3] = 0.0
        keep = w > 0
        a = DecisionTree(max_depth=3).fit(X, y, sample_weight=w)
        b = DecisionTree(max_depth=3).fit(X[keep], y[keep])
        np.testing.assert_allclose(a.predict_proba(X), b.predict_proba(X), atol=1e-12)


@given(st.integers(0, 2 ** 31 - 1))
def test_weight_one_equivalence(seed):
    rng = np.random.default_rng(seed)
    X, y = rng.normal(size=(60, 3)), rng.integers(0, 3, 60)
    a = DecisionTree(max_depth=3).fit(X, y)
    b = DecisionTree(max_depth=3).fit(X, y, sample_weight=np.ones(60))
    np.testing.assert_array_equal(a.tree_.feature, b.tree_.feature)
    np.testing.assert_array_equal(a.tree_.threshold, b.tree_.threshold)
    np.testing.assert_array_equal(a.tree_.value, b.tree_.value)


@given(st.integers(0, 2 ** 31 - 1))
def test_doubled_weight_equals_duplicated_row(seed):
    rng = np.random.default_rng(seed)
    X = np.round(rng.normal(size=(40, 2)), 3)
    y = rng.integers(0, 2, 40)
    dup = rng.choice(40, 8, replace=False)
    w = np.ones(40)
    w[dup] = 2.0
    a = DecisionTree(max_depth=3).fit(X, y, sample_weight=w)
    b = DecisionTree(max_depth=3).fit(np.vstack([X, X[dup]]), np.concatenate([y, y[dup]]))
    np.testing.assert_array_equal(a.tree_.feature, b.tree_.feature)
    np.testing.assert_array_equal(a.tree_.threshold, b.tree_.threshold)
    np.testing.assert_allclose(a.tree_.value, b.tree_.value, atol=1e-12)
