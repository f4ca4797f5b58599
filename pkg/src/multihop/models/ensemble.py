"""Gradient boosted trees and random forests built on :mod:`multihop.models.tree`."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_classification_targets, check_sample_weight
from .specs import CLASSIFICATION, REGRESSION
from .tree import DecisionTree, build_tree, presort

_P_CLIP = 1e-12
_NEWTON_EPS = 1e-12
_MAX_INT = np.iinfo(np.int32).max


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _logit(p):
    p = np.clip(p, 1e-6, 1 - 1e-6)
    return np.log(p / (1 - p))


class BoostedTrees(BaseEstimator):
    """Gradient boosting with Newton leaf values.

    Classification minimizes logistic loss. Binary problems use one score;
    with more classes every class gets its own one-vs-rest booster and the
    sigmoid outputs are renormalized into probability rows. Soft targets are
    accepted as probability rows and enter the loss as fractional labels.
    Regression minimizes squared loss.
    """

    def __init__(self, n_trees=100, max_depth=3, learning_rate=0.1, min_leaf=1,
                 task=CLASSIFICATION, n_classes=None):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_leaf = min_leaf
        self.task = task
        self.n_classes = n_classes

    def fit(self, X, y, sample_weight=None):
        X = check_array(X, dtype=np.float64)
        w = check_sample_weight(sample_weight, X.shape[0])
        if self.task == CLASSIFICATION:
            Y, self.n_classes_ = check_classification_targets(y, self.n_classes)
            self.classes_ = np.arange(self.n_classes_)
            targets = Y[:, 1:] if self.n_classes_ == 2 else Y
        elif self.task == REGRESSION:
            targets = np.asarray(y, dtype=np.float64).reshape(-1, 1)
        else:
            raise ValueError(f"unknown task {self.task!r}")

        n_scores = targets.shape[1]
        if self.task == CLASSIFICATION:
            self.init_ = _logit((w[:, None] * targets).sum(axis=0) / w.sum())
        else:
            self.init_ = (w[:, None] * targets).sum(axis=0) / w.sum()
        F = np.tile(self.init_, (X.shape[0], 1))
        order = presort(X)
        self.estimators_ = []
        for _ in range(self.n_trees):
            round_trees = []
            for k in range(n_scores):
                if self.task == CLASSIFICATION:
                    p = _sigmoid(F[:, k])
                    resid = targets[:, k] - p
                    hess = p * (1 - p)
                else:
                    resid = targets[:, k] - F[:, k]
                    hess = np.ones_like(resid)
                tree = build_tree(X, resid[:, None], w, self.max_depth, self.min_leaf, order=order)
                leaf = tree.apply(X)
                num = np.bincount(leaf, weights=w * resid, minlength=tree.n_nodes)
                den = np.bincount(leaf, weights=w * hess, minlength=tree.n_nodes)
                tree.value = (num / np.maximum(den, _NEWTON_EPS))[:, None]
                F[:, k] += self.learning_rate * tree.value[leaf, 0]
                round_trees.append(tree)
            self.estimators_.append(round_trees)
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "estimators_")
        X = check_array(X, dtype=np.float64)
        F = np.tile(self.init_, (X.shape[0], 1))
        for round_trees in self.estimators_:
            for k, tree in enumerate(round_trees):
                F[:, k] += self.learning_rate * tree.value[tree.apply(X), 0]
        return F

    def predict_proba(self, X):
        if self.task != CLASSIFICATION:
            raise AttributeError("predict_proba is only available for classification")
        P = _sigmoid(self.decision_function(X))
        if self.n_classes_ == 2:
            return np.hstack([1.0 - P, P])
        P = np.clip(P, _P_CLIP, None)
        return P / P.sum(axis=1, keepdims=True)

    def predict(self, X):
        if self.task == CLASSIFICATION:
            return np.argmax(self.predict_proba(X), axis=1)
        return self.decision_function(X)[:, 0]


class RandomForest(BaseEstimator):
    """Bagged CART trees with per-node feature subsampling.

    Bootstrap draws enter as integer multipliers on the sample weights, so a
    weighted forest and a bootstrap forest share one code path.
    """

    def __init__(self, n_trees=100, max_depth=6, min_leaf=1, max_features="sqrt",
                 bootstrap=True, task=CLASSIFICATION, n_classes=None, random_state=None):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.task = task
        self.n_classes = n_classes
        self.random_state = random_state

    def fit(self, X, y, sample_weight=None):
        X = check_array(X, dtype=np.float64)
        w = check_sample_weight(sample_weight, X.shape[0])
        n = X.shape[0]
        if self.task == CLASSIFICATION:
            _, self.n_classes_ = check_classification_targets(y, self.n_classes)
            self.classes_ = np.arange(self.n_classes_)
        rng = check_random_state(self.random_state)
        order = presort(X)
        self.estimators_ = []
        for _ in range(self.n_trees):
            tree = DecisionTree(max_depth=self.max_depth, min_leaf=self.min_leaf, task=self.task,
                                max_features=self.max_features,
                                n_classes=getattr(self, "n_classes_", None),
                                random_state=rng.randint(_MAX_INT))
            tw = w
            if self.bootstrap:
                tw = w * np.bincount(rng.randint(0, n, n), minlength=n)
                if not np.any(tw > 0):
                    tw = w
            tree.fit(X, y, sample_weight=tw, order=order)
            self.estimators_.append(tree)
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        if self.task != CLASSIFICATION:
            raise AttributeError("predict_proba is only available for classification")
        check_is_fitted(self, "estimators_")
        P = np.mean([t.predict_proba(X) for t in self.estimators_], axis=0)
        return P / P.sum(axis=1, keepdims=True)

    def predict(self, X):
        check_is_fitted(self, "estimators_")
        if self.task == CLASSIFICATION:
            return np.argmax(self.predict_proba(X), axis=1)
        return np.mean([t.predict(X) for t in self.estimators_], axis=0)

