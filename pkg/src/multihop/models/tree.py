"""CART trees grown breadth-first with an exact, vectorized split search.

All nodes of a level are split at once: rows are kept sorted by feature
value inside contiguous per-node blocks, so cumulative sums give every
candidate split of every node and feature in a handful of array operations.

The split criterion is the weighted sum-of-squares reduction over target
rows. On one-hot rows this is exactly the weighted Gini decrease (the SSE of
one-hot vectors around their mean is ``n * gini``), on probability rows it is
probability matching, and with a single column it is ordinary regression.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_classification_targets, check_sample_weight
from .specs import CLASSIFICATION, REGRESSION

_REL_GAIN_TOL = 1e-12


def gini(counts) -> float:
    """Gini impurity ``1 - sum p_i^2`` of a class-count vector."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if not total > 0:
        raise ValueError("gini needs at least one positive count")
    p = counts / total
    return float(1.0 - np.sum(p * p))


@dataclass
class TreeStructure:
    feature: np.ndarray    # -1 marks a leaf
    threshold: np.ndarray  # go left when x[feature] <= threshold
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray      # (n_nodes, n_outputs) weighted mean target row
    max_depth: int

    @property
    def n_nodes(self):
        return len(self.feature)

    @property
    def leaves(self):
        return np.flatnonzero(self.feature < 0)

    def apply(self, X):
        idx = np.zeros(X.shape[0], dtype=np.intp)
        rows = np.arange(X.shape[0])
        for _ in range(self.max_depth):
            f = self.feature[idx]
            internal = f >= 0
            if not internal.any():
                break
            go_left = X[rows, np.where(internal, f, 0)] <= self.threshold[idx]
            idx = np.where(internal, np.where(go_left, self.left[idx], self.right[idx]), idx)
        return idx


def presort(X):
    """Per-feature stable sort order; reusable across trees grown on the same X."""
    return np.argsort(X, axis=0, kind="stable")


def build_tree(X, Y, w, max_depth, min_leaf=1, max_features=None, rng=None,
               order=None) -> TreeStructure:
    """Grow a tree on targets ``Y`` (N x K) with sample weights ``w``.

    ``max_features`` < d draws a random feature subset per node from ``rng``.
    Rows with zero weight are ignored, including for ``min_leaf`` counts.
    ``order`` is an optional :func:`presort` of ``X``.
    """
    n, d = X.shape
    if order is None:
        order = presort(X)
    keep = w > 0
    # inactive rows are parked at level id -1 and never enter a block
    WY = w[:, None] * Y

    feature, threshold, left, right = [-1], [np.nan], [-1], [-1]
    values = [WY[keep].sum(axis=0) / w[keep].sum()]

    cols = np.arange(d)[None, :]
    assign = np.where(keep, 0, -1)  # position in the current level, -1 once in a leaf
    level = [0]

    for _ in range(max_depth):
        active = assign >= 0
        na = int(active.sum())
        if na == 0:
            break
        mask = active[order]
        O = order.T[mask.T].reshape(d, na).T
        # level ids fit in int16, where numpy's stable sort is a radix sort
        O = np.take_along_axis(O, np.argsort(assign[O].astype(np.int16), axis=0, kind="stable"), axis=0)
        gpos = assign[O[:, 0]]
        counts = np.bincount(gpos, minlength=len(level))
        ends = np.cumsum(counts)
        starts = ends - counts
        pos = np.arange(na)

        Xs = X[O, cols]
        cW = np.vstack([np.zeros((1, d)), np.cumsum(w[O], axis=0)])
        cWY = np.concatenate([np.zeros((1, d, Y.shape[1])), np.cumsum(WY[O], axis=0)])
        totW = cW[ends] - cW[starts]
        totWY = cWY[ends] - cWY[starts]
        WL = cW[1:] - cW[starts][gpos]
        WYL = cWY[1:] - cWY[starts][gpos]
        WR = totW[gpos] - WL
        WYR = totWY[gpos] - WYL

        nL = pos - starts[gpos] + 1
        nR = counts[gpos] - nL
        x_next = np.vstack([Xs[1:], np.full((1, d), np.inf)])
        valid = ((nL >= min_leaf) & (nR >= min_leaf))[:, None] & (Xs < x_next) & (WR > 0)
        if max_features is not None and max_features < d:
            pick = np.argsort(rng.random_sample((len(level), d)), axis=1)[:, :max_features]
            allowed = np.zeros((len(level), d), dtype=bool)
            np.put_along_axis(allowed, pick, True, axis=1)
            valid &= allowed[gpos]

        parent = (totWY ** 2).sum(axis=-1) / totW
        with np.errstate(divide="ignore", invalid="ignore"):
            score = (WYL ** 2).sum(axis=-1) / WL + (WYR ** 2).sum(axis=-1) / WR
        gain = np.where(valid, score - parent[gpos], -np.inf)

        node_best = np.maximum.reduceat(gain.max(axis=1), starts)
        hit = (gain == node_best[gpos][:, None]) & valid
        key = np.where(hit, cols * na + pos[:, None], np.iinfo(np.int64).max)
        node_key = np.minimum.reduceat(key.min(axis=1), starts)

        tol = _REL_GAIN_TOL * np.abs(parent).max(axis=1)
        split = np.isfinite(node_best) & (node_best > tol)
        if not split.any():
            break

        split_rank = np.full(len(level), -1, dtype=np.intp)
        split_rank[split] = np.arange(int(split.sum()))
        node_feat = np.zeros(len(level), dtype=np.intp)
        node_thr = np.zeros(len(level))
        next_level = []
        for li in np.flatnonzero(split):
            f, p = divmod(int(node_key[li]), na)
            lo, hi = Xs[p, f], Xs[p + 1, f]
            thr = 0.5 * (lo + hi)
            if thr >= hi:
                thr = lo
            node_feat[li], node_thr[li] = f, thr
            tid = level[li]
            feature[tid], threshold[tid] = f, thr
            for child_w, child_wy in ((WL[p, f], WYL[p, f]), (WR[p, f], WYR[p, f])):
                feature.append(-1)
                threshold.append(np.nan)
                left.append(-1)
                right.append(-1)
                values.append(child_wy / child_w)
                next_level.append(len(feature) - 1)
            left[tid], right[tid] = next_level[-2], next_level[-1]

        rows = np.flatnonzero(active)
        li = assign[rows]
        r = split_rank[li]
        goes_right = X[rows, node_feat[li]] > node_thr[li]
        new_assign = np.full(n, -1, dtype=np.intp)
        new_assign[rows] = np.where(r >= 0, 2 * r + goes_right, -1)
        assign = new_assign
        level = next_level

    return TreeStructure(
        feature=np.asarray(feature, dtype=np.intp),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.intp),
        right=np.asarray(right, dtype=np.intp),
        value=np.vstack(values),
        max_depth=max_depth,
    )


def _n_features_to_draw(max_features, d):
    if max_features is None:
        return None
    if max_features == "sqrt":
        return max(1, int(np.sqrt(d)))
    return max(1, min(d, int(max_features)))


class DecisionTree(BaseEstimator):
    """Single CART tree for classification (hard or soft targets) or regression.

    Classification leaves predict the weighted mean target row, so a tree fit
    on teacher probabilities matches them in squared error and a tree fit on
    labels is an ordinary Gini tree.
    """

    def __init__(self, max_depth=3, min_leaf=1, task=CLASSIFICATION, max_features=None,
                 n_classes=None, random_state=None):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.task = task
        self.max_features = max_features
        self.n_classes = n_classes
        self.random_state = random_state

    def fit(self, X, y, sample_weight=None, order=None):
        X = check_array(X, dtype=np.float64)
        w = check_sample_weight(sample_weight, X.shape[0])
        if self.task == CLASSIFICATION:
            Y, self.n_classes_ = check_classification_targets(y, self.n_classes)
            self.classes_ = np.arange(self.n_classes_)
        elif self.task == REGRESSION:
            y = np.asarray(y, dtype=np.float64)
            if y.ndim != 1:
                raise ValueError("regression targets must be 1-D")
            Y = y[:, None]
        else:
            raise ValueError(f"unknown task {self.task!r}")
        if Y.shape[0] != X.shape[0]:
            raise ValueError("X and y have different numbers of rows")
        rng = check_random_state(self.random_state)
        self.tree_ = build_tree(X, Y, w, self.max_depth, self.min_leaf,
                                _n_features_to_draw(self.max_features, X.shape[1]), rng, order)
        if self.task == CLASSIFICATION:
            v = np.clip(self.tree_.value, 0.0, None)
            self.tree_.value = v / v.sum(axis=1, keepdims=True)
        self.n_features_in_ = X.shape[1]
        return self

    def apply(self, X):
        """Leaf index reached by every row."""
        check_is_fitted(self, "tree_")
        X = check_array(X, dtype=np.float64)
        return self.tree_.apply(X)

    def predict_proba(self, X):
        if self.task != CLASSIFICATION:
            raise AttributeError("predict_proba is only available for classification trees")
        return self.tree_.value[self.apply(X)]

    def predict(self, X):
        if self.task == CLASSIFICATION:
            return np.argmax(self.predict_proba(X), axis=1)
        return self.tree_.value[self.apply(X), 0]

    def score(self, X, y, sample_weight=None):
        mixin = ClassifierMixin if self.task == CLASSIFICATION else RegressorMixin
        return mixin.score(self, X, y, sample_weight)
