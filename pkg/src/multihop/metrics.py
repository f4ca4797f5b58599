"""Evaluation metrics, split aggregation and the corrected-example confidence analysis."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .models import DecisionTree, TrainedModel, predict
from .models.base import PROB_EPS


@dataclass(frozen=True)
class MetricReport:
    name: str
    per_split: tuple
    mean: float
    std: float

    @property
    def value(self):
        return self.mean


@dataclass(frozen=True)
class ConfidenceSummary:
    sac: float
    cac: float
    scc: float | None
    ccc: float | None
    n_corrected: int
    corrected: np.ndarray = field(repr=False, default=None)

    def to_dict(self):
        return {"SAC": self.sac, "CAC": self.cac, "SCC": self.scc, "CCC": self.ccc,
                "n_corrected": self.n_corrected}


def _prob_rows_and_labels(predictions, labels):
    P = np.asarray(predictions, dtype=np.float64)
    y = np.asarray(labels)
    if P.ndim != 2 or y.shape != (P.shape[0],):
        raise ValueError(f"predictions {P.shape} and labels {y.shape} do not match")
    if P.shape[0] == 0:
        raise ValueError("empty input")
    return P, y.astype(np.int64)


def accuracy(predictions, labels) -> float:
    """Fraction of rows whose argmax (lowest index on ties) equals the label."""
    P, y = _prob_rows_and_labels(predictions, labels)
    return float(np.mean(np.argmax(P, axis=1) == y))


def mse(predictions, targets) -> float:
    p = np.asarray(predictions, dtype=np.float64).ravel()
    t = np.asarray(targets, dtype=np.float64).ravel()
    if p.shape != t.shape or p.size == 0:
        raise ValueError("mse needs two non-empty sequences of equal length")
    return float(np.mean((p - t) ** 2))


def cross_entropy(predictions, labels) -> float:
    """Mean ``-log p[true class]`` with probabilities clamped at 1e-12."""
    P, y = _prob_rows_and_labels(predictions, labels)
    p_true = np.clip(P[np.arange(len(y)), y], PROB_EPS, 1.0)
    return float(-np.mean(np.log(p_true)))


def weighted_gini_index(tree_model: TrainedModel, features, labels) -> float:
    """Test-set-weighted mean of the Gini impurity of each leaf's test labels."""
    est = tree_model.estimator
    if not isinstance(est, DecisionTree) or tree_model.n_classes == 0:
        raise TypeError("weighted Gini index needs a classification tree")
    y = np.asarray(labels, dtype=np.int64)
    leaves = est.apply(np.asarray(features, dtype=np.float64))
    if y.size == 0 or y.shape != leaves.shape:
        raise ValueError("need one label per non-empty test row")
    counts = np.zeros((est.tree_.n_nodes, tree_model.n_classes))
    np.add.at(counts, (leaves, y), 1.0)
    n_leaf = counts.sum(axis=1)
    used = n_leaf > 0
    p = counts[used] / n_leaf[used, None]
    leaf_gini = 1.0 - np.sum(p * p, axis=1)
    return float(np.dot(n_leaf[used], leaf_gini) / y.size)


def _true_class_confidence(model, X, y):
    P = predict(model, X)
    return P, P[np.arange(len(y)), y]


def confidence_analysis(simple_before: TrainedModel, simple_after: TrainedModel,
                        complex_model: TrainedModel, features, labels) -> ConfidenceSummary:
    """Average true-class confidence over all rows and over the corrected rows.

    A row is corrected when ``simple_before`` misclassifies it and
    ``simple_after`` gets it right. Corrected-set averages are ``None`` when
    nothing was corrected.
    """
    if min(simple_before.n_classes, simple_after.n_classes, complex_model.n_classes) == 0:
        raise TypeError("confidence analysis is only defined for classification")
    y = np.asarray(labels, dtype=np.int64)
    P_before, c_before = _true_class_confidence(simple_before, features, y)
    P_after = predict(simple_after, features)
    _, c_complex = _true_class_confidence(complex_model, features, y)
    corrected = (np.argmax(P_before, axis=1) != y) & (np.argmax(P_after, axis=1) == y)
    n = int(corrected.sum())
    return ConfidenceSummary(
        sac=float(c_before.mean()),
        cac=float(c_complex.mean()),
        scc=float(c_before[corrected].mean()) if n else None,
        ccc=float(c_complex[corrected].mean()) if n else None,
        n_corrected=n,
        corrected=corrected,
    )


def aggregate_splits(values, name="metric") -> MetricReport:
    """Mean and sample (n-1) standard deviation across splits."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("no split values to aggregate")
    std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    return MetricReport(name=name, per_split=tuple(v.tolist()), mean=float(v.mean()), std=std)


REWARDS = ("accuracy", "neg_mse", "neg_cross_entropy")


def reward(name: str, model: TrainedModel, features, targets) -> float:
    """Validation reward to maximize."""
    out = predict(model, features)
    if name == "accuracy":
        if model.n_classes == 0:
            raise ValueError("accuracy reward needs a classifier")
        return accuracy(out, targets)
    if name == "neg_cross_entropy":
        if model.n_classes == 0:
            raise ValueError("cross-entropy reward needs a classifier")
        return -cross_entropy(out, targets)
    if name == "neg_mse":
        if model.n_classes > 0:
            raise ValueError("MSE reward needs a regressor")
        return -mse(out[:, 0], targets)
    raise ValueError(f"unknown reward {name!r}; expected one of {REWARDS}")
