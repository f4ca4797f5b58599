"""One entry point for training any architecture in the zoo.

``fit(spec, X, targets, cfg)`` builds the sklearn-style estimator a spec
describes, trains it, and wraps it in an immutable :class:`TrainedModel`
whose ``predict`` always returns a 2-D array: probability rows for
classifiers, an ``(M, 1)`` column for regressors.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Union

import numpy as np

from .ensemble import BoostedTrees, RandomForest
from .linear import LinearLSRegressor, PolynomialRegressor, RobustLinearRegressor
from .mlp import MLP
from .specs import (
    CLASSIFICATION,
    REGRESSION,
    ArchSpec,
    Cart,
    LinearLS,
    Mlp,
    Polynomial,
    RobustLinear,
    TreeEnsemble,
    spec_task,
)
from .tree import DecisionTree

PROB_EPS = 1e-12


class TaskMismatchError(ValueError):
    """Targets or teachers are incompatible with the requested architecture."""


@dataclass(frozen=True)
class Hard:
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or not np.issubdtype(labels.dtype, np.integer):
            raise ValueError("hard labels must be a 1-D integer array")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise ValueError(f"labels must lie in [0, {self.n_classes})")
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.labels)


@dataclass(frozen=True)
class Soft:
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 2 or np.any(p < 0) or np.any(p > 1):
            raise ValueError("soft targets must be a matrix of probabilities")
        if not np.allclose(p.sum(axis=1), 1.0, rtol=0, atol=1e-9):
            raise ValueError("soft target rows must sum to 1")
        object.__setattr__(self, "probs", p)

    @property
    def n_classes(self):
        return self.probs.shape[1]

    def __len__(self):
        return len(self.probs)


@dataclass(frozen=True)
class Real:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(v)):
            raise ValueError("real targets must be finite")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)


TargetSpec = Union[Hard, Soft, Real]


@dataclass(frozen=True)
class FitConfig:
    seed: int = 0
    sample_weights: np.ndarray | None = None
    epochs: int = 50
    learning_rate: float = 0.05
    batch_size: int = 32
    irls_tol: float = 1e-8
    irls_max_iter: int = 100

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def with_weights(self, weights):
        return replace(self, sample_weights=weights)


@dataclass(frozen=True, eq=False)
class TrainedModel:
    spec: ArchSpec
    estimator: Any
    n_classes: int
    n_features: int
    info: dict = field(default_factory=dict)

    @property
    def task(self):
        return CLASSIFICATION if self.n_classes > 0 else REGRESSION

    def predict(self, X):
        return predict(self, X)


def _task_for(targets):
    return REGRESSION if isinstance(targets, Real) else CLASSIFICATION


def build_estimator(spec: ArchSpec, task: str, n_classes: int | None, cfg: FitConfig):
    """Unfitted estimator for ``spec``; ``task`` decides adaptive families."""
    if isinstance(spec, Polynomial):
        return PolynomialRegressor(degree=spec.degree)
    if isinstance(spec, LinearLS):
        return LinearLSRegressor()
    if isinstance(spec, RobustLinear):
        return RobustLinearRegressor(tuning_c=spec.tuning_c, tol=cfg.irls_tol,
                                     max_iter=cfg.irls_max_iter)
    if isinstance(spec, Cart):
        return DecisionTree(max_depth=spec.max_depth, min_leaf=spec.min_leaf, task=task,
                            n_classes=n_classes, random_state=cfg.seed)
    if isinstance(spec, TreeEnsemble):
        if spec.kind == "boosted":
            return BoostedTrees(n_trees=spec.n_trees, max_depth=spec.max_depth,
                                learning_rate=spec.learning_rate, task=task, n_classes=n_classes)
        return RandomForest(n_trees=spec.n_trees, max_depth=spec.max_depth, task=task,
                            n_classes=n_classes, random_state=cfg.seed)
    if isinstance(spec, Mlp):
        return MLP(hidden_widths=spec.hidden_widths, output=spec.output, epochs=cfg.epochs,
                   learning_rate=cfg.learning_rate, batch_size=cfg.batch_size,
                   n_classes=n_classes, random_state=cfg.seed)
    raise TypeError(f"not an architecture spec: {spec!r}")


def _check_features(X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("features must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError("features contain non-finite values")
    return X


def fit(spec: ArchSpec, features, targets: TargetSpec, cfg: FitConfig | None = None) -> TrainedModel:
    """Train ``spec`` on ``features`` against ``targets``."""
    cfg = cfg or FitConfig()
    X = _check_features(features)
    if len(targets) != X.shape[0]:
        raise ValueError(f"{X.shape[0]} feature rows but {len(targets)} targets")
    task = _task_for(targets)
    fixed = spec_task(spec)
    if fixed is not None and fixed != task:
        kind = type(targets).__name__
        raise TaskMismatchError(f"{kind} targets given to a {fixed} spec {spec!r}")
    if isinstance(spec, Polynomial) and X.shape[1] != 1:
        raise ValueError(f"Polynomial specs need exactly one feature, got {X.shape[1]}")

    if isinstance(targets, Hard):
        y, n_classes = targets.labels, targets.n_classes
    elif isinstance(targets, Soft):
        y, n_classes = targets.probs, targets.n_classes
    else:
        y, n_classes = targets.values, 0
    est = build_estimator(spec, task, n_classes or None, cfg)
    est.fit(X, y, sample_weight=cfg.sample_weights)
    return TrainedModel(spec=spec, estimator=est, n_classes=n_classes, n_features=X.shape[1])


def predict(model: TrainedModel, features) -> np.ndarray:
    """Probability rows (M x n_classes) or an (M x 1) column of reals."""
    X = _check_features(features)
    if X.shape[1] != model.n_features:
        raise ValueError(f"model expects {model.n_features} features, got {X.shape[1]}")
    if model.n_classes > 0:
        P = np.asarray(model.estimator.predict_proba(X), dtype=np.float64)
        P = np.clip(P, 0.0, 1.0)
        return P / P.sum(axis=1, keepdims=True)
    return np.asarray(model.estimator.predict(X), dtype=np.float64).reshape(-1, 1)


def temperature_soften(probs, T: float) -> np.ndarray:
    """Row-wise ``softmax(log(p) / T)`` with zeros clamped to 1e-12 first."""
    if not T > 0:
        raise ValueError(f"temperature must be positive, got {T}")
    logp = np.log(np.clip(np.asarray(probs, dtype=np.float64), PROB_EPS, None)) / T
    logp -= logp.max(axis=1, keepdims=True)
    e = np.exp(logp)
    return e / e.sum(axis=1, keepdims=True)
