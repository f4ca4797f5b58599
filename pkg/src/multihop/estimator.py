"""scikit-learn style front end for the whole pipeline."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .anchors import PerturbConfig, derive_anchors
from .models import Cart, FitConfig, Hard, TreeEnsemble, fit, predict
from .mstm import SearchConfig, mstm_search
from .seeding import derive_seed
from .transfer import ConfidenceWeight, Distill


class MultihopTransferClassifier(ClassifierMixin, BaseEstimator):
    """Fit a complex model, then transfer it into a simple one through searched intermediates.

    A validation set of ``validation_size`` rows (default ``min(500, 20%)``)
    is held out of ``X`` to score candidate chains.

    Parameters
    ----------
    complex_spec, simple_spec : architecture specs
    k : number of anchors derived from ``complex_spec``
    m : maximum number of intermediate hops
    delta : failure probability for the subset-size rule; all live anchors
        are tried at each hop when None
    method : "distill" or "confidence_weight" for the final hop; intermediate
        hops are always distilled
    perturb : apply the random architecture perturbation to anchors
    """

    def __init__(self, complex_spec=TreeEnsemble("boosted", 100, 6), simple_spec=Cart(3), k=10, m=3,
                 delta=None, method="distill", temperature=4.0, perturb=True,
                 validation_size=None, random_state=0, n_jobs=1):
        self.complex_spec = complex_spec
        self.simple_spec = simple_spec
        self.k = k
        self.m = m
        self.delta = delta
        self.method = method
        self.temperature = temperature
        self.perturb = perturb
        self.validation_size = validation_size
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _method(self):
        if self.method == "distill":
            return Distill(self.temperature)
        if self.method == "confidence_weight":
            return ConfidenceWeight()
        raise ValueError(f"method must be 'distill' or 'confidence_weight', got {self.method!r}")

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        check_classification_targets(y)
        self.classes_, codes = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise ValueError("need at least two classes")
        n = len(y)
        v = self.validation_size if self.validation_size is not None else min(500, int(0.2 * n))
        if not 0 < v < n:
            raise ValueError(f"validation_size {v} is infeasible for {n} rows")
        seed = int(self.random_state or 0)
        perm = np.random.default_rng(derive_seed(seed, 0)).permutation(n)
        val, tr = np.sort(perm[:v]), np.sort(perm[v:])
        n_classes = len(self.classes_)
        method = self._method()

        self.complex_ = fit(self.complex_spec, X[tr], Hard(codes[tr], n_classes),
                            FitConfig(seed=derive_seed(seed, 1)))
        self.anchors_ = derive_anchors(self.complex_spec, self.k)
        cfg = SearchConfig(m=self.m, delta=self.delta, seed=derive_seed(seed, 2), reward="accuracy",
                           hop_method=Distill(self.temperature), final_method=method)
        pcfg = PerturbConfig(identity=not self.perturb)
        self.simple_, self.plan_, self.trace_ = mstm_search(
            self.complex_, self.anchors_, self.simple_spec, (X[tr], codes[tr]), (X[val], codes[val]),
            cfg, pcfg, FitConfig(seed=derive_seed(seed, 3)), n_jobs=self.n_jobs)
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "simple_")
        X = check_array(X, dtype=np.float64)
        return predict(self.simple_, X)

    def predict(self, X):
        P = self.predict_proba(X)
        return self.classes_[np.argmax(P, axis=1)]
