"""Weighted least squares, bisquare IRLS and the polynomial/linear regressors."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_sample_weight

RIDGE = 1e-10
MAD_NORMALIZER = 0.6745


def wls_solve(design, y, weights=None):
    """Minimize ``sum w_i (y_i - design_i @ beta)^2``.

    Full-rank problems go through an SVD least-squares solve of the
    square-root-weighted system. Rank-deficient ones fall back to normal
    equations with a ``1e-10 * I`` ridge so degenerate architectures never
    abort a search.
    """
    design = np.asarray(design, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if design.ndim != 2 or y.shape != (design.shape[0],):
        raise ValueError(f"design {design.shape} and y {y.shape} do not match")
    n, p = design.shape
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (n,):
        raise ValueError("weights must have one entry per row")
    if not (np.all(np.isfinite(design)) and np.all(np.isfinite(y)) and np.all(np.isfinite(w))):
        raise ValueError("non-finite values in least-squares inputs")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    active = np.count_nonzero(w > 0)
    if p > active:
        raise ValueError(f"{p} coefficients but only {active} rows with positive weight")

    sw = np.sqrt(w)
    A = design * sw[:, None]
    b = y * sw
    beta, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < p:
        beta = np.linalg.solve(A.T @ A + RIDGE * np.eye(p), A.T @ b)
    return beta


def bisquare_weights(u):
    """Tukey bisquare IRLS weights for residuals already divided by c*scale."""
    return np.where(np.abs(u) < 1.0, (1.0 - u ** 2) ** 2, 0.0)


def bisquare_rho(r, c):
    """Tukey bisquare loss of standardized residuals ``r``."""
    r = np.asarray(r, dtype=np.float64)
    inside = np.abs(r) < c
    return np.where(inside, c ** 2 / 6.0 * (1.0 - (1.0 - (r / c) ** 2) ** 3), c ** 2 / 6.0)


def mad_scale(r):
    r = np.asarray(r, dtype=np.float64)
    return np.median(np.abs(r - np.median(r))) / MAD_NORMALIZER


def irls_bisquare_fit(design, y, c=4.685, tol=1e-8, max_iter=100, weights=None,
                      return_history=False):
    """Bisquare M-estimate by iteratively reweighted least squares.

    Starts from the (prior-weighted) least-squares solution. Every iteration
    re-estimates the residual scale as MAD/0.6745 and takes one weighted
    least-squares step, which cannot increase the bisquare objective at that
    iteration's scale. Stops once the largest coefficient change is below
    ``tol``.

    With ``return_history`` a list of per-iteration dicts is returned as well;
    each holds ``scale``, ``objective_before`` and ``objective_after`` (both at
    that scale) and the robustness weights in ``[0, 1]``.
    """
    y = np.asarray(y, dtype=np.float64)
    prior = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=np.float64)
    beta = wls_solve(design, y, prior)
    design = np.asarray(design, dtype=np.float64)
    history = []
    # residual scales at rounding level count as zero: the fit is already exact
    zero_scale = 1e-12 * max(1.0, float(np.max(np.abs(y))))
    for _ in range(max_iter):
        r = y - design @ beta
        scale = mad_scale(r[prior > 0])
        if scale <= zero_scale:
            break
        robust = bisquare_weights(r / (c * scale))
        if not np.any(robust * prior > 0):
            break
        new_beta = wls_solve(design, y, prior * robust)
        if return_history:
            r_new = y - design @ new_beta
            history.append({
                "scale": scale,
                "objective_before": float(np.sum(prior * bisquare_rho(r / scale, c))),
                "objective_after": float(np.sum(prior * bisquare_rho(r_new / scale, c))),
                "robust_weights": robust,
            })
        step = np.max(np.abs(new_beta - beta))
        beta = new_beta
        if step < tol:
            break
    if return_history:
        return beta, history
    return beta


def vandermonde(x, degree):
    x = np.asarray(x, dtype=np.float64).ravel()
    return np.vander(x, degree + 1, increasing=True)


def _with_intercept(X):
    return np.hstack([np.ones((X.shape[0], 1)), X])


class PolynomialRegressor(RegressorMixin, BaseEstimator):
    """Univariate least-squares polynomial; ``coef_`` in increasing powers."""

    def __init__(self, degree=1):
        self.degree = degree

    def fit(self, X, y, sample_weight=None):
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != 1:
            raise ValueError(f"PolynomialRegressor takes one feature, got {X.shape[1]}")
        y = np.asarray(y, dtype=np.float64).ravel()
        w = check_sample_weight(sample_weight, X.shape[0])
        self.coef_ = wls_solve(vandermonde(X[:, 0], self.degree), y, w)
        self.n_features_in_ = 1
        return self

    @classmethod
    def from_coefficients(cls, coef):
        """Build a fitted regressor with fixed coefficients (lowest power first)."""
        coef = np.asarray(coef, dtype=np.float64)
        est = cls(degree=len(coef) - 1)
        est.coef_ = coef
        est.n_features_in_ = 1
        return est

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return vandermonde(X[:, 0], self.degree) @ self.coef_


class LinearLSRegressor(RegressorMixin, BaseEstimator):
    """Ordinary (optionally weighted) least squares with an intercept.

    ``coef_[0]`` is the intercept.
    """

    def fit(self, X, y, sample_weight=None):
        X = check_array(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).ravel()
        w = check_sample_weight(sample_weight, X.shape[0])
        self.coef_ = wls_solve(_with_intercept(X), y, w)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return _with_intercept(X) @ self.coef_


class RobustLinearRegressor(RegressorMixin, BaseEstimator):
    """Linear model with an intercept fit under Tukey's bisquare loss."""

    def __init__(self, tuning_c=4.685, tol=1e-8, max_iter=100):
        self.tuning_c = tuning_c
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y, sample_weight=None):
        X = check_array(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).ravel()
        w = check_sample_weight(sample_weight, X.shape[0])
        self.coef_ = irls_bisquare_fit(_with_intercept(X), y, c=self.tuning_c, tol=self.tol,
                                       max_iter=self.max_iter, weights=w)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return _with_intercept(X) @ self.coef_
