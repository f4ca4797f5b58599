"""Fully connected ReLU network trained with seeded mini-batch SGD."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_classification_targets, check_sample_weight


def init_params(sizes, rng):
    """Uniform fan-in scaled initialization: U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        params.append((rng.uniform(-bound, bound, (fan_in, fan_out)),
                       rng.uniform(-bound, bound, fan_out)))
    return params


def forward(params, X, output="softmax"):
    """Return the output rows and the list of hidden pre-activations/activations."""
    cache = []
    a = X
    for W, b in params[:-1]:
        z = a @ W + b
        cache.append((a, z))
        a = np.maximum(z, 0.0)
    W, b = params[-1]
    z = a @ W + b
    cache.append((a, z))
    if output == "softmax":
        z = z - z.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True), cache
    return z, cache


def loss_and_grad(params, X, Y, w, output="softmax", norm=None):
    """Weighted loss and its gradient with respect to every (W, b).

    Softmax outputs use cross-entropy against target rows ``Y`` (hard labels
    one-hot, soft targets as given); linear outputs use half squared error.
    The weighted sum is divided by ``norm`` (default ``w.sum()``).
    """
    out, cache = forward(params, X, output)
    norm = w.sum() if norm is None else norm
    if output == "softmax":
        per_row = -np.sum(Y * np.log(np.clip(out, 1e-300, None)), axis=1)
        # d(CE)/dz = p * sum(Y) - Y, which is p - Y for normalized rows
        delta = out * Y.sum(axis=1, keepdims=True) - Y
    else:
        diff = out - Y
        per_row = 0.5 * np.sum(diff ** 2, axis=1)
        delta = diff
    loss = float(np.dot(w, per_row) / norm)
    delta = delta * (w / norm)[:, None]

    grads = [None] * len(params)
    for i in range(len(params) - 1, -1, -1):
        a, _ = cache[i]
        W, _ = params[i]
        grads[i] = (a.T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = (delta @ W.T) * (cache[i - 1][1] > 0)
    return loss, grads


class MLP(BaseEstimator):
    """ReLU multilayer perceptron with a softmax or linear output layer.

    Sample weights scale each row's loss; mini-batch losses are normalized by
    ``batch_size * mean(weight)`` so unit weights reproduce unweighted SGD.
    """

    def __init__(self, hidden_widths=(32,), output="softmax", epochs=50, learning_rate=0.05,
                 batch_size=32, n_classes=None, random_state=0):
        self.hidden_widths = hidden_widths
        self.output = output
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.n_classes = n_classes
        self.random_state = random_state

    def _targets(self, y):
        if self.output == "softmax":
            Y, self.n_classes_ = check_classification_targets(y, self.n_classes)
            self.classes_ = np.arange(self.n_classes_)
            return Y
        y = np.asarray(y, dtype=np.float64)
        return y.reshape(-1, 1) if y.ndim == 1 else y

    def fit(self, X, y, sample_weight=None):
        X = check_array(X, dtype=np.float64)
        w = check_sample_weight(sample_weight, X.shape[0])
        Y = self._targets(y)
        rng = np.random.default_rng(self.random_state)
        sizes = (X.shape[1], *self.hidden_widths, Y.shape[1])
        params = init_params(sizes, rng)
        n = X.shape[0]
        w_mean = w.mean()
        for _ in range(self.epochs):
            perm = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                idx = perm[start:start + self.batch_size]
                _, grads = loss_and_grad(params, X[idx], Y[idx], w[idx], self.output,
                                         norm=len(idx) * w_mean)
                params = [(W - self.learning_rate * gW, b - self.learning_rate * gb)
                          for (W, b), (gW, gb) in zip(params, grads)]
        self.params_ = params
        self.n_features_in_ = X.shape[1]
        return self

    def _forward(self, X):
        check_is_fitted(self, "params_")
        X = check_array(X, dtype=np.float64)
        return forward(self.params_, X, self.output)[0]

    def predict_proba(self, X):
        if self.output != "softmax":
            raise AttributeError("predict_proba needs a softmax output")
        return self._forward(X)

    def predict(self, X):
        out = self._forward(X)
        if self.output == "softmax":
            return np.argmax(out, axis=1)
        return out[:, 0] if out.shape[1] == 1 else out
