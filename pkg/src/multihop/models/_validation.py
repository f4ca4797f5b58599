import numpy as np


def check_sample_weight(sample_weight, n_samples):
    """Return a float64 weight vector; ``None`` means all ones."""
    if sample_weight is None:
        return np.ones(n_samples, dtype=np.float64)
    w = np.asarray(sample_weight, dtype=np.float64)
    if w.shape != (n_samples,):
        raise ValueError(f"sample_weight has shape {w.shape}, expected ({n_samples},)")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("sample weights must be finite and nonnegative")
    if not np.any(w > 0):
        raise ValueError("at least one sample weight must be positive")
    return w


def check_classification_targets(y, n_classes=None):
    """Turn hard labels or probability rows into an ``(N, K)`` target matrix.

    Returns ``(Y, n_classes)``.
    """
    y = np.asarray(y)
    if y.ndim == 2:
        Y = y.astype(np.float64)
        if n_classes is not None and Y.shape[1] != n_classes:
            raise ValueError(f"soft targets have {Y.shape[1]} columns, expected {n_classes}")
        if np.any(Y < 0) or not np.allclose(Y.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("soft targets must be probability rows")
        return Y, Y.shape[1]
    if y.ndim != 1:
        raise ValueError("labels must be 1-D or a 2-D probability matrix")
    if not np.issubdtype(y.dtype, np.integer):
        if not np.all(np.equal(np.mod(y, 1), 0)):
            raise ValueError("hard labels must be integers")
        y = y.astype(np.int64)
    if y.size and y.min() < 0:
        raise ValueError("labels must be nonnegative")
    k = int(y.max()) + 1 if n_classes is None else int(n_classes)
    if y.size and y.max() >= k:
        raise ValueError(f"label {y.max()} out of range for {k} classes")
    k = max(k, 2)
    Y = np.zeros((y.shape[0], k))
    Y[np.arange(y.shape[0]), y] = 1.0
    return Y, k
