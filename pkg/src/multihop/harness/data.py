"""Datasets: CSV ingestion, seeded splits, and the synthetic polynomial generator."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from ..models import CLASSIFICATION, REGRESSION, Hard, Polynomial, PolynomialRegressor, Real, TrainedModel
from ..seeding import derive_seed


class DataError(ValueError):
    pass


@dataclass
class Dataset:
    features: np.ndarray
    targets: object               # Hard or Real
    feature_names: list
    task: str
    label_mapping: dict = field(default_factory=dict)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise DataError("a dataset needs at least one row of features")
        if not np.all(np.isfinite(self.features)):
            raise DataError("features contain non-finite values")
        if len(self.targets) != self.features.shape[0]:
            raise DataError("features and targets have different lengths")

    def __len__(self):
        return self.features.shape[0]

    @property
    def y(self):
        return self.targets.labels if isinstance(self.targets, Hard) else self.targets.values

    @property
    def n_classes(self):
        return self.targets.n_classes if isinstance(self.targets, Hard) else 0

    def subset(self, idx):
        idx = np.asarray(idx)
        if isinstance(self.targets, Hard):
            t = Hard(self.targets.labels[idx], self.targets.n_classes)
        else:
            t = Real(self.targets.values[idx])
        return Dataset(self.features[idx], t, list(self.feature_names), self.task,
                       dict(self.label_mapping))


def load_csv(path, label_column, task=CLASSIFICATION) -> Dataset:
    """Read a headered numeric CSV; classification labels map to 0..K-1 by first appearance."""
    path = Path(path)
    if task not in (CLASSIFICATION, REGRESSION):
        raise DataError(f"unknown task {task!r}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if label_column not in header:
        raise DataError(f"label column {label_column!r} not found in {path} (columns: {header})")
    body = [r for r in rows[1:] if any(cell.strip() for cell in r)]
    if not body:
        raise DataError(f"{path} has a header but no data rows")
    li = header.index(label_column)
    names = [h for i, h in enumerate(header) if i != li]
    X = np.empty((len(body), len(names)))
    raw_labels = []
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"row {r} has {len(row)} cells, expected {len(header)}")
        c = 0
        for i, cell in enumerate(row):
            if i == li:
                raw_labels.append(cell.strip())
                continue
            try:
                X[r - 2, c] = float(cell)
            except ValueError:
                raise DataError(f"non-numeric value {cell!r} at row {r}, column {header[i]!r}") from None
            c += 1
    if not np.all(np.isfinite(X)):
        raise DataError(f"{path} contains non-finite feature values")

    if task == CLASSIFICATION:
        mapping = {}
        for lab in raw_labels:
            mapping.setdefault(lab, len(mapping))
        labels = np.array([mapping[lab] for lab in raw_labels], dtype=np.int64)
        targets = Hard(labels, max(2, len(mapping)))
    else:
        mapping = {}
        try:
            targets = Real(np.array([float(v) for v in raw_labels]))
        except ValueError as exc:
            raise DataError(f"non-numeric regression target in {path}: {exc}") from None
    return Dataset(X, targets, names, task, mapping)


def default_validation_size(n_train):
    return min(500, int(0.2 * n_train))


def split_indices(n, test_fraction, validation_size, repeat_index, master_seed):
    if not 0 < test_fraction < 1:
        raise DataError("test_fraction must lie in (0, 1)")
    n_test = int(round(test_fraction * n))
    n_rest = n - n_test
    if n_test < 1 or not 0 < validation_size < n_rest:
        raise DataError(f"cannot carve {validation_size} validation rows from {n_rest} training rows")
    rng = np.random.default_rng(derive_seed(master_seed, repeat_index))
    perm = rng.permutation(n)
    test = np.sort(perm[:n_test])
    val = np.sort(perm[n_test:n_test + validation_size])
    train = np.sort(perm[n_test + validation_size:])
    return train, val, test


def split(dataset: Dataset, test_fraction=0.25, validation_size=None, repeat_index=0, master_seed=0):
    """Seeded ``(train, validation, test)`` split; validation comes out of the train portion."""
    n = len(dataset)
    if validation_size is None:
        validation_size = default_validation_size(n - int(round(test_fraction * n)))
    tr, va, te = split_indices(n, test_fraction, validation_size, repeat_index, master_seed)
    return dataset.subset(tr), dataset.subset(va), dataset.subset(te)


@dataclass(frozen=True)
class SyntheticSpec:
    x_min: float = -14.0
    x_max: float = 14.0
    step: float = 0.01
    coefficient: float = 1e-5
    degree: int = 5
    noise_fraction: float = 0.2
    noise_low: float = 0.0
    noise_high: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise DataError("x_min must be below x_max")
        if not self.step > 0:
            raise DataError("step must be positive")
        if not 0 <= self.noise_fraction <= 1:
            raise DataError("noise_fraction must lie in [0, 1]")

    def grid(self):
        # inclusive stepping; tolerate float drift at the top end
        n = math.floor((self.x_max - self.x_min) / self.step + 1e-9) + 1
        return self.x_min + self.step * np.arange(n)

    def generator_coefficients(self):
        return np.full(self.degree + 1, self.coefficient)


def generator_model(spec: SyntheticSpec) -> TrainedModel:
    """The noiseless generator polynomial as a fitted model."""
    est = PolynomialRegressor.from_coefficients(spec.generator_coefficients())
    return TrainedModel(spec=Polynomial(spec.degree), estimator=est, n_classes=0, n_features=1)


class NoisyOutputRegressor(RegressorMixin, BaseEstimator):
    """A base regressor whose outputs on known rows carry fixed additive noise.

    Rows are matched exactly against ``reference``; any other input gets the
    base prediction.
    """

    def __init__(self, base, reference, offsets):
        self.base = base
        self.reference = reference
        self.offsets = offsets

    def fit(self, X, y=None, sample_weight=None):
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = np.asarray(self.base.predict(X), dtype=np.float64).copy()
        lookup = {row.tobytes(): i for i, row in enumerate(np.asarray(self.reference))}
        for r, row in enumerate(X):
            i = lookup.get(row.tobytes())
            if i is not None:
                out[r] += self.offsets[i]
        return out


def synthetic_poly_dataset(spec: SyntheticSpec = SyntheticSpec()):
    """Noisy teacher targets on the grid and the matching ground truth.

    Returns ``(dataset, clean)`` where ``dataset.targets`` are the generator
    outputs with ``U[noise_low, noise_high]`` noise added to the lowest-x
    ``noise_fraction`` of the grid, and ``clean`` is the noiseless output.
    """
    x = spec.grid()
    clean = np.vander(x, spec.degree + 1, increasing=True) @ spec.generator_coefficients()
    n_noisy = int(math.floor(spec.noise_fraction * len(x)))
    noise = np.zeros(len(x))
    rng = np.random.default_rng(spec.seed)
    noise[:n_noisy] = rng.uniform(spec.noise_low, spec.noise_high, n_noisy)
    ds = Dataset(x[:, None], Real(clean + noise), ["x"], REGRESSION)
    return ds, clean


def noisy_teacher(spec: SyntheticSpec, dataset: Dataset, clean) -> TrainedModel:
    """Complex model whose predictions on the grid are the noisy targets."""
    gen = generator_model(spec)
    offsets = dataset.targets.values - clean
    est = NoisyOutputRegressor(gen.estimator, dataset.features, offsets)
    return TrainedModel(spec=gen.spec, estimator=est, n_classes=0, n_features=1,
                        info={"noise_fraction": spec.noise_fraction, "seed": spec.seed})


def gaussian_mixture_dataset(n_samples=2000, n_features=10, n_classes=2, n_informative=6,
                             n_clusters_per_class=3, class_sep=1.0, flip_y=0.05, seed=0) -> Dataset:
    """Seeded Gaussian-cluster classification task."""
    from sklearn.datasets import make_classification

    X, y = make_classification(n_samples=n_samples, n_features=n_features,
                               n_informative=n_informative,
                               n_redundant=min(2, n_features - n_informative),
                               n_classes=n_classes, n_clusters_per_class=n_clusters_per_class,
                               class_sep=class_sep, flip_y=flip_y, random_state=seed)
    names = [f"x{i}" for i in range(n_features)]
    return Dataset(X, Hard(y.astype(np.int64), n_classes), names, CLASSIFICATION)
