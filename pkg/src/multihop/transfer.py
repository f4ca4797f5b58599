"""Hop-level knowledge transfer and chained transfer through intermediate models.

A hop trains a student against a teacher, either by distillation (the
student fits the teacher's softened probabilities, or its raw predictions
for regression) or by confidence weighting (the student fits the true labels
with each row weighted by the teacher's probability of the true class).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .models import (
    ArchSpec,
    FitConfig,
    Hard,
    Real,
    Soft,
    TaskMismatchError,
    TrainedModel,
    complexity,
    fit,
    predict,
    temperature_soften,
)
from .seeding import derive_seed

DEFAULT_TEMPERATURE = 4.0


@dataclass(frozen=True)
class Distill:
    temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")


@dataclass(frozen=True)
class ConfidenceWeight:
    normalize: str = "mean_one"

    def __post_init__(self):
        if self.normalize not in ("none", "mean_one"):
            raise ValueError(f"normalize must be 'none' or 'mean_one', got {self.normalize!r}")


TransferMethod = Union[Distill, ConfidenceWeight]


def method_to_dict(method: TransferMethod) -> dict:
    if isinstance(method, Distill):
        return {"type": "distill", "temperature": method.temperature}
    return {"type": "confidence_weight", "normalize": method.normalize}


def method_from_dict(d: dict) -> TransferMethod:
    d = dict(d)
    kind = d.pop("type", None)
    if kind == "distill":
        return Distill(**d)
    if kind == "confidence_weight":
        return ConfidenceWeight(**d)
    raise ValueError(f"unknown transfer method {kind!r}")


def method_name(method: TransferMethod) -> str:
    return "distill" if isinstance(method, Distill) else "confidence_weight"


@dataclass(frozen=True)
class Hop:
    spec: ArchSpec
    method: TransferMethod = field(default_factory=Distill)
    seed: int | None = None


@dataclass(frozen=True)
class TransferPlan:
    """Ordered intermediate hops followed by the transfer into the simple model.

    An empty ``hops`` tuple is plain 1-hop transfer.
    """
    hops: tuple[Hop, ...] = ()
    final_method: TransferMethod = field(default_factory=Distill)

    def __post_init__(self):
        object.__setattr__(self, "hops", tuple(self.hops))

    def is_decreasing(self) -> bool:
        scores = [complexity(h.spec) for h in self.hops]
        return all(a > b for a, b in zip(scores, scores[1:]))

    def specs(self):
        return [h.spec for h in self.hops]


def make_soft_targets(teacher: TrainedModel, features, temperature=DEFAULT_TEMPERATURE):
    """Teacher outputs as training targets for a student."""
    out = predict(teacher, features)
    if teacher.n_classes > 0:
        return Soft(temperature_soften(out, temperature))
    return Real(out[:, 0])


def confidence_weights(teacher: TrainedModel, features, true_labels, normalize="mean_one"):
    """Teacher probability of each row's true class, optionally rescaled to mean 1."""
    if teacher.n_classes == 0:
        raise TaskMismatchError("confidence weighting needs a classification teacher")
    labels = np.asarray(true_labels)
    P = predict(teacher, features)
    if labels.shape != (P.shape[0],):
        raise ValueError("one true label per row is required")
    if labels.min() < 0 or labels.max() >= P.shape[1]:
        raise ValueError("true labels out of range for the teacher")
    w = P[np.arange(len(labels)), labels]
    if normalize == "mean_one":
        mean = w.mean()
        if not mean > 0:
            raise ValueError("teacher gives zero confidence to every true label")
        w = w / mean
    return w


def hop(teacher: TrainedModel, student_spec: ArchSpec, features, true_labels,
        method: TransferMethod, cfg: FitConfig | None = None) -> TrainedModel:
    """Train one student from one teacher."""
    cfg = cfg or FitConfig()
    if isinstance(method, Distill):
        targets = make_soft_targets(teacher, features, method.temperature)
        return fit(student_spec, features, targets, cfg.with_weights(None))
    if isinstance(method, ConfidenceWeight):
        w = confidence_weights(teacher, features, true_labels, method.normalize)
        labels = np.asarray(true_labels, dtype=np.int64)
        return fit(student_spec, features, Hard(labels, teacher.n_classes), cfg.with_weights(w))
    raise TypeError(f"not a transfer method: {method!r}")


def hop_seed(cfg_seed, position, anchor_index=0):
    """Training seed of the model at chain ``position`` (1-based) built from an anchor."""
    return derive_seed(cfg_seed, position, anchor_index)


def chain_transfer(complex_model: TrainedModel, plan: TransferPlan, simple_spec: ArchSpec,
                   features, true_labels, cfg: FitConfig | None = None, require_decreasing=True):
    """Transfer through every intermediate of ``plan`` and finally into ``simple_spec``.

    Returns ``(simple_model, intermediates)``. Hops without an explicit seed
    are trained with a seed derived from ``cfg.seed`` and their position.
    """
    cfg = cfg or FitConfig()
    if len(np.asarray(features)) == 0:
        raise ValueError("cannot transfer on an empty dataset")
    if require_decreasing and not plan.is_decreasing():
        raise ValueError("plan intermediates must have strictly decreasing complexity")
    teacher = complex_model
    intermediates = []
    for i, h in enumerate(plan.hops, start=1):
        seed = h.seed if h.seed is not None else hop_seed(cfg.seed, i)
        teacher = hop(teacher, h.spec, features, true_labels, h.method, cfg.with_seed(seed))
        intermediates.append(teacher)
    simple = hop(teacher, simple_spec, features, true_labels, plan.final_method, cfg)
    return simple, intermediates
