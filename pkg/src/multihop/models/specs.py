"""Declarative architecture descriptors for every model family in the zoo.

Specs are small frozen dataclasses so they hash, compare and serialize
cleanly. ``complexity`` gives the total order used to sort anchors.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Union

CLASSIFICATION = "classification"
REGRESSION = "regression"


class SpecError(ValueError):
    """Raised when an architecture descriptor is malformed."""


@dataclass(frozen=True)
class Polynomial:
    degree: int

    def __post_init__(self):
        _check_int(self.degree, "degree", 0)


@dataclass(frozen=True)
class LinearLS:
    pass


@dataclass(frozen=True)
class RobustLinear:
    tuning_c: float = 4.685

    def __post_init__(self):
        if not self.tuning_c > 0:
            raise SpecError(f"tuning_c must be > 0, got {self.tuning_c}")


@dataclass(frozen=True)
class Cart:
    max_depth: int
    min_leaf: int = 1
    task: str = CLASSIFICATION

    def __post_init__(self):
        _check_int(self.max_depth, "max_depth", 1)
        _check_int(self.min_leaf, "min_leaf", 1)
        if self.task not in (CLASSIFICATION, REGRESSION):
            raise SpecError(f"unknown task {self.task!r}")


@dataclass(frozen=True)
class TreeEnsemble:
    kind: str
    n_trees: int
    max_depth: int
    learning_rate: float | None = None

    def __post_init__(self):
        if self.kind not in ("boosted", "forest"):
            raise SpecError(f"unknown ensemble kind {self.kind!r}")
        _check_int(self.n_trees, "n_trees", 1)
        _check_int(self.max_depth, "max_depth", 1)
        if self.kind == "boosted":
            if self.learning_rate is None:
                # frozen dataclass: bypass to fill the documented default
                object.__setattr__(self, "learning_rate", 0.1)
            if not 0 < self.learning_rate <= 1:
                raise SpecError(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        elif self.learning_rate is not None:
            raise SpecError("learning_rate is only valid for boosted ensembles")


@dataclass(frozen=True)
class Mlp:
    hidden_widths: tuple[int, ...]
    activation: str = "relu"
    output: str = "softmax"

    def __post_init__(self):
        object.__setattr__(self, "hidden_widths", tuple(self.hidden_widths))
        if not self.hidden_widths:
            raise SpecError("Mlp needs at least one hidden layer")
        for w in self.hidden_widths:
            _check_int(w, "hidden width", 1)
        if self.activation != "relu":
            raise SpecError(f"unsupported activation {self.activation!r}")
        if self.output not in ("softmax", "linear"):
            raise SpecError(f"unknown output {self.output!r}")

    @property
    def depth(self) -> int:
        """Number of weight layers (hidden layers + output layer)."""
        return len(self.hidden_widths) + 1


ArchSpec = Union[Polynomial, LinearLS, RobustLinear, Cart, TreeEnsemble, Mlp]

_FAMILIES = {
    "polynomial": Polynomial,
    "linear_ls": LinearLS,
    "robust_linear": RobustLinear,
    "cart": Cart,
    "tree_ensemble": TreeEnsemble,
    "mlp": Mlp,
}
_NAMES = {cls: name for name, cls in _FAMILIES.items()}


def _check_int(value, name, lo):
    if isinstance(value, bool) or not isinstance(value, int) or value < lo:
        raise SpecError(f"{name} must be an int >= {lo}, got {value!r}")


def spec_task(spec: ArchSpec) -> str | None:
    """Task the spec is tied to, or None when it adapts to the targets."""
    if isinstance(spec, (Polynomial, LinearLS, RobustLinear)):
        return REGRESSION
    if isinstance(spec, Cart):
        return spec.task
    if isinstance(spec, Mlp):
        return CLASSIFICATION if spec.output == "softmax" else REGRESSION
    return None


def _mlp_weight_count(widths) -> int:
    # unit input and output width: the score must not depend on the data
    sizes = (1, *widths, 1)
    return sum((a + 1) * b for a, b in zip(sizes[:-1], sizes[1:]))


def complexity(spec: ArchSpec) -> float:
    """Parameter-count proxy used to order architectures across families.

    Boosted ensembles get a +0.5 offset over an equally sized forest so that
    mixed anchor lists can be strictly ordered.
    """
    if isinstance(spec, Polynomial):
        return float(spec.degree + 1)
    if isinstance(spec, (LinearLS, RobustLinear)):
        return 2.0
    if isinstance(spec, Cart):
        return float(2 ** spec.max_depth)
    if isinstance(spec, TreeEnsemble):
        base = float(spec.n_trees * 2 ** spec.max_depth)
        return base + 0.5 if spec.kind == "boosted" else base
    if isinstance(spec, Mlp):
        return float(_mlp_weight_count(spec.hidden_widths))
    raise SpecError(f"not an architecture spec: {spec!r}")


def spec_to_dict(spec: ArchSpec) -> dict:
    d = {"family": _NAMES[type(spec)]}
    d.update(asdict(spec))
    if isinstance(spec, Mlp):
        d["hidden_widths"] = list(spec.hidden_widths)
    return d


def spec_from_dict(d: dict) -> ArchSpec:
    d = dict(d)
    try:
        cls = _FAMILIES[d.pop("family")]
    except KeyError as exc:
        raise SpecError(f"missing or unknown model family in {d!r}") from exc
    allowed = {f.name for f in fields(cls)}
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise SpecError(f"unknown key(s) {unknown} for {cls.__name__}; allowed: {sorted(allowed)}")
    try:
        return cls(**d)
    except TypeError as exc:
        raise SpecError(f"bad fields for {cls.__name__}: {exc}") from None


def describe(spec: ArchSpec) -> str:
    """Short human-readable label, e.g. ``boosted(50x6)``."""
    if isinstance(spec, Polynomial):
        return f"poly{spec.degree}"
    if isinstance(spec, LinearLS):
        return "linear_ls"
    if isinstance(spec, RobustLinear):
        return "robust_linear"
    if isinstance(spec, Cart):
        return f"cart(d{spec.max_depth})"
    if isinstance(spec, TreeEnsemble):
        return f"{spec.kind}({spec.n_trees}x{spec.max_depth})"
    if isinstance(spec, Mlp):
        return "mlp(" + "-".join(map(str, spec.hidden_widths)) + ")"
    return repr(spec)
