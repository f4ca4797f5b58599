"""Anchor derivation from a complex architecture and randomized perturbation.

Anchors are simpler relatives of the complex model, ordered by strictly
decreasing complexity. ``perturb`` turns an anchor into a nearby
intermediate architecture: layer deletion or width rescaling for MLPs,
depth jitter for trees, degree jitter for polynomials.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .models import Cart, Mlp, Polynomial, TreeEnsemble, complexity
from .models.specs import ArchSpec

ENSEMBLE_MIN_TREES = 3
ENSEMBLE_MAX_TREES = 60
ENSEMBLE_MAX_DEPTH = 6
MIN_MLP_DEPTH = 2


class AnchorError(ValueError):
    pass


@dataclass(frozen=True)
class AnchorSet:
    """Anchors ``A_1 .. A_k``; ``specs[i - 1]`` is anchor ``i`` (index 0 means no model)."""
    specs: tuple

    def __post_init__(self):
        object.__setattr__(self, "specs", tuple(self.specs))
        scores = [complexity(s) for s in self.specs]
        if any(a <= b for a, b in zip(scores, scores[1:])):
            raise AnchorError("anchor complexities must be strictly decreasing")

    def __len__(self):
        return len(self.specs)

    def __getitem__(self, index):
        if not 1 <= index <= len(self.specs):
            raise IndexError(f"anchor index {index} outside 1..{len(self.specs)}")
        return self.specs[index - 1]


@dataclass(frozen=True)
class PerturbConfig:
    max_steps: int = 3
    depth_jitter: int = 2
    width_jitter_fraction: float = 0.5
    degree_jitter: int = 1
    identity: bool = False

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if min(self.depth_jitter, self.degree_jitter, self.width_jitter_fraction) < 0:
            raise ValueError("jitter magnitudes must be nonnegative")


def _spread(pool, k):
    """Pick ``k`` items from a complexity-sorted pool, evenly spaced in log-complexity."""
    if k > len(pool):
        raise AnchorError(f"only {len(pool)} simpler variants exist, {k} requested")
    logs = np.log([complexity(s) for s in pool])
    targets = np.linspace(logs[0], logs[-1], k)
    chosen, start = [], 0
    for i, t in enumerate(targets):
        stop = len(pool) - (k - i) + 1  # leave room for the remaining picks
        j = start + int(np.argmin(np.abs(logs[start:stop] - t)))
        chosen.append(pool[j])
        start = j + 1
    return chosen


def _ensemble_pool(spec: TreeEnsemble, k):
    top = min(ENSEMBLE_MAX_TREES, spec.n_trees - 1)
    if top < ENSEMBLE_MIN_TREES:
        raise AnchorError(f"{spec!r} has too few trees to derive ensemble anchors")
    depth = min(ENSEMBLE_MAX_DEPTH, spec.max_depth)
    by_score = {}
    # walk down in depth only until the pool is large enough
    while depth >= 1:
        for n in range(top, ENSEMBLE_MIN_TREES - 1, -1):
            for kind in ("boosted", "forest"):
                lr = spec.learning_rate if kind == "boosted" else None
                cand = TreeEnsemble(kind=kind, n_trees=n, max_depth=depth, learning_rate=lr)
                by_score.setdefault(complexity(cand), cand)
        if len(by_score) >= k:
            break
        depth -= 1
    limit = complexity(spec)
    return [by_score[s] for s in sorted(by_score, reverse=True) if s < limit]


def derive_anchors(complex_spec: ArchSpec, k: int) -> AnchorSet:
    """``k`` anchors of strictly decreasing complexity below ``complex_spec``."""
    if k < 1:
        raise AnchorError("k must be at least 1")
    if isinstance(complex_spec, Polynomial):
        degrees = list(range(complex_spec.degree - 1, 0, -1))
        if k > len(degrees):
            raise AnchorError(f"Polynomial{{{complex_spec.degree}}} admits {len(degrees)} anchors")
        return AnchorSet([Polynomial(d) for d in degrees[:k]])
    if isinstance(complex_spec, Mlp):
        widths = complex_spec.hidden_widths
        depths = list(range(complex_spec.depth - 1, MIN_MLP_DEPTH - 1, -1))
        if k > len(depths):
            raise AnchorError(f"an Mlp of depth {complex_spec.depth} admits {len(depths)} anchors")
        return AnchorSet([replace(complex_spec, hidden_widths=widths[:d - 1]) for d in depths[:k]])
    if isinstance(complex_spec, Cart):
        depths = list(range(complex_spec.max_depth - 1, 0, -1))
        if k > len(depths):
            raise AnchorError(f"a depth-{complex_spec.max_depth} tree admits {len(depths)} anchors")
        return AnchorSet([replace(complex_spec, max_depth=d) for d in depths[:k]])
    if isinstance(complex_spec, TreeEnsemble):
        return AnchorSet(_spread(_ensemble_pool(complex_spec, k), k))
    raise AnchorError(f"no anchor recipe for {type(complex_spec).__name__}")


def _perturb_mlp(spec: Mlp, cfg: PerturbConfig, rng) -> Mlp:
    widths = list(spec.hidden_widths)
    f = cfg.width_jitter_fraction
    factors = (1 - f, 1 - f / 2, 1 + f / 2, 1 + f)
    for _ in range(cfg.max_steps):
        layer = int(rng.integers(len(widths)))
        delete = bool(rng.random() < 0.5)
        if delete and len(widths) >= 2:
            del widths[layer]
        else:
            factor = factors[int(rng.integers(len(factors)))]
            widths[layer] = max(1, int(round(widths[layer] * factor)))
    return replace(spec, hidden_widths=tuple(widths))


def perturb(anchor: ArchSpec, cfg: PerturbConfig, rng_seed: int) -> ArchSpec:
    """Randomized nearby architecture; a pure function of its arguments."""
    if cfg.identity:
        return anchor
    rng = np.random.default_rng(rng_seed)
    if isinstance(anchor, Mlp):
        return _perturb_mlp(anchor, cfg, rng)
    if isinstance(anchor, (TreeEnsemble, Cart)):
        step = int(rng.integers(-cfg.depth_jitter, cfg.depth_jitter + 1))
        return replace(anchor, max_depth=max(1, anchor.max_depth + step))
    if isinstance(anchor, Polynomial):
        step = int(rng.integers(-cfg.degree_jitter, cfg.degree_jitter + 1))
        return Polynomial(max(1, anchor.degree + step))
    return anchor

