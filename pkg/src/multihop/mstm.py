"""Stochastic greedy multi-hop search, its exhaustive oracle, and set-function diagnostics.

At each hop the search draws up to ``n`` live anchor indices, always adds
index 0 (no intermediate model), builds a perturbed intermediate from each
drawn anchor, trains the simple model through the chain extended by that
candidate and keeps the candidate with the best validation reward. Anchors at
or above the chosen index are dropped for later hops.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from joblib import Parallel, delayed

from .anchors import AnchorSet, PerturbConfig, perturb
from .metrics import REWARDS, reward as reward_fn
from .models import ArchSpec, FitConfig, TrainedModel, spec_to_dict
from .seeding import derive_seed
from .transfer import Distill, Hop, TransferMethod, TransferPlan, hop

# stream ids inside derive_seed(master, hop, anchor, stream)
_PERTURB, _TRAIN = 0, 1
_SAMPLE_ANCHOR = 0


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    m: int = 3
    n: int | None = None
    delta: float | None = None
    seed: int = 0
    reward: str = "accuracy"
    hop_method: TransferMethod = field(default_factory=Distill)
    final_method: TransferMethod = field(default_factory=Distill)

    def __post_init__(self):
        if self.m < 1:
            raise SearchError("m must be at least 1")
        if self.n is not None and self.delta is not None:
            raise SearchError("give either n or delta, not both")
        if self.n is not None and self.n < 1:
            raise SearchError("n must be at least 1")
        if self.reward not in REWARDS:
            raise SearchError(f"unknown reward {self.reward!r}")

    def candidates_per_hop(self, k: int) -> int:
        """Subset size for ``k`` anchors; all of them when neither n nor delta is set."""
        if self.n is not None:
            return min(self.n, k)
        if self.delta is not None:
            return subset_size(k, self.m, self.delta)
        return k


def subset_size(k: int, m: int, delta: float) -> int:
    """``ceil(k/m * ln(1/delta))`` clamped to ``[1, k]``."""
    if not 0 < delta < 1:
        raise SearchError(f"delta must lie in (0, 1), got {delta}")
    raw = k / m * math.log(1.0 / delta)
    # absorb float noise such as ln(1/(1/e)) = 1.0000000000000002
    n = math.ceil(raw - 1e-9)
    return max(1, min(k, n))


@dataclass
class HopRecord:
    hop: int
    sampled: tuple            # always starts with 0
    rewards: dict             # anchor index -> validation reward
    specs: dict               # anchor index -> perturbed spec (absent for 0)
    chosen: int
    chosen_spec: ArchSpec | None
    remaining: tuple

    def to_dict(self):
        return {
            "hop": self.hop,
            "sampled": list(self.sampled),
            "rewards": {str(j): r for j, r in self.rewards.items()},
            "specs": {str(j): spec_to_dict(s) for j, s in self.specs.items()},
            "chosen": self.chosen,
            "chosen_spec": None if self.chosen_spec is None else spec_to_dict(self.chosen_spec),
            "remaining": list(self.remaining),
        }


@dataclass
class SearchTrace:
    hops: list = field(default_factory=list)
    final_reward: float | None = None

    @property
    def chosen_indices(self):
        return [h.chosen for h in self.hops if h.chosen != 0]

    def to_dict(self):
        return {"hops": [h.to_dict() for h in self.hops], "final_reward": self.final_reward}


def _unpack(data):
    X, y = data
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    return X, (None if y is None else np.asarray(y))


def _evaluate_candidate(teacher, anchor_spec, simple_spec, train, validation, cfg, pcfg,
                        fit_cfg, hop_index, anchor_index):
    X, y = train
    spec = perturb(anchor_spec, pcfg, derive_seed(cfg.seed, hop_index, anchor_index, _PERTURB))
    train_seed = derive_seed(cfg.seed, hop_index, anchor_index, _TRAIN)
    inter = hop(teacher, spec, X, y, cfg.hop_method, fit_cfg.with_seed(train_seed))
    simple = hop(inter, simple_spec, X, y, cfg.final_method, fit_cfg)
    r = reward_fn(cfg.reward, simple, *validation)
    return spec, train_seed, inter, simple, r


def mstm_search(complex_model: TrainedModel, anchors: AnchorSet, simple_spec: ArchSpec,
                train, validation, cfg: SearchConfig, pcfg: PerturbConfig | None = None,
                fit_cfg: FitConfig | None = None, n_jobs: int = 1):
    """Run the multi-hop stochastic transfer search.

    ``train`` and ``validation`` are ``(X, y)`` pairs; ``y`` holds true labels
    (classification) or ground-truth values (regression, where training
    labels are unused and may be None).

    Returns ``(simple_model, plan, trace)``. Every training seed is derived
    from ``(cfg.seed, hop, anchor)`` and stored in the plan, so
    ``chain_transfer(complex_model, plan, simple_spec, *train, fit_cfg)``
    reproduces ``simple_model`` exactly.
    """
    pcfg = pcfg or PerturbConfig()
    fit_cfg = fit_cfg or FitConfig()
    train, validation = _unpack(train), _unpack(validation)
    if len(validation[0]) == 0:
        raise SearchError("validation set is empty")
    X, y = train
    k = len(anchors)

    live = list(range(1, k + 1))
    teacher = complex_model
    current = hop(teacher, simple_spec, X, y, cfg.final_method, fit_cfg)
    current_reward = reward_fn(cfg.reward, current, *validation)
    hops, trace = [], SearchTrace()
    parallel = Parallel(n_jobs=n_jobs) if n_jobs != 1 else None

    for h in range(1, cfg.m + 1):
        rng = np.random.default_rng(derive_seed(cfg.seed, h, _SAMPLE_ANCHOR, 2))
        n_h = min(cfg.candidates_per_hop(k), len(live))
        drawn = sorted(int(j) for j in rng.choice(live, size=n_h, replace=False))
        args = [(teacher, anchors[j], simple_spec, train, validation, cfg, pcfg, fit_cfg, h, j)
                for j in drawn]
        if parallel is None:
            results = [_evaluate_candidate(*a) for a in args]
        else:
            results = parallel(delayed(_evaluate_candidate)(*a) for a in args)

        rewards = {0: current_reward}
        best_j, best_r = 0, current_reward
        for j, res in zip(drawn, results):
            rewards[j] = res[4]
            if res[4] > best_r:
                best_j, best_r = j, res[4]

        if best_j != 0:
            spec, train_seed, inter, simple, r = results[drawn.index(best_j)]
            hops.append(Hop(spec, cfg.hop_method, train_seed))
            teacher, current, current_reward = inter, simple, r
            live = [i for i in live if i > best_j]
        trace.hops.append(HopRecord(
            hop=h, sampled=(0, *drawn), rewards=rewards,
            specs={j: res[0] for j, res in zip(drawn, results)},
            chosen=best_j, chosen_spec=hops[-1].spec if best_j else None,
            remaining=tuple(live),
        ))
        if not live:
            break

    trace.final_reward = current_reward
    plan = TransferPlan(tuple(hops), cfg.final_method)
    return current, plan, trace


@dataclass
class BruteForceResult:
    plan: TransferPlan
    reward: float
    table: list            # (index tuple, reward) in enumeration order
    best_tuple: tuple


def brute_force_search(complex_model: TrainedModel, anchors: AnchorSet, simple_spec: ArchSpec,
                       train, validation, m: int, reward: str = "accuracy",
                       hop_method: TransferMethod | None = None,
                       final_method: TransferMethod | None = None, seed: int = 0,
                       fit_cfg: FitConfig | None = None, budget: int = 20000):
    """Evaluate every index tuple in ``{0..k}^m`` with identity perturbation.

    Index 0 means no model at that position. Seeds follow the same
    ``(seed, position, anchor)`` rule as :func:`mstm_search`, so a search plan
    and its tuple here produce identical models. Ties go to the earliest tuple
    in lexicographic order.
    """
    hop_method = hop_method or Distill()
    final_method = final_method or Distill()
    fit_cfg = fit_cfg or FitConfig()
    train, validation = _unpack(train), _unpack(validation)
    X, y = train
    k = len(anchors)
    total = (k + 1) ** m
    if total > budget:
        raise SearchError(f"{total} chains exceed the brute-force budget of {budget}")

    prefix_models = {(): (complex_model, ())}

    def chain_for(prefix):
        if prefix in prefix_models:
            return prefix_models[prefix]
        teacher, hops_so_far = chain_for(prefix[:-1])
        j, pos = prefix[-1], len(prefix)
        if j != 0:
            train_seed = derive_seed(seed, pos, j, _TRAIN)
            teacher = hop(teacher, anchors[j], X, y, hop_method, fit_cfg.with_seed(train_seed))
            hops_so_far = hops_so_far + (Hop(anchors[j], hop_method, train_seed),)
        prefix_models[prefix] = (teacher, hops_so_far)
        return prefix_models[prefix]

    simple_cache = {}
    table = []
    best = None
    for tup in itertools.product(range(k + 1), repeat=m):
        teacher, hops_so_far = chain_for(tup)
        if id(teacher) not in simple_cache:
            simple = hop(teacher, simple_spec, X, y, final_method, fit_cfg)
            simple_cache[id(teacher)] = (simple, reward_fn(reward, simple, *validation))
        r = simple_cache[id(teacher)][1]
        table.append((tup, r))
        if best is None or r > best[1]:
            best = (tup, r, hops_so_far)
    plan = TransferPlan(best[2], final_method)
    return BruteForceResult(plan=plan, reward=best[1], table=table, best_tuple=best[0])


def submodularity_ratio(f: Callable[[frozenset], float], L: Iterable, P: Iterable):
    """``sum_{i in P} (f(L+i) - f(L)) / (f(L+P) - f(L))``; None when the denominator is 0."""
    L, P = frozenset(L), frozenset(P)
    if L & P:
        raise ValueError("L and P must be disjoint")
    base = f(L)
    denom = f(L | P) - base
    if denom == 0:
        return None
    return sum(f(L | {i}) - base for i in P) / denom


__all__ = [
    "BruteForceResult", "HopRecord", "SearchConfig", "SearchError", "SearchTrace",
    "brute_force_search", "mstm_search", "submodularity_ratio", "subset_size",
]
