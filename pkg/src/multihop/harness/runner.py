"""Config-driven experiment execution."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from threadpoolctl import threadpool_limits

from ..anchors import PerturbConfig, derive_anchors
from ..metrics import accuracy, confidence_analysis, cross_entropy, mse, weighted_gini_index
from ..models import Cart, FitConfig, fit, predict
from ..mstm import SearchConfig, brute_force_search, mstm_search
from ..seeding import derive_seed
from ..transfer import ConfidenceWeight, Distill, Hop, TransferPlan, chain_transfer, hop, method_name
from .config import CsvSource, ExperimentConfig, MixtureSource
from .data import (DataError, Dataset, SyntheticSpec, default_validation_size, gaussian_mixture_dataset,
                   load_csv, noisy_teacher, split, synthetic_poly_dataset)

log = logging.getLogger(__name__)

# stream ids inside derive_seed(master, repeat, stream)
_SEED_COMPLEX, _SEED_SIMPLE, _SEED_SEARCH = 1, 2, 3
TEST_KEY = "__test__"


class ExperimentError(RuntimeError):
    """Runtime failure; the message names the failing stage."""


@dataclass
class ReportBundle:
    name: str = "experiment"
    methods: list = field(default_factory=list)        # display order
    rows: list = field(default_factory=list)           # (method, repeat, metric, value)
    traces: list = field(default_factory=list)         # one JSON-ready dict per repeat
    curves: dict = field(default_factory=dict)         # name -> (columns, 2-D array)
    config: dict = field(default_factory=dict)
    label_mapping: dict = field(default_factory=dict)
    models: dict = field(default_factory=dict)         # repeat -> {label: TrainedModel}

    def add(self, method, repeat, metric, value):
        if method not in self.methods:
            self.methods.append(method)
        self.rows.append((method, int(repeat), metric, float(value)))

    def values(self, method, metric):
        return [v for m, _, k, v in self.rows if m == method and k == metric]


def _load_dataset(cfg: ExperimentConfig) -> Dataset:
    if isinstance(cfg.data, CsvSource):
        return load_csv(cfg.data.path, cfg.data.label_column, cfg.data.task)
    if isinstance(cfg.data, MixtureSource):
        d = cfg.data
        return gaussian_mixture_dataset(d.n_samples, d.n_features, d.n_classes, d.n_informative,
                                        d.n_clusters_per_class, d.class_sep, d.flip_y, d.seed)
    raise TypeError("synthetic data is generated per repeat")


def method_labels(cfg: ExperimentConfig):
    """Report labels in config order."""
    out = []
    for b in cfg.baselines:
        if b in ("complex", "direct"):
            out.append(b)
        elif b == "chains":
            out.extend(f"{name}[{method_name(m)}]" for name in cfg.chains for m in cfg.methods)
        else:
            out.extend(f"{b}[{method_name(m)}]" for m in cfg.methods)
    return out


class _Stage:
    """Re-raise failures with the stage and repeat attached."""

    def __init__(self, name, repeat):
        self.name, self.repeat = name, repeat

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, ExperimentError):
            raise ExperimentError(f"stage '{self.name}' failed on repeat {self.repeat}: "
                                  f"{type(exc).__name__}: {exc}") from exc
        return False


@dataclass
class _Split:
    train_X: np.ndarray
    train_y: object          # labels, or None for synthetic regression
    val_X: np.ndarray
    val_y: np.ndarray
    test_X: np.ndarray
    test_y: np.ndarray
    direct_targets: object   # targets for the direct baseline
    complex_model: object = None
    clean: np.ndarray | None = None


def _prepare_repeat(cfg: ExperimentConfig, dataset, repeat, master):
    if cfg.synthetic:
        spec = SyntheticSpec(**{**cfg.data.__dict__, "seed": cfg.data.seed + repeat})
        ds, clean = synthetic_poly_dataset(spec)
        X = ds.features
        # the grid is the training, validation and test set; scoring is against ground truth
        sp = _Split(X, None, X, clean, X, clean, ds.targets, clean=clean)
        sp.complex_model = noisy_teacher(spec, ds, clean)
        return sp
    if cfg.split.validation_fraction is not None:
        n_train = len(dataset) - int(round(cfg.split.test_fraction * len(dataset)))
        v = int(round(cfg.split.validation_fraction * n_train))
    else:
        v = cfg.split.validation_size
    tr, va, te = split(dataset, cfg.split.test_fraction, v, repeat, master)
    sp = _Split(tr.features, tr.y, va.features, va.y, te.features, te.y, tr.targets)
    with _Stage("complex", repeat):
        sp.complex_model = fit(cfg.complex, tr.features, tr.targets,
                               _fit_config(cfg, derive_seed(master, repeat, _SEED_COMPLEX)))
    return sp


def _intermediate_method(cfg, method):
    # intermediate models may be poorly calibrated, so they are distilled even
    # when the final hop is confidence weighted
    if isinstance(method, ConfidenceWeight):
        return next((m for m in cfg.methods if isinstance(m, Distill)), Distill())
    return method


def _fit_config(cfg: ExperimentConfig, seed):
    f = cfg.fit
    return FitConfig(seed=seed, epochs=f.epochs, learning_rate=f.learning_rate,
                     batch_size=f.batch_size, irls_tol=f.irls_tol, irls_max_iter=f.irls_max_iter)


def _metrics(cfg, model, X, y):
    if model.n_classes == 0:
        return {"mse": mse(predict(model, X)[:, 0], y)}
    P = predict(model, X)
    out = {"accuracy": accuracy(P, y), "cross_entropy": cross_entropy(P, y)}
    if isinstance(model.spec, Cart):
        out["wgi"] = weighted_gini_index(model, X, y)
    return out


def _curve_value(model, X):
    out = predict(model, X)
    return out[:, 0] if model.n_classes == 0 else np.argmax(out, axis=1).astype(np.float64)


def run_repeat(cfg: ExperimentConfig, repeat: int, dataset=None, n_jobs=1):
    """One repeat; returns ``(rows, trace, curve, models)``. Pure given ``cfg`` and ``repeat``."""
    master = cfg.search.seed
    with threadpool_limits(limits=1):
        return _run_repeat(cfg, repeat, dataset, master, n_jobs)


def _run_repeat(cfg, repeat, dataset, master, n_jobs):
    rows, models = [], {}
    sp = _prepare_repeat(cfg, dataset, repeat, master)
    C = sp.complex_model
    simple_cfg = _fit_config(cfg, derive_seed(master, repeat, _SEED_SIMPLE))
    with _Stage("anchors", repeat):
        anchors = cfg.anchors if cfg.anchors is not None else derive_anchors(cfg.complex, cfg.anchor_k)
    trace = {"repeat": repeat, "anchors": [_spec_json(a) for a in anchors.specs],
             "searches": {}, "plans": {}, "brute_force": {}}
    curve_cols = ["x" if sp.test_X.shape[1] == 1 else "row", "ground_truth", "teacher"]
    curve_data = [sp.test_X[:, 0] if sp.test_X.shape[1] == 1 else np.arange(len(sp.test_X), dtype=float),
                  np.asarray(sp.test_y, dtype=np.float64), _curve_value(C, sp.test_X)]

    def record(label, model, intermediates=()):
        models[label] = model
        for metric, v in _metrics(cfg, model, sp.test_X, sp.test_y).items():
            rows.append((label, repeat, metric, v))
        for i, inter in enumerate(intermediates, start=1):
            curve_cols.append(f"{label}.hop{i}")
            curve_data.append(_curve_value(inter, sp.test_X))
        curve_cols.append(label)
        curve_data.append(_curve_value(model, sp.test_X))

    one_hop = {}
    for b in cfg.baselines:
        if b == "complex":
            models["complex"] = C
            for metric, v in _metrics(cfg, C, sp.test_X, sp.test_y).items():
                rows.append(("complex", repeat, metric, v))
        elif b == "direct":
            with _Stage("direct", repeat):
                record("direct", fit(cfg.simple, sp.train_X, sp.direct_targets, simple_cfg))
        elif b == "one_hop":
            for m in cfg.methods:
                with _Stage(f"one_hop[{method_name(m)}]", repeat):
                    s = hop(C, cfg.simple, sp.train_X, sp.train_y, m, simple_cfg)
                one_hop[method_name(m)] = s
                record(f"one_hop[{method_name(m)}]", s)
        elif b == "chains":
            for name, specs in cfg.chains.items():
                for m in cfg.methods:
                    label = f"{name}[{method_name(m)}]"
                    inter = _intermediate_method(cfg, m)
                    plan = TransferPlan(tuple(Hop(s, inter, derive_seed(master, repeat, 4, i))
                                              for i, s in enumerate(specs, start=1)), m)
                    with _Stage(label, repeat):
                        s, inters = chain_transfer(C, plan, cfg.simple, sp.train_X, sp.train_y,
                                                   simple_cfg, require_decreasing=False)
                    trace["plans"][label] = _plan_json(plan)
                    record(label, s, inters)
        elif b in ("mstm", "mstm_np"):
            pcfg = cfg.perturbation if b == "mstm" else PerturbConfig(identity=True)
            for m in cfg.methods:
                label = f"{b}[{method_name(m)}]"
                sc = SearchConfig(m=cfg.search.m, n=cfg.search.n, delta=cfg.search.delta,
                                  seed=derive_seed(master, repeat, _SEED_SEARCH),
                                  reward=cfg.search.reward, hop_method=_intermediate_method(cfg, m),
                                  final_method=m)
                with _Stage(label, repeat):
                    s, plan, tr = mstm_search(C, anchors, cfg.simple, (sp.train_X, sp.train_y),
                                              (sp.val_X, sp.val_y), sc, pcfg, simple_cfg, n_jobs=n_jobs)
                    _, inters = chain_transfer(C, plan, cfg.simple, sp.train_X, sp.train_y,
                                               simple_cfg, require_decreasing=False)
                trace["searches"][label] = tr.to_dict()
                trace["plans"][label] = _plan_json(plan)
                record(label, s, inters)
                if b == "mstm" and s.n_classes and method_name(m) in one_hop:
                    summary = confidence_analysis(one_hop[method_name(m)], s, C, sp.test_X, sp.test_y)
                    for key, v in summary.to_dict().items():
                        if v is not None:
                            rows.append((label, repeat, key, v))
        elif b == "brute_force":
            for m in cfg.methods:
                label = f"brute_force[{method_name(m)}]"
                with _Stage(label, repeat):
                    res = brute_force_search(C, anchors, cfg.simple, (sp.train_X, sp.train_y),
                                             (sp.val_X, sp.val_y), m=cfg.search.m,
                                             reward=cfg.search.reward,
                                             hop_method=_intermediate_method(cfg, m), final_method=m,
                                             seed=derive_seed(master, repeat, _SEED_SEARCH),
                                             fit_cfg=simple_cfg, budget=cfg.brute_force_budget)
                    s, inters = chain_transfer(C, res.plan, cfg.simple, sp.train_X, sp.train_y,
                                               simple_cfg, require_decreasing=False)
                trace["brute_force"][label] = {
                    "best": list(res.best_tuple), "reward": res.reward,
                    "table": [[list(t), r] for t, r in res.table],
                }
                trace["plans"][label] = _plan_json(res.plan)
                record(label, s, inters)
    curve = (curve_cols, np.column_stack(curve_data))
    models[TEST_KEY] = (sp.test_X, np.asarray(sp.test_y))
    return rows, trace, curve, models


def _spec_json(spec):
    from ..models import spec_to_dict
    return spec_to_dict(spec)


def _plan_json(plan: TransferPlan):
    from ..transfer import method_to_dict
    return {"hops": [{"spec": _spec_json(h.spec), "method": method_to_dict(h.method), "seed": h.seed}
                     for h in plan.hops],
            "final_method": method_to_dict(plan.final_method)}


def run_experiment(cfg: ExperimentConfig, n_jobs: int = 1, keep_models: bool | None = None) -> ReportBundle:
    """Run every repeat and baseline; repeats run in parallel when ``n_jobs != 1``."""
    keep_models = cfg.save_models if keep_models is None else keep_models
    dataset = None
    if not cfg.synthetic:
        try:
            dataset = _load_dataset(cfg)
        except OSError as exc:
            raise DataError(f"cannot read data: {exc}") from None
        if cfg.split.validation_size is None and cfg.split.validation_fraction is None:
            n_train = len(dataset) - int(round(cfg.split.test_fraction * len(dataset)))
            log.info("validation size %d", default_validation_size(n_train))

    repeats = range(cfg.split.repeats)
    if n_jobs == 1 or len(repeats) == 1:
        results = [run_repeat(cfg, r, dataset, n_jobs=n_jobs) for r in repeats]
    else:
        results = Parallel(n_jobs=n_jobs)(delayed(run_repeat)(cfg, r, dataset, 1) for r in repeats)

    bundle = ReportBundle(name=cfg.name, methods=[], config=cfg.to_dict(),
                          label_mapping=dict(dataset.label_mapping) if dataset is not None else {})
    order = method_labels(cfg)
    present = {row[0] for res in results for row in res[0]}
    bundle.methods = [m for m in order if m in present]
    for r, (rows, trace, curve, models) in zip(repeats, results):
        bundle.rows.extend(rows)
        bundle.traces.append(trace)
        bundle.curves[f"repeat_{r}"] = curve
        if keep_models:
            bundle.models[r] = models
    return bundle
