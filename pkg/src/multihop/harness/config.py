"""Experiment configuration: a single JSON document, strictly validated.

Unknown keys are rejected at every level so typos cannot silently fall back
to defaults.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ..anchors import AnchorSet, PerturbConfig
from ..models import CLASSIFICATION, REGRESSION, Polynomial, SpecError, spec_from_dict, spec_to_dict, spec_task
from ..mstm import SearchConfig, SearchError
from ..transfer import ConfidenceWeight, Distill, method_from_dict, method_to_dict
from .data import SyntheticSpec


class ConfigError(ValueError):
    pass


BASELINES = ("complex", "direct", "one_hop", "chains", "mstm", "mstm_np", "brute_force")
DATA_SOURCES = ("csv", "synthetic_poly", "gaussian_mixture")


def _check_keys(d, allowed, where, required=()):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}; allowed: {sorted(allowed)}")
    missing = [k for k in required if k not in d]
    if missing:
        raise ConfigError(f"missing key(s) {missing} in {where}")


def _dataclass_from(cls, d, where, skip=()):
    names = [f.name for f in fields(cls) if f.name not in skip]
    _check_keys(d, names, where)
    try:
        return cls(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


@dataclass(frozen=True)
class CsvSource:
    path: str
    label_column: str
    task: str = CLASSIFICATION


@dataclass(frozen=True)
class MixtureSource:
    n_samples: int = 2000
    n_features: int = 10
    n_classes: int = 2
    n_informative: int = 6
    n_clusters_per_class: int = 3
    class_sep: float = 1.0
    flip_y: float = 0.05
    seed: int = 0


@dataclass(frozen=True)
class SplitConfig:
    test_fraction: float = 0.25
    repeats: int = 10
    validation_size: int | None = None
    validation_fraction: float | None = None

    def __post_init__(self):
        if not 0 < self.test_fraction < 1:
            raise ConfigError("split.test_fraction must lie in (0, 1)")
        if self.repeats < 1:
            raise ConfigError("split.repeats must be at least 1")
        if self.validation_size is not None and self.validation_fraction is not None:
            raise ConfigError("give split.validation_size or split.validation_fraction, not both")
        if self.validation_fraction is not None and not 0 < self.validation_fraction < 1:
            raise ConfigError("split.validation_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class FitSettings:
    epochs: int = 50
    learning_rate: float = 0.05
    batch_size: int = 32
    irls_tol: float = 1e-8
    irls_max_iter: int = 100


@dataclass
class ExperimentConfig:
    data: object                       # CsvSource | SyntheticSpec | MixtureSource
    complex: object
    simple: object
    anchors: AnchorSet | None = None
    anchor_k: int | None = None
    perturbation: PerturbConfig = field(default_factory=PerturbConfig)
    search: SearchConfig = field(default_factory=SearchConfig)
    methods: tuple = (Distill(),)
    split: SplitConfig = field(default_factory=SplitConfig)
    baselines: tuple = ("complex", "direct", "one_hop", "mstm", "mstm_np")
    chains: dict = field(default_factory=dict)
    fit: FitSettings = field(default_factory=FitSettings)
    brute_force_budget: int = 20000
    output_dir: str | None = None
    save_models: bool = False
    name: str = "experiment"

    @property
    def task(self):
        if isinstance(self.data, SyntheticSpec):
            return REGRESSION
        if isinstance(self.data, MixtureSource):
            return CLASSIFICATION
        return self.data.task

    @property
    def synthetic(self):
        return isinstance(self.data, SyntheticSpec)

    def with_seed(self, seed):
        from dataclasses import replace
        return replace(self, search=replace(self.search, seed=int(seed)))

    def to_dict(self):
        if isinstance(self.data, SyntheticSpec):
            data = {"source": "synthetic_poly", **asdict(self.data)}
        elif isinstance(self.data, MixtureSource):
            data = {"source": "gaussian_mixture", **asdict(self.data)}
        else:
            data = {"source": "csv", **asdict(self.data)}
        anchors = ({"specs": [spec_to_dict(s) for s in self.anchors.specs]}
                   if self.anchors is not None else {"k": self.anchor_k})
        s = self.search
        return {
            "name": self.name,
            "data": data,
            "complex": spec_to_dict(self.complex),
            "simple": spec_to_dict(self.simple),
            "anchors": anchors,
            "perturbation": asdict(self.perturbation),
            "search": {"m": s.m, "n": s.n, "delta": s.delta, "seed": s.seed, "reward": s.reward},
            "methods": [method_to_dict(m) for m in self.methods],
            "split": asdict(self.split),
            "baselines": list(self.baselines),
            "chains": {k: [spec_to_dict(x) for x in v] for k, v in self.chains.items()},
            "fit": asdict(self.fit),
            "brute_force_budget": self.brute_force_budget,
            "output_dir": self.output_dir,
            "save_models": self.save_models,
        }


TOP_KEYS = ("name", "data", "complex", "simple", "anchors", "perturbation", "search", "methods",
            "split", "baselines", "chains", "fit", "brute_force_budget", "output_dir", "save_models")


def _parse_data(d):
    _check_keys(d, ("source",) + tuple({f.name for cls in (CsvSource, SyntheticSpec, MixtureSource)
                                         for f in fields(cls)}), "data", required=("source",))
    d = dict(d)
    source = d.pop("source")
    if source == "csv":
        src = _dataclass_from(CsvSource, d, "data (csv)")
        if src.task not in (CLASSIFICATION, REGRESSION):
            raise ConfigError(f"data.task must be {CLASSIFICATION!r} or {REGRESSION!r}")
        return src
    if source == "synthetic_poly":
        return _dataclass_from(SyntheticSpec, d, "data (synthetic_poly)")
    if source == "gaussian_mixture":
        return _dataclass_from(MixtureSource, d, "data (gaussian_mixture)")
    raise ConfigError(f"data.source must be one of {DATA_SOURCES}, got {source!r}")


def _parse_spec(d, where):
    try:
        return spec_from_dict(d)
    except (SpecError, TypeError, KeyError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_config(raw: dict, base_dir=None) -> ExperimentConfig:
    """Validated :class:`ExperimentConfig` from a decoded JSON document."""
    _check_keys(raw, TOP_KEYS, "config", required=("data", "complex", "simple"))
    data = _parse_data(raw["data"])
    if isinstance(data, CsvSource) and base_dir is not None and not Path(data.path).is_absolute():
        data = CsvSource(str(Path(base_dir) / data.path), data.label_column, data.task)
    complex_spec = _parse_spec(raw["complex"], "complex")
    simple_spec = _parse_spec(raw["simple"], "simple")

    anchors_raw = raw.get("anchors", {"k": 3})
    _check_keys(anchors_raw, ("k", "specs"), "anchors")
    if ("k" in anchors_raw) == ("specs" in anchors_raw):
        raise ConfigError("anchors needs exactly one of 'k' or 'specs'")
    anchors, anchor_k = None, None
    if "specs" in anchors_raw:
        try:
            anchors = AnchorSet([_parse_spec(s, "anchors.specs") for s in anchors_raw["specs"]])
        except ValueError as exc:
            raise ConfigError(f"anchors.specs: {exc}") from None
    else:
        anchor_k = anchors_raw["k"]
        if not isinstance(anchor_k, int) or anchor_k < 1:
            raise ConfigError("anchors.k must be a positive integer")

    perturbation = _dataclass_from(PerturbConfig, raw.get("perturbation", {}), "perturbation")

    methods_raw = raw.get("methods", [{"type": "distill"}])
    if not isinstance(methods_raw, list) or not methods_raw:
        raise ConfigError("methods must be a non-empty list")
    try:
        methods = tuple(method_from_dict(m) for m in methods_raw)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"methods: {exc}") from None

    search_raw = raw.get("search", {})
    _check_keys(search_raw, ("m", "n", "delta", "seed", "reward"), "search")
    try:
        search = SearchConfig(**search_raw)
    except (SearchError, TypeError) as exc:
        raise ConfigError(f"search: {exc}") from None

    split_cfg = _dataclass_from(SplitConfig, raw.get("split", {}), "split")
    fit_cfg = _dataclass_from(FitSettings, raw.get("fit", {}), "fit")

    baselines = raw.get("baselines", list(ExperimentConfig.baselines))
    if not isinstance(baselines, list) or not baselines:
        raise ConfigError("baselines must be a non-empty list")
    bad = [b for b in baselines if b not in BASELINES]
    if bad or len(set(baselines)) != len(baselines):
        raise ConfigError(f"baselines must be distinct entries of {BASELINES}, got {baselines}")

    chains_raw = raw.get("chains", {})
    if not isinstance(chains_raw, dict):
        raise ConfigError("chains must map a chain name to a list of intermediate specs")
    chains = {str(k): tuple(_parse_spec(s, f"chains.{k}") for s in v) for k, v in chains_raw.items()}
    if "chains" in baselines and not chains:
        raise ConfigError("baseline 'chains' needs a non-empty 'chains' mapping")

    cfg = ExperimentConfig(
        data=data, complex=complex_spec, simple=simple_spec, anchors=anchors, anchor_k=anchor_k,
        perturbation=perturbation, search=search, methods=methods, split=split_cfg,
        baselines=tuple(baselines), chains=chains, fit=fit_cfg,
        brute_force_budget=int(raw.get("brute_force_budget", 20000)),
        output_dir=raw.get("output_dir"), save_models=bool(raw.get("save_models", False)),
        name=str(raw.get("name", "experiment")),
    )
    _check_consistency(cfg)
    return cfg


def _check_consistency(cfg: ExperimentConfig):
    task = cfg.task
    simple_task = spec_task(cfg.simple)
    if simple_task is not None and simple_task != task:
        raise ConfigError(f"simple model {cfg.simple!r} is a {simple_task} model but the data is {task}")
    if cfg.synthetic and not isinstance(cfg.complex, Polynomial):
        raise ConfigError("synthetic data uses the generator polynomial as the complex model; "
                          "'complex' must be a polynomial spec")
    if cfg.synthetic and cfg.complex.degree != cfg.data.degree:
        raise ConfigError(f"complex degree {cfg.complex.degree} differs from the generator "
                          f"degree {cfg.data.degree}")
    if task == REGRESSION:
        if any(isinstance(m, ConfidenceWeight) for m in cfg.methods):
            raise ConfigError("confidence weighting needs a classification task")
        if cfg.search.reward != "neg_mse":
            raise ConfigError("regression experiments need search.reward = 'neg_mse'")
    elif cfg.search.reward == "neg_mse":
        raise ConfigError("classification experiments cannot use the neg_mse reward")
    names = {m.__class__.__name__ for m in cfg.methods}
    if len(names) != len(cfg.methods):
        raise ConfigError("each transfer method type may appear once in 'methods'")


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    return parse_config(raw, base_dir=path.parent)
