from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .data import (
    DataError,
    Dataset,
    SyntheticSpec,
    gaussian_mixture_dataset,
    load_csv,
    noisy_teacher,
    split,
    synthetic_poly_dataset,
)
from .report import emit_report
from .runner import ExperimentError, ReportBundle, run_experiment

__all__ = [
    "ConfigError", "DataError", "Dataset", "ExperimentConfig", "ExperimentError", "ReportBundle",
    "SyntheticSpec", "emit_report", "gaussian_mixture_dataset", "load_csv", "load_config",
    "noisy_teacher", "parse_config", "run_experiment", "split", "synthetic_poly_dataset",
]
