"""Multi-hop model transfer: chain a complex model into a simple one through searched intermediates."""
from .anchors import AnchorError, AnchorSet, PerturbConfig, derive_anchors, perturb
from .estimator import MultihopTransferClassifier
from .metrics import (
    ConfidenceSummary,
    MetricReport,
    accuracy,
    aggregate_splits,
    confidence_analysis,
    cross_entropy,
    mse,
    weighted_gini_index,
)
from .models import (
    Cart,
    FitConfig,
    Hard,
    LinearLS,
    Mlp,
    Polynomial,
    Real,
    RobustLinear,
    Soft,
    TrainedModel,
    TreeEnsemble,
    complexity,
    fit,
    predict,
)
from .mstm import (
    BruteForceResult,
    SearchConfig,
    SearchTrace,
    brute_force_search,
    mstm_search,
    submodularity_ratio,
    subset_size,
)
from .seeding import derive_seed
from .transfer import ConfidenceWeight, Distill, Hop, TransferPlan, chain_transfer, hop

__version__ = "0.1.0"

__all__ = [
    "AnchorError", "AnchorSet", "BruteForceResult", "Cart", "ConfidenceSummary", "ConfidenceWeight",
    "Distill", "FitConfig", "Hard", "Hop", "LinearLS", "MetricReport", "Mlp",
    "MultihopTransferClassifier", "PerturbConfig", "Polynomial", "Real", "RobustLinear",
    "SearchConfig", "SearchTrace", "Soft", "TrainedModel", "TransferPlan", "TreeEnsemble",
    "accuracy", "aggregate_splits", "brute_force_search", "chain_transfer", "complexity",
    "confidence_analysis", "cross_entropy", "derive_anchors", "derive_seed", "fit", "hop",
    "mse", "mstm_search", "perturb", "predict", "submodularity_ratio", "subset_size",
    "weighted_gini_index",
]
