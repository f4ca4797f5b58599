from .base import (
    FitConfig,
    Hard,
    Real,
    Soft,
    TargetSpec,
    TaskMismatchError,
    TrainedModel,
    build_estimator,
    fit,
    predict,
    temperature_soften,
)
from .ensemble import BoostedTrees, RandomForest
from .linear import (
    LinearLSRegressor,
    PolynomialRegressor,
    RobustLinearRegressor,
    irls_bisquare_fit,
    wls_solve,
)
from .mlp import MLP
from .specs import (
    CLASSIFICATION,
    REGRESSION,
    ArchSpec,
    Cart,
    LinearLS,
    Mlp,
    Polynomial,
    RobustLinear,
    SpecError,
    TreeEnsemble,
    complexity,
    describe,
    spec_from_dict,
    spec_task,
    spec_to_dict,
)
from .tree import DecisionTree, gini

__all__ = [
    "ArchSpec", "BoostedTrees", "CLASSIFICATION", "Cart", "DecisionTree", "FitConfig", "Hard",
    "LinearLS", "LinearLSRegressor", "MLP", "Mlp", "Polynomial", "PolynomialRegressor",
    "REGRESSION", "RandomForest", "Real", "RobustLinear", "RobustLinearRegressor", "Soft",
    "SpecError", "TargetSpec", "TaskMismatchError", "TrainedModel", "TreeEnsemble",
    "build_estimator", "complexity", "describe", "fit", "gini", "irls_bisquare_fit", "predict",
    "spec_from_dict", "spec_task", "spec_to_dict", "temperature_soften", "wls_solve",
]
