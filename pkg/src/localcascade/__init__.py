"""Local Cascade Ensemble: bagged cascade trees with per-node tuned boosting.

Every internal node of each bagged tree fits a boosted-tree base learner and
appends its per-row outputs as new feature columns before splitting, combining
the bias reduction of boosting with the variance reduction of bagging.
"""

from .cascade import (
    CascadeConfig,
    CascadeTree,
    augment,
    best_split,
    fit_tree,
    predict_tree,
    predict_tree_matrix,
)
from .dataset import (
    CLASSIFICATION,
    REGRESSION,
    Dataset,
    DatasetError,
    bootstrap_sample,
    kfold_indices,
    load_csv,
    train_test_split,
)
from .ensemble import LCEConfig, LCEModel, fit, predict, predict_proba
from .evaluation import (
    BenchReport,
    accuracy,
    export_csv,
    min_rank_table,
    run_benchmark,
    wins_ties,
)
from .gbt import (
    GBTConfig,
    GBTModel,
    fit_gbt,
    grad_hess,
    leaf_weight,
    predict_gbt,
    predict_matrix,
    split_gain,
)
from .model_io import (
    CorruptPayloadError,
    ModelFormatError,
    SchemaError,
    UnknownVersionError,
    load,
    save,
)
from .tuning import SearchSpace, TuneResult, grid_search_cv, tune_base_learner

__version__ = "0.1.0"

__all__ = [
    "CLASSIFICATION",
    "REGRESSION",
    "Dataset",
    "DatasetError",
    "load_csv",
    "train_test_split",
    "bootstrap_sample",
    "kfold_indices",
    "GBTConfig",
    "GBTModel",
    "grad_hess",
    "split_gain",
    "leaf_weight",
    "fit_gbt",
    "predict_gbt",
    "predict_matrix",
    "CascadeConfig",
    "CascadeTree",
    "augment",
    "best_split",
    "fit_tree",
    "predict_tree",
    "predict_tree_matrix",
    "LCEConfig",
    "LCEModel",
    "fit",
    "predict",
    "predict_proba",
    "SearchSpace",
    "TuneResult",
    "tune_base_learner",
    "grid_search_cv",
    "accuracy",
    "min_rank_table",
    "wins_ties",
    "run_benchmark",
    "BenchReport",
    "export_csv",
    "save",
    "load",
    "ModelFormatError",
    "UnknownVersionError",
    "SchemaError",
    "CorruptPayloadError",
    "__version__",
]
