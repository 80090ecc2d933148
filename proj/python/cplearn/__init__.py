"""Supervised learning with an implicit CP-format weight tensor.

The heavy lifting lives in the compiled `_core` extension; this package
re-exports its public surface.
"""

from cplearn._core import (
    CplearnError,
    ColumnSchema,
    CpModel,
    Dataset,
    EpochStats,
    FeatureMapSpec,
    FitReport,
    Init,
    LinearSolution,
    Loss,
    MapKind,
    Metric,
    Optimizer,
    RegKind,
    RegularizerSpec,
    SplitDataset,
    StandardizationStats,
    SyntheticDataset,
    TrainConfig,
    __version__,
    build_b_vector,
    evaluate,
    evaluate_scores,
    fit,
    fit_linear_baseline,
    generate_synthetic_poly,
    init_linear,
    init_random,
    l2_penalty,
    linear_predict,
    load_csv,
    make_model,
    map_categorical,
    map_normalized_polynomial,
    map_polynomial,
    materialize_weights,
    order_penalty,
    save_csv,
    split,
    standardize_apply,
    standardize_fit,
)

__all__ = [
    "CplearnError",
    "ColumnSchema",
    "CpModel",
    "Dataset",
    "EpochStats",
    "FeatureMapSpec",
    "FitReport",
    "Init",
    "LinearSolution",
    "Loss",
    "MapKind",
    "Metric",
    "Optimizer",
    "RegKind",
    "RegularizerSpec",
    "SplitDataset",
    "StandardizationStats",
    "SyntheticDataset",
    "TrainConfig",
    "__version__",
    "build_b_vector",
    "evaluate",
    "evaluate_scores",
    "fit",
    "fit_linear_baseline",
    "generate_synthetic_poly",
    "init_linear",
    "init_random",
    "l2_penalty",
    "linear_predict",
    "load_csv",
    "make_model",
    "map_categorical",
    "map_normalized_polynomial",
    "map_polynomial",
    "materialize_weights",
    "order_penalty",
    "save_csv",
    "split",
    "standardize_apply",
    "standardize_fit",
]
