"""Weighted Tsetlin Machine classifier and feature-selection benchmark."""

from ._tmfs import (
    BinaryDataset,
    HyperParams,
    RawDataset,
    Split,
    TMClassifier,
    apply_protocol,
    available_methods,
    default_k_grid,
    evaluate_curve,
    generate_feature_interaction,
    generate_hierarchical_bool,
    generate_parity,
    load_csv,
    score,
    spearman,
    stratified_split,
    take_rows,
    thermometer_encode,
)

__all__ = [
    "BinaryDataset",
    "HyperParams",
    "RawDataset",
    "Split",
    "TMClassifier",
    "apply_protocol",
    "available_methods",
    "default_k_grid",
    "evaluate_curve",
    "generate_feature_interaction",
    "generate_hierarchical_bool",
    "generate_parity",
    "load_csv",
    "score",
    "spearman",
    "stratified_split",
    "take_rows",
    "thermometer_encode",
]
