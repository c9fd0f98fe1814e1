# -*- coding: utf-8 -*-
"""
异常检测模块

孤立森林在 Z_ν ∪ Z_L 上拟合，按 contamination 定阈值后划分 U
"""

from .detection import (
    AnomalyPartition,
    contamination,
    expected_loss,
    fit_threshold,
    partition_unlabeled,
    threshold_for,
)
from .forest import (
    IsolationForest,
    anomaly_score,
    average_path_length,
    build_forest,
    build_tree,
    depth_limit,
    score_from_path_length,
    tree_path_lengths,
    tree_seeds,
)

__all__ = [
    "AnomalyPartition",
    "IsolationForest",
    "anomaly_score",
    "average_path_length",
    "build_forest",
    "build_tree",
    "contamination",
    "depth_limit",
    "expected_loss",
    "fit_threshold",
    "partition_unlabeled",
    "score_from_path_length",
    "threshold_for",
    "tree_path_lengths",
    "tree_seeds",
]
