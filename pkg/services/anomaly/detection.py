# -*- coding: utf-8 -*-
"""
阈值与划分模块

- contamination：C = |Z_L| / (n_pairs·s)
- fit_threshold：在拟合集分数上取 (1−C) 分位点，并列时少标记
- partition_unlabeled：U 中分数 ≤ 阈值为内点，其余为剩余样本
- expected_loss：给定阈值的期望损失诊断值
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .forest import IsolationForest

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnomalyPartition:
    """U 的内点 / 剩余划分；ids 为 U 中的行号"""

    inlier_ids: np.ndarray
    leftover_ids: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        for name in ("inlier_ids", "leftover_ids"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.int64))
        object.__setattr__(self, "scores", np.asarray(self.scores, dtype=np.float64))
        if len(np.intersect1d(self.inlier_ids, self.leftover_ids)):
            raise ValueError("内点与剩余样本不能重叠")
        if len(self.inlier_ids) + len(self.leftover_ids) != len(self.scores):
            raise ValueError("内点与剩余样本之和必须等于打分样本数")

    @property
    def n_inliers(self) -> int:
        return len(self.inlier_ids)

    @property
    def n_leftovers(self) -> int:
        return len(self.leftover_ids)

    def flagged(self) -> np.ndarray:
        mask = np.zeros(len(self.scores), dtype=bool)
        mask[self.leftover_ids] = True
        return mask

    def to_frame(self, sample_ids: Optional[np.ndarray] = None) -> pd.DataFrame:
        """分数表 (sample_id, score, flagged)"""
        ids = np.arange(len(self.scores)) if sample_ids is None else np.asarray(sample_ids)
        return pd.DataFrame({"sample_id": ids, "score": self.scores, "flagged": self.flagged().astype(np.int64)})

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "AnomalyPartition":
        flagged = frame["flagged"].to_numpy().astype(bool)
        return cls(
            inlier_ids=np.flatnonzero(~flagged),
            leftover_ids=np.flatnonzero(flagged),
            scores=frame["score"].to_numpy(dtype=np.float64),
        )


def contamination(n_outliers: int, n_pairs: int, samples_per_pair: int) -> float:
    """
    C = n_outliers / (n_pairs · s)

    Args:
        n_outliers: |Z_L|
        n_pairs: 配对数
        samples_per_pair: 每对生成数 s
    """
    if n_outliers < 0 or n_pairs < 0 or samples_per_pair < 0:
        raise ValueError("计数不能为负")
    denominator = n_pairs * samples_per_pair
    if denominator == 0:
        raise ValueError("n_pairs·s 为零，无法计算 contamination")
    return n_outliers / denominator


def threshold_for(scores: np.ndarray, c: float) -> float:
    """
    阈值为降序第 round(C·n) 个之后的分数，分数大于阈值者被标记

    并列分数跨越分位点时整体不标记，标记数只会偏少
    """
    scores = np.asarray(scores, dtype=np.float64)
    if len(scores) == 0:
        raise ValueError("拟合数据为空")
    if not 0.0 <= c < 1.0:
        raise ValueError(f"C 必须在[0,1)内: {c}")
    ranked = np.sort(scores)[::-1]
    k = min(int(np.floor(c * len(ranked) + 0.5)), len(ranked) - 1)
    return float(ranked[k])


def fit_threshold(
    forest: IsolationForest, fitting_data: np.ndarray, c: float, scores: Optional[np.ndarray] = None
) -> IsolationForest:
    """
    在拟合集上确定阈值

    Args:
        forest: 已构建的森林
        fitting_data: 拟合集（通常为 Z_ν ∪ Z_L）
        c: contamination
        scores: 拟合集上已算好的分数，为 None 时重新打分

    Returns:
        IsolationForest: 带阈值的新森林对象
    """
    if scores is None:
        scores = forest.score(fitting_data)
    threshold = threshold_for(scores, c)
    n_flagged = int(np.sum(scores > threshold))
    logger.info(f"阈值 {threshold:.6f}, C={c:.6f}, 拟合集标记 {n_flagged}/{len(scores)}")
    return forest.with_threshold(threshold, c)


def partition_unlabeled(forest: IsolationForest, encodings_u: np.ndarray) -> AnomalyPartition:
    """对 U 打分并按阈值划分为内点与剩余样本"""
    if not forest.is_thresholded():
        raise ValueError("森林尚未确定阈值")
    encodings_u = np.asarray(encodings_u)
    if len(encodings_u) == 0:
        return AnomalyPartition(inlier_ids=np.zeros(0), leftover_ids=np.zeros(0), scores=np.zeros(0))
    scores = forest.score(encodings_u)
    leftover = scores > forest.threshold
    partition = AnomalyPartition(
        inlier_ids=np.flatnonzero(~leftover),
        leftover_ids=np.flatnonzero(leftover),
        scores=scores,
    )
    logger.info(f"U 划分: 内点 {partition.n_inliers}, 剩余 {partition.n_leftovers}")
    return partition


def expected_loss(scores_in: Sequence[float], scores_out: Sequence[float], threshold: float, c: float) -> float:
    """
    C·(离群点漏检率) + (1−C)·(内点误报率)

    Args:
        scores_in: 应为内点的分数（Z_ν）
        scores_out: 应为离群点的分数（Z_L）
        threshold: 分数大于阈值判为离群
        c: contamination
    """
    scores_in = np.asarray(scores_in, dtype=np.float64)
    scores_out = np.asarray(scores_out, dtype=np.float64)
    if len(scores_in) == 0 or len(scores_out) == 0:
        raise ValueError("内点和离群点分数都不能为空")
    false_negative = float(np.mean(scores_out <= threshold))
    false_positive = float(np.mean(scores_in > threshold))
    return c * false_negative + (1.0 - c) * false_positive
