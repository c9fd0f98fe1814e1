# -*- coding: utf-8 -*-
"""
反例挑选模块

按异常程度对剩余样本排序（越远离正样本边界越靠前），取前若干个作为反例集 Ñ
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from sklearn.metrics import pairwise_distances_argmin_min

from services.anomaly import AnomalyPartition

logger = logging.getLogger(__name__)

RANK_MODES = ("forest_score", "min_distance")
POPULATIONS = ("match_positives", "all_leftovers", "random_count")


@dataclass(frozen=True)
class RankedLeftovers:
    """按 rank_value 非增排序的剩余样本（ids 为 U 中的行号）"""

    ids: np.ndarray
    values: np.ndarray
    mode: str

    def __len__(self) -> int:
        return len(self.ids)

    def to_frame(self, selected: Optional[np.ndarray] = None, sample_ids: Optional[np.ndarray] = None) -> pd.DataFrame:
        """
        反例导出表 (sample_id, rank_value, selected_flag)

        Args:
            selected: 被选中的行号
            sample_ids: U 行号到原始样本下标的映射，为 None 时直接用行号
        """
        flags = np.isin(self.ids, selected if selected is not None else [])
        ids = self.ids if sample_ids is None else np.asarray(sample_ids)[self.ids]
        return pd.DataFrame({"sample_id": ids, "rank_value": self.values, "selected_flag": flags.astype(np.int64)})


def _sorted(ids: np.ndarray, values: np.ndarray, mode: str) -> RankedLeftovers:
    # 降序，相同值按行号升序
    order = np.lexsort((ids, -values))
    return RankedLeftovers(ids=ids[order], values=values[order], mode=mode)


def rank_leftovers(
    partition: AnomalyPartition,
    positives: np.ndarray,
    mode: str = "forest_score",
    encodings_u: Optional[np.ndarray] = None,
) -> RankedLeftovers:
    """
    对剩余样本排序

    Args:
        partition: U 的划分
        positives: Z_L（min_distance 模式使用）
        mode: forest_score 按森林分数降序；min_distance 按到 Z_L ∪ Z̃_PUL 的最小欧氏距离降序
        encodings_u: Z_U（min_distance 模式必需）

    Returns:
        RankedLeftovers: 排序结果
    """
    if mode not in RANK_MODES:
        raise ValueError(f"未知的排序方式: {mode}, 可选 {RANK_MODES}")
    ids = partition.leftover_ids
    if len(ids) == 0:
        raise ValueError("没有剩余样本可供排序")

    if mode == "forest_score":
        values = partition.scores[ids]
    else:
        if encodings_u is None:
            raise ValueError("min_distance 模式需要 Z_U")
        encodings_u = np.asarray(encodings_u, dtype=np.float64)
        reference = np.vstack([np.asarray(positives, dtype=np.float64), encodings_u[partition.inlier_ids]])
        _, values = pairwise_distances_argmin_min(encodings_u[ids], reference, metric="euclidean")
    return _sorted(ids, np.asarray(values, dtype=np.float64), mode)


def select_negatives(
    ranked: RankedLeftovers,
    mode: str = "match_positives",
    n_positives: int = 0,
    seed: int = 0,
) -> np.ndarray:
    """
    选取反例集 Ñ

    Args:
        ranked: 排好序的剩余样本
        mode: match_positives 取前 n_positives 个；all_leftovers 全取；
            random_count 随机数量的随机子集
        n_positives: |P_L|
        seed: random_count 使用的随机种子

    Returns:
        np.ndarray: 选中的 U 行号
    """
    if mode not in POPULATIONS:
        raise ValueError(f"未知的反例数量模式: {mode}, 可选 {POPULATIONS}")
    if len(ranked) == 0:
        raise ValueError("没有剩余样本可供挑选")

    if mode == "match_positives":
        selected = ranked.ids[:n_positives]
    elif mode == "all_leftovers":
        selected = ranked.ids.copy()
    else:
        rng = np.random.default_rng(seed)
        size = int(rng.integers(1, len(ranked) + 1))
        selected = np.sort(rng.choice(ranked.ids, size=size, replace=False))
    logger.info(f"挑选反例 mode={mode}: {len(selected)}/{len(ranked)}")
    return selected


def random_leftovers(partition: AnomalyPartition, count: int, seed: int) -> np.ndarray:
    """从剩余样本中随机取 count 个（不排序，消融对照）"""
    ids = partition.leftover_ids
    if len(ids) == 0:
        raise ValueError("没有剩余样本可供挑选")
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(ids, size=min(count, len(ids)), replace=False))


def random_unlabeled(n_unlabeled: int, count: int, seed: int) -> np.ndarray:
    """把 U 中随机 count 个样本直接当作反例（不经过检测器）"""
    if n_unlabeled == 0:
        raise ValueError("无标注集为空")
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n_unlabeled, size=min(count, n_unlabeled), replace=False))
