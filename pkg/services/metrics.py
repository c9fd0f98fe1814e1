# -*- coding: utf-8 -*-
"""
评估指标模块

准确率 / 精确率 / 召回率 / F1 / AUC、Mann-Whitney U 检验、反例集纯度
"""

from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import norm, rankdata, tiecorrect
from sklearn.metrics import confusion_matrix

from core.exceptions import ShapeMismatchError


@dataclass(frozen=True)
class MetricsRecord:
    """一组二分类指标及混淆矩阵计数"""

    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    tn: int
    fn: int
    auc: Optional[float] = None

    def with_auc(self, value: float) -> "MetricsRecord":
        return MetricsRecord(**{**asdict(self), "auc": float(value)})

    def to_dict(self) -> dict:
        return asdict(self)


def _binary_vector(values, name: str) -> np.ndarray:
    array = np.asarray(values).reshape(-1)
    if array.size and not np.isin(array, (0, 1)).all():
        raise ValueError(f"{name} 只能包含0和1")
    return array.astype(np.int64)


def classification_metrics(truth: Sequence[int], predicted: Sequence[int]) -> MetricsRecord:
    """
    混淆矩阵指标（不含 AUC）

    分母为零时 precision / recall 记为0
    """
    truth = _binary_vector(truth, "truth")
    predicted = _binary_vector(predicted, "predicted")
    if truth.shape != predicted.shape:
        raise ShapeMismatchError(f"真实标签与预测长度不一致: {len(truth)} vs {len(predicted)}")
    if len(truth) == 0:
        raise ValueError("标签为空")

    tn, fp, fn, tp = (int(v) for v in confusion_matrix(truth, predicted, labels=[0, 1]).ravel())
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricsRecord(
        accuracy=(tp + tn) / len(truth),
        precision=precision,
        recall=recall,
        f1=f1,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
    )


def auc(truth: Sequence[int], scores: Sequence[float]) -> float:
    """
    随机正样本分数高于随机负样本的概率（并列计1/2），由秩和公式计算
    """
    truth = _binary_vector(truth, "truth")
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    if truth.shape != scores.shape:
        raise ShapeMismatchError(f"真实标签与分数长度不一致: {len(truth)} vs {len(scores)}")
    n_pos = int(truth.sum())
    n_neg = len(truth) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC 需要两类样本同时存在")
    ranks = rankdata(scores)
    rank_sum = float(ranks[truth == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def roc_points(truth: Sequence[int], scores: Sequence[float]) -> pd.DataFrame:
    """ROC 曲线上的点 (threshold, fpr, tpr)，阈值从高到低，用于外部绘图"""
    truth = _binary_vector(truth, "truth")
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    n_pos = max(int(truth.sum()), 1)
    n_neg = max(len(truth) - int(truth.sum()), 1)
    thresholds = np.unique(scores)[::-1]
    flagged = scores[None, :] >= thresholds[:, None]
    tpr = (flagged & (truth == 1)).sum(axis=1) / n_pos
    fpr = (flagged & (truth == 0)).sum(axis=1) / n_neg
    return pd.DataFrame(
        {
            "threshold": np.concatenate([[np.inf], thresholds]),
            "fpr": np.concatenate([[0.0], fpr]),
            "tpr": np.concatenate([[0.0], tpr]),
        }
    )


EXACT_MAX_SIZE = 8


def _exact_p_value(ranks: np.ndarray, n_a: int, u_a: float) -> float:
    """枚举所有 C(n_a+n_b, n_a) 种分组，按 |U − 均值| 不小于观测值的比例计双侧 p 值"""
    n_b = len(ranks) - n_a
    mean = n_a * n_b / 2.0
    chosen = np.array(list(combinations(range(len(ranks)), n_a)), dtype=np.int64)
    u_all = ranks[chosen].sum(axis=1) - n_a * (n_a + 1) / 2.0
    # 中秩为半整数，容差只吸收浮点误差
    extreme = np.abs(u_all - mean) >= abs(u_a - mean) - 1e-9
    return float(np.mean(extreme))


def mann_whitney_u(sample_a: Sequence[float], sample_b: Sequence[float]) -> Tuple[float, float]:
    """
    Mann-Whitney U 检验（中秩处理并列）

    两个样本都不超过 8 个时，p 值由全部分组枚举得到（含并列时同样精确）；
    更大的样本用正态近似，方差做并列校正并带连续性校正，方差为零时 p=1

    Returns:
        (U_a, 双侧 p 值)
    """
    a = np.asarray(sample_a, dtype=np.float64).reshape(-1)
    b = np.asarray(sample_b, dtype=np.float64).reshape(-1)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("两个样本都不能为空")
    n_a, n_b = len(a), len(b)
    ranks = rankdata(np.concatenate([a, b]))
    u_a = float(ranks[:n_a].sum() - n_a * (n_a + 1) / 2.0)
    if n_a <= EXACT_MAX_SIZE and n_b <= EXACT_MAX_SIZE:
        return u_a, _exact_p_value(ranks, n_a, u_a)

    mean = n_a * n_b / 2.0
    variance = tiecorrect(ranks) * n_a * n_b * (n_a + n_b + 1) / 12.0
    if variance <= 0.0:
        return u_a, 1.0
    z = (abs(u_a - mean) - 0.5) / np.sqrt(variance)
    p_value = min(1.0, float(2.0 * norm.sf(z)))
    return u_a, p_value


def negative_purity(selected: Sequence[int], hidden_truth: Sequence[int]) -> float:
    """选中样本中真实标签为负的比例"""
    selected = np.asarray(selected, dtype=np.int64).reshape(-1)
    truth = _binary_vector(hidden_truth, "hidden_truth")
    if len(selected) == 0:
        raise ValueError("选中集合为空")
    if selected.min() < 0 or selected.max() >= len(truth):
        raise IndexError(f"下标超出范围 [0, {len(truth)})")
    return float(np.mean(truth[selected] == 0))


def best_threshold_accuracy(values_pos: Sequence[float], values_neg: Sequence[float]) -> Tuple[float, float, str]:
    """
    单阈值分类能达到的最高准确率（两个方向都尝试）

    Returns:
        (准确率, 阈值, 方向 "pos_above" / "pos_below")
    """
    pos = np.asarray(values_pos, dtype=np.float64)
    neg = np.asarray(values_neg, dtype=np.float64)
    values = np.concatenate([pos, neg])
    truth = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    # 有限值之间的候选阈值，加上两端
    finite = np.unique(values[np.isfinite(values)])
    candidates = np.concatenate([[-np.inf], finite, [np.inf]])
    best = (0.0, float("nan"), "pos_above")
    for threshold in candidates:
        above = values >= threshold
        accuracy_above = float(np.mean(above == (truth == 1)))
        accuracy_below = 1.0 - accuracy_above
        if accuracy_above > best[0]:
            best = (accuracy_above, float(threshold), "pos_above")
        if accuracy_below > best[0]:
            best = (accuracy_below, float(threshold), "pos_below")
    return best
