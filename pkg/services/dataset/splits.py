# -*- coding: utf-8 -*-
"""
PU 划分与预处理模块
"""

import logging
from typing import Iterable, Optional, Tuple

import numpy as np

from .types import ImageSet, PUSplit

logger = logging.getLogger(__name__)


def binarize(labels: np.ndarray, positive_class_ids: Iterable[int]) -> np.ndarray:
    """原始类别 -> 二值标签（属于正类集合为1）"""
    return np.isin(labels, list(positive_class_ids)).astype(np.int64)


def make_pu_split(
    images: ImageSet,
    positive_class_ids: Iterable[int],
    n_labeled: int,
    test: ImageSet,
    seed: int,
) -> PUSplit:
    """
    构造 PU 划分

    从正类训练样本中无放回均匀抽取 n_labeled 个作为 P_L（SCAR 假设），
    其余训练样本全部进入 U，U 的真实标签隐藏保存

    Args:
        images: 带原始类别标签的训练集
        positive_class_ids: 正类的原始类别集合
        n_labeled: 标注正样本数量
        test: 官方测试集（带原始类别标签）
        seed: 随机种子

    Returns:
        PUSplit: 划分结果
    """
    if images.labels is None or test.labels is None:
        raise ValueError("构造PU划分需要带标签的训练集和测试集")
    positive_ids = frozenset(int(c) for c in positive_class_ids)
    observed = set(np.unique(images.labels).tolist())
    if not positive_ids & observed:
        raise ValueError(f"正类 {sorted(positive_ids)} 与数据中的类别 {sorted(observed)} 没有交集")

    truth = binarize(images.labels, positive_ids)
    positive_rows = np.flatnonzero(truth == 1)
    if n_labeled <= 0 or n_labeled > len(positive_rows):
        raise ValueError(f"n_labeled={n_labeled} 超出可用正样本数量 {len(positive_rows)}")

    rng = np.random.default_rng(seed)
    labeled_rows = np.sort(rng.choice(positive_rows, size=n_labeled, replace=False))
    mask = np.ones(len(images), dtype=bool)
    mask[labeled_rows] = False
    unlabeled_rows = np.flatnonzero(mask)

    labeled = images.subset(labeled_rows).with_labels(np.ones(n_labeled, dtype=np.int64))
    unlabeled = images.subset(unlabeled_rows).with_labels(None)
    test_binary = test.with_labels(binarize(test.labels, positive_ids))

    split = PUSplit(
        positive_labeled=labeled,
        unlabeled=unlabeled,
        test=test_binary,
        positive_class_ids=positive_ids,
        hidden_truth=truth[unlabeled_rows],
    )
    logger.info(f"PU划分完成: {split.summary()}")
    return split


def subsample_unlabeled(split: PUSplit, max_unlabeled: Optional[int], seed: int) -> PUSplit:
    """
    将无标注集随机下采样到不超过 max_unlabeled 个样本（保持原有顺序）
    """
    if not max_unlabeled or len(split.unlabeled) <= max_unlabeled:
        return split
    rng = np.random.default_rng(seed)
    rows = np.sort(rng.choice(len(split.unlabeled), size=max_unlabeled, replace=False))
    logger.info(f"无标注集下采样: {len(split.unlabeled)} -> {max_unlabeled}")
    return PUSplit(
        positive_labeled=split.positive_labeled,
        unlabeled=split.unlabeled.subset(rows),
        test=split.test,
        positive_class_ids=split.positive_class_ids,
        hidden_truth=split.hidden_truth[rows],
        meta=dict(split.meta),
    )


def preprocess(images: ImageSet, target: Tuple[int, int, int]) -> ImageSet:
    """
    最近邻放大到目标尺寸；目标为3通道时复制灰度通道

    Args:
        images: 输入图像
        target: 目标形状 (height, width, channels)

    Returns:
        ImageSet: 形状为 target 的图像，标签与下标保持不变
    """
    height, width, channels = (int(v) for v in target)
    src_h, src_w, src_c = images.image_shape
    if height < src_h or width < src_w:
        raise ValueError(f"不支持缩小: {images.image_shape} -> {tuple(target)}")
    if channels != src_c and src_c != 1:
        raise ValueError(f"只能将单通道扩展为多通道: {src_c} -> {channels}")

    rows = (np.arange(height) * src_h) // height
    cols = (np.arange(width) * src_w) // width
    data = images.data[:, rows][:, :, cols]
    if channels != src_c:
        data = np.repeat(data, channels, axis=3)
    return ImageSet(data=data, labels=images.labels, indices=images.indices)


def preprocess_split(split: PUSplit, target: Tuple[int, int, int]) -> PUSplit:
    """对划分中的三个集合统一做 preprocess"""
    return PUSplit(
        positive_labeled=preprocess(split.positive_labeled, target),
        unlabeled=preprocess(split.unlabeled, target),
        test=preprocess(split.test, target),
        positive_class_ids=split.positive_class_ids,
        hidden_truth=split.hidden_truth,
        meta=dict(split.meta),
    )
