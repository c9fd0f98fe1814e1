# -*- coding: utf-8 -*-
"""
数据集类型模块

ImageSet：统一的图像批次（像素值已归一化到[0,1]）
PUSplit：正样本标注集 / 无标注集 / 测试集的划分
"""

from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class ImageSet:
    """图像批次，data 形状为 (n, height, width, channels)"""

    data: np.ndarray
    labels: Optional[np.ndarray] = None
    # 样本在原始数据集中的下标，用于检查划分互斥
    indices: Optional[np.ndarray] = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float32)
        if data.ndim != 4:
            raise ValueError(f"图像数据必须是四维 (n,h,w,c), 实际形状 {data.shape}")
        if data.size and (data.min() < 0.0 or data.max() > 1.0):
            raise ValueError("像素值必须在[0,1]范围内")
        object.__setattr__(self, "data", data)

        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (len(data),):
                raise ValueError(f"标签数量 {labels.shape} 与样本数量 {len(data)} 不一致")
            if labels.size and labels.min() < 0:
                raise ValueError("标签必须是非负整数")
            object.__setattr__(self, "labels", labels)

        indices = self.indices
        if indices is None:
            indices = np.arange(len(data), dtype=np.int64)
        indices = np.asarray(indices, dtype=np.int64)
        if indices.shape != (len(data),):
            raise ValueError("indices 长度必须与样本数量一致")
        object.__setattr__(self, "indices", indices)

    def __len__(self) -> int:
        return len(self.data)

    @property
    def image_shape(self) -> Tuple[int, int, int]:
        return tuple(int(s) for s in self.data.shape[1:])

    def flat(self) -> np.ndarray:
        """展平为 (n, h*w*c) 矩阵"""
        return self.data.reshape(len(self.data), -1)

    def subset(self, rows: np.ndarray) -> "ImageSet":
        rows = np.asarray(rows, dtype=np.int64)
        return ImageSet(
            data=self.data[rows],
            labels=None if self.labels is None else self.labels[rows],
            indices=self.indices[rows],
        )

    def with_labels(self, labels: Optional[np.ndarray]) -> "ImageSet":
        return ImageSet(data=self.data, labels=labels, indices=self.indices)


@dataclass(frozen=True)
class PUSplit:
    """
    PU 划分

    无标注集的真实二值标签只通过 evaluation_truth() 暴露，流水线训练路径不得调用
    """

    positive_labeled: ImageSet
    unlabeled: ImageSet
    test: ImageSet
    positive_class_ids: FrozenSet[int]
    hidden_truth: np.ndarray = field(repr=False)
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        truth = np.asarray(self.hidden_truth, dtype=np.int64)
        if truth.shape != (len(self.unlabeled),):
            raise ValueError("隐藏标签数量必须与无标注集大小一致")
        if self.unlabeled.labels is not None:
            raise ValueError("无标注集不能携带标签")
        object.__setattr__(self, "hidden_truth", truth)
        object.__setattr__(self, "positive_class_ids", frozenset(int(c) for c in self.positive_class_ids))

    def evaluation_truth(self) -> np.ndarray:
        """返回无标注集的真实二值标签（仅用于评估）"""
        return self.hidden_truth.copy()

    def summary(self) -> Dict[str, int]:
        return {
            "positive_labeled": len(self.positive_labeled),
            "unlabeled": len(self.unlabeled),
            "test": len(self.test),
        }
