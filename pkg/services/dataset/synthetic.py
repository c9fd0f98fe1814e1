# -*- coding: utf-8 -*-
"""
合成玩具数据模块

二维样本包装成 1×1×2 的"图像"，使整条流水线无需改动即可运行
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from sklearn.datasets import make_blobs, make_circles

from .splits import make_pu_split
from .types import ImageSet, PUSplit

logger = logging.getLogger(__name__)

GENERATORS = ("blobs", "rings")
POSITIVE_CLASS = 1
NEGATIVE_CLASS = 0


@dataclass(frozen=True)
class SyntheticSpec:
    """玩具数据生成参数"""

    generator: str = "blobs"
    n_labeled: int = 100
    n_unlabeled: int = 1000
    unlabeled_positive_fraction: float = 0.5
    n_test: int = 1000
    noise: float = 0.5
    positive_center: Tuple[float, float] = (0.0, 0.0)
    negative_center: Tuple[float, float] = (4.0, 4.0)
    inner_radius: float = 1.0
    outer_radius: float = 3.0

    def validate(self) -> None:
        if self.generator not in GENERATORS:
            raise ValueError(f"未知的生成器: {self.generator}, 可选 {GENERATORS}")
        for name in ("n_labeled", "n_unlabeled", "n_test"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} 必须为正数")
        if self.noise <= 0:
            raise ValueError("noise 必须为正数")
        if not 0.0 < self.unlabeled_positive_fraction < 1.0:
            raise ValueError("unlabeled_positive_fraction 必须在(0,1)内")
        if self.generator == "rings" and not 0 < self.inner_radius < self.outer_radius:
            raise ValueError("rings 需要 0 < inner_radius < outer_radius")


def _sample_points(spec: SyntheticSpec, n_pos: int, n_neg: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    if spec.generator == "blobs":
        points, labels = make_blobs(
            n_samples=[n_neg, n_pos],
            centers=[spec.negative_center, spec.positive_center],
            cluster_std=spec.noise,
            shuffle=False,
            random_state=seed,
        )
    else:
        # make_circles 外圈为类别0，内圈为类别1，半径按外圈缩放
        points, labels = make_circles(
            n_samples=(n_neg, n_pos),
            factor=spec.inner_radius / spec.outer_radius,
            noise=spec.noise / spec.outer_radius,
            shuffle=False,
            random_state=seed,
        )
        points = points * spec.outer_radius
    return points, labels.astype(np.int64)


def gen_synthetic(spec: SyntheticSpec, seed: int) -> PUSplit:
    """
    生成二维玩具 PU 划分

    坐标按各向同性的仿射变换映射到[0,1]，变换参数记录在 split.meta 中，
    用 to_coordinates() 可还原原始坐标

    Args:
        spec: 生成参数
        seed: 随机种子

    Returns:
        PUSplit: |P_L| = n_labeled, |U| = n_unlabeled
    """
    spec.validate()
    n_unl_pos = int(round(spec.n_unlabeled * spec.unlabeled_positive_fraction))
    n_unl_neg = spec.n_unlabeled - n_unl_pos
    n_test_pos = int(round(spec.n_test * spec.unlabeled_positive_fraction))
    n_test_neg = spec.n_test - n_test_pos

    n_pos = spec.n_labeled + n_unl_pos + n_test_pos
    n_neg = n_unl_neg + n_test_neg
    points, labels = _sample_points(spec, n_pos, n_neg, seed)

    offset = points.min(axis=0)
    scale = float((points.max(axis=0) - offset).max())
    normalized = ((points - offset) / scale).astype(np.float32)

    rng = np.random.default_rng(seed)
    pos_rows = rng.permutation(np.flatnonzero(labels == POSITIVE_CLASS))
    neg_rows = rng.permutation(np.flatnonzero(labels == NEGATIVE_CLASS))
    train_rows = np.concatenate([pos_rows[: spec.n_labeled + n_unl_pos], neg_rows[:n_unl_neg]])
    test_rows = np.concatenate([pos_rows[spec.n_labeled + n_unl_pos:], neg_rows[n_unl_neg:]])
    train_rows = rng.permutation(train_rows)
    test_rows = rng.permutation(test_rows)

    images = normalized.reshape(-1, 1, 1, 2)
    train = ImageSet(data=images[train_rows], labels=labels[train_rows], indices=train_rows)
    test = ImageSet(data=images[test_rows], labels=labels[test_rows], indices=test_rows)

    split = make_pu_split(train, {POSITIVE_CLASS}, spec.n_labeled, test, seed)
    split.meta.update(
        {
            "source": spec.generator,
            "coord_offset": [float(v) for v in offset],
            "coord_scale": scale,
        }
    )
    logger.info(f"生成玩具数据 {spec.generator}: {split.summary()}")
    return split


def to_coordinates(images: ImageSet, split: PUSplit) -> np.ndarray:
    """把玩具"图像"还原为原始二维坐标"""
    offset = np.asarray(split.meta["coord_offset"], dtype=np.float64)
    scale = float(split.meta["coord_scale"])
    return images.flat().astype(np.float64) * scale + offset
