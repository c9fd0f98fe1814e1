# -*- coding: utf-8 -*-
"""
孤立森林模块

每棵树在 ψ 个无放回子样本上递归构建：随机选特征，在该特征的子样本取值范围内
均匀选切分点，x < p 走左子树。取值范围为零时最多重试 d 次特征，仍不行则成为叶子。
深度上限 ceil(log2 ψ)，截断叶子按 c(size) 补偿路径长度。

树以节点数组保存（前序、左子树优先），打分时对整批样本向量化遍历。
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
from joblib import Parallel, delayed

from core.artifacts import read_forest_checkpoint, write_forest_checkpoint
from core.exceptions import ShapeMismatchError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Tree = Dict[str, np.ndarray]

EULER_GAMMA = 0.5772156649
LEAF = -1


def average_path_length(m) -> np.ndarray:
    """
    c(m) = 2H(m−1) − 2(m−1)/m，H(i) = ln(i) + γ；m ≤ 1 时为 0

    Args:
        m: 样本数（标量或数组）
    """
    m = np.asarray(m, dtype=np.float64)
    safe = np.maximum(m, 2.0)
    value = 2.0 * (np.log(safe - 1.0) + EULER_GAMMA) - 2.0 * (safe - 1.0) / safe
    return np.where(m <= 1.0, 0.0, value)


def score_from_path_length(mean_path_length, subsample_size: int) -> np.ndarray:
    """s = 2^(−E[h]/c(ψ))"""
    return np.power(2.0, -np.asarray(mean_path_length, dtype=np.float64) / float(average_path_length(subsample_size)))


def depth_limit(subsample_size: int) -> int:
    return int(math.ceil(math.log2(subsample_size)))


def tree_seeds(seed: int, n_trees: int) -> List[np.random.SeedSequence]:
    """每棵树一个独立种子流，结果与并行数无关"""
    return np.random.SeedSequence(seed).spawn(n_trees)


class _TreeBuilder:
    def __init__(self, data: np.ndarray, limit: int, rng: np.random.Generator):
        self.data = data
        self.limit = limit
        self.rng = rng
        self.n_features = data.shape[1]
        self.nodes: Dict[str, list] = {name: [] for name in ("feature", "threshold", "left", "right", "size", "depth")}

    def _add(self, feature, threshold, size, depth) -> int:
        index = len(self.nodes["feature"])
        self.nodes["feature"].append(feature)
        self.nodes["threshold"].append(threshold)
        self.nodes["left"].append(LEAF)
        self.nodes["right"].append(LEAF)
        self.nodes["size"].append(size)
        self.nodes["depth"].append(depth)
        return index

    def build(self, rows: np.ndarray, depth: int) -> int:
        if len(rows) <= 1 or depth >= self.limit:
            return self._add(LEAF, 0.0, len(rows), depth)
        for _ in range(self.n_features):
            feature = int(self.rng.integers(self.n_features))
            values = self.data[rows, feature]
            low, high = values.min(), values.max()
            if high > low:
                split = float(self.rng.uniform(low, high))
                node = self._add(feature, split, len(rows), depth)
                goes_left = values < split
                self.nodes["left"][node] = self.build(rows[goes_left], depth + 1)
                self.nodes["right"][node] = self.build(rows[~goes_left], depth + 1)
                return node
        return self._add(LEAF, 0.0, len(rows), depth)

    def arrays(self) -> Tree:
        return {
            "feature": np.asarray(self.nodes["feature"], dtype=np.int64),
            "threshold": np.asarray(self.nodes["threshold"], dtype=np.float64),
            "left": np.asarray(self.nodes["left"], dtype=np.int64),
            "right": np.asarray(self.nodes["right"], dtype=np.int64),
            "size": np.asarray(self.nodes["size"], dtype=np.int64),
            "depth": np.asarray(self.nodes["depth"], dtype=np.int64),
        }


def build_tree(data: np.ndarray, subsample_size: int, seed_seq: np.random.SeedSequence) -> Tree:
    """在 ψ 个无放回子样本上构建一棵孤立树"""
    rng = np.random.default_rng(seed_seq)
    rows = rng.choice(len(data), size=subsample_size, replace=False)
    builder = _TreeBuilder(data, depth_limit(subsample_size), rng)
    builder.build(rows, 0)
    return builder.arrays()


def tree_path_lengths(tree: Tree, data: np.ndarray) -> np.ndarray:
    """整批样本在一棵树上的路径长度 h(x)（含叶子的 c(size) 补偿）"""
    node = np.zeros(len(data), dtype=np.int64)
    active = np.flatnonzero(tree["feature"][node] != LEAF)
    while len(active):
        current = node[active]
        feature = tree["feature"][current]
        goes_left = data[active, feature] < tree["threshold"][current]
        node[active] = np.where(goes_left, tree["left"][current], tree["right"][current])
        active = active[tree["feature"][node[active]] != LEAF]
    return tree["depth"][node] + average_path_length(tree["size"][node])


@dataclass
class IsolationForest:
    """孤立森林；threshold 为 None 表示尚未定阈值"""

    trees: List[Tree]
    subsample_size: int
    n_features: int
    seed: int = 0
    threshold: Optional[float] = None
    contamination: Optional[float] = None

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def _check(self, data: np.ndarray) -> np.ndarray:
        data = np.asarray(data, dtype=np.float64)
        if data.ndim == 1:
            data = data.reshape(1, -1)
        if data.shape[1] != self.n_features:
            raise ShapeMismatchError(f"森林训练维度为 {self.n_features}, 输入维度 {data.shape[1]}")
        return data

    def path_lengths(self, data: np.ndarray) -> np.ndarray:
        """形状 (n, n_trees) 的路径长度矩阵"""
        data = self._check(data)
        if len(data) == 0:
            return np.zeros((0, self.n_trees))
        return np.stack([tree_path_lengths(tree, data) for tree in self.trees], axis=1)

    def score(self, data: np.ndarray) -> np.ndarray:
        """异常分数，越大越异常"""
        lengths = self.path_lengths(data)
        if len(lengths) == 0:
            return np.zeros(0)
        return score_from_path_length(lengths.mean(axis=1), self.subsample_size)

    def anomaly_score(self, x: np.ndarray) -> float:
        return float(self.score(np.asarray(x).reshape(1, -1))[0])

    def is_thresholded(self) -> bool:
        return self.threshold is not None

    def header(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "subsample_size": self.subsample_size,
            "n_features": self.n_features,
            "seed": self.seed,
            "threshold": self.threshold,
            "contamination": self.contamination,
        }

    def save(self, path: PathLike) -> None:
        write_forest_checkpoint(path, self.header(), self.trees)

    @classmethod
    def load(cls, path: PathLike) -> "IsolationForest":
        header, trees = read_forest_checkpoint(path)
        return cls(
            trees=trees,
            subsample_size=int(header["subsample_size"]),
            n_features=int(header["n_features"]),
            seed=int(header.get("seed", 0)),
            threshold=header.get("threshold"),
            contamination=header.get("contamination"),
        )

    def with_threshold(self, threshold: float, contamination: float) -> "IsolationForest":
        return dataclasses.replace(self, threshold=float(threshold), contamination=float(contamination))


def build_forest(
    data: np.ndarray,
    n_trees: int,
    subsample_size: int,
    seed: int,
    n_jobs: Optional[int] = 1,
) -> IsolationForest:
    """
    构建（未定阈值的）孤立森林

    Args:
        data: 拟合数据 (n, d)
        n_trees: 树的数量
        subsample_size: 每棵树的子样本大小 ψ，超过 n 时截断为 n 并告警
        seed: 随机种子
        n_jobs: joblib 并行数

    Returns:
        IsolationForest: 森林
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ShapeMismatchError(f"拟合数据必须是二维, 实际 {data.shape}")
    if len(data) < 2:
        raise ValueError(f"孤立森林至少需要2个样本, 实际 {len(data)}")
    if n_trees < 1:
        raise ValueError(f"n_trees 必须为正数: {n_trees}")
    if subsample_size < 2:
        raise ValueError(f"子样本大小至少为2: {subsample_size}")
    if subsample_size > len(data):
        logger.warning(f"子样本大小 {subsample_size} 超过样本数 {len(data)}，截断为 {len(data)}")
        subsample_size = len(data)

    trees = Parallel(n_jobs=n_jobs)(
        delayed(build_tree)(data, subsample_size, seed_seq) for seed_seq in tree_seeds(seed, n_trees)
    )
    logger.info(f"孤立森林构建完成: {n_trees} 棵树, ψ={subsample_size}, 样本 {len(data)}, 维度 {data.shape[1]}")
    return IsolationForest(trees=list(trees), subsample_size=subsample_size, n_features=data.shape[1], seed=seed)


def anomaly_score(forest: IsolationForest, x: np.ndarray) -> float:
    return forest.anomaly_score(x)
