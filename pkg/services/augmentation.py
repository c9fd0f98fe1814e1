# -*- coding: utf-8 -*-
"""
潜空间加密增强模块

从正样本编码中无放回地抽取配对，在每对之间插值生成嵌入 Z_ν：
- dens：λ ~ Normal(0.5, (k/2)²)，拒绝采样截断到开区间(0,1)
- mixup：λ ~ Beta(α, α)
- dens-latent：以配对中点为均值、方差 e^k·(‖z_j−z_i‖/2)² 的各向同性高斯
- none：不生成嵌入（消融实验用）

每个配对使用独立的种子流，并行与串行结果一致
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from config import AugmentConfig
from core.artifacts import read_matrix, read_table, write_matrix, write_table
from core.exceptions import ShapeMismatchError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MODES = ("dens", "mixup", "dens-latent", "none")
# 自动确定配对数时每个正样本对应的配对数
PAIRS_PER_ITEM = 16
PROVENANCE_COLUMNS = ["row_id", "i", "j", "lambda"]
_CHUNK = 512


@dataclass(frozen=True)
class AugmentationSpec:
    """增强参数"""

    mode: str = "dens"
    k: float = 0.2
    n_pairs: int = 16000
    samples_per_pair: int = 11
    mixup_alpha: float = 0.4
    seed: int = 0

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"未知的增强模式: {self.mode}, 可选 {MODES}")
        if not 0.0 < self.k < 1.0:
            raise ValueError(f"k 必须在(0,1)内: {self.k}")
        if self.samples_per_pair < 1:
            raise ValueError(f"samples_per_pair 至少为1: {self.samples_per_pair}")
        if self.mode != "none" and self.n_pairs < 1:
            raise ValueError(f"n_pairs 必须为正数: {self.n_pairs}")
        if self.mode == "mixup" and self.mixup_alpha <= 0:
            raise ValueError(f"mixup_alpha 必须为正数: {self.mixup_alpha}")

    @property
    def n_rows(self) -> int:
        return 0 if self.mode == "none" else self.n_pairs * self.samples_per_pair

    @classmethod
    def from_config(cls, cfg: AugmentConfig, n_items: int, seed: int) -> "AugmentationSpec":
        """
        由配置构造；n_pairs=0 时取 16·|Z_L|，超过可用的不同配对数时截断
        """
        wanted = cfg.n_pairs or PAIRS_PER_ITEM * n_items
        available = n_items * (n_items - 1) // 2
        n_pairs = min(wanted, available)
        if n_pairs < wanted:
            logger.warning(f"配对数 {wanted} 截断为可用的不同配对数 {available}")
        return cls(
            mode=cfg.mode,
            k=cfg.k,
            n_pairs=n_pairs,
            samples_per_pair=cfg.samples_per_pair,
            mixup_alpha=cfg.mixup_alpha,
            seed=seed,
        )


@dataclass
class EmbeddingSet:
    """生成的嵌入矩阵及每行的来源（配对下标与 λ）"""

    matrix: np.ndarray
    provenance: pd.DataFrame

    def __len__(self) -> int:
        return len(self.matrix)

    @property
    def lambdas(self) -> np.ndarray:
        return self.provenance["lambda"].to_numpy(dtype=np.float64)

    def save(self, path: PathLike) -> None:
        """矩阵写为 DPU1，来源写为同名 .csv"""
        path = Path(path)
        write_matrix(path, self.matrix)
        write_table(path.with_suffix(".csv"), self.provenance)

    @classmethod
    def load(cls, path: PathLike) -> "EmbeddingSet":
        path = Path(path)
        return cls(matrix=read_matrix(path), provenance=read_table(path.with_suffix(".csv")))


def _pair_offsets(n_items: int) -> np.ndarray:
    # 第 i 行配对 (i, i+1..n-1) 在线性编号中的起点
    counts = np.arange(n_items - 1, 0, -1, dtype=np.int64)
    return np.concatenate([[0], np.cumsum(counts)])


def sample_pairs(n_items: int, n_pairs: int, seed: int) -> np.ndarray:
    """
    无放回抽取不同的无序配对

    Args:
        n_items: 编码数量
        n_pairs: 配对数量
        seed: 随机种子

    Returns:
        np.ndarray: 形状 (n_pairs, 2) 的下标对，每行 i < j
    """
    available = n_items * (n_items - 1) // 2
    if n_pairs < 0:
        raise ValueError(f"n_pairs 不能为负: {n_pairs}")
    if n_pairs > available:
        raise ValueError(f"n_pairs={n_pairs} 超过 {n_items} 个样本可组成的不同配对数 {available}")
    if n_pairs == 0:
        return np.zeros((0, 2), dtype=np.int64)

    rng = np.random.default_rng(seed)
    linear = rng.choice(available, size=n_pairs, replace=False)
    offsets = _pair_offsets(n_items)
    first = np.searchsorted(offsets, linear, side="right") - 1
    second = linear - offsets[first] + first + 1
    return np.stack([first, second], axis=1).astype(np.int64)


def _check_k(k: float) -> None:
    if not 0.0 < k < 1.0:
        raise ValueError(f"k 必须在(0,1)内: {k}")


def draw_lambda(k: float, rng: np.random.Generator) -> float:
    """λ ~ Normal(0.5, (k/2)²)，落在(0,1)之外时重新抽取"""
    _check_k(k)
    while True:
        value = rng.normal(0.5, k / 2.0)
        if 0.0 < value < 1.0:
            return float(value)


def draw_lambdas(k: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """一次抽取 size 个 λ，拒绝的位置按顺序补抽"""
    _check_k(k)
    values = rng.normal(0.5, k / 2.0, size=size)
    rejected = np.flatnonzero((values <= 0.0) | (values >= 1.0))
    while len(rejected):
        values[rejected] = rng.normal(0.5, k / 2.0, size=len(rejected))
        rejected = rejected[(values[rejected] <= 0.0) | (values[rejected] >= 1.0)]
    return values


def interpolate_pair(z_i: np.ndarray, z_j: np.ndarray, lambdas: Sequence[float]) -> np.ndarray:
    """
    x̃ = λ·z_i + (1−λ)·z_j，每个 λ 输出一行

    Returns:
        np.ndarray: 形状 (len(lambdas), d)
    """
    z_i = np.asarray(z_i, dtype=np.float64)
    z_j = np.asarray(z_j, dtype=np.float64)
    if z_i.shape != z_j.shape or z_i.ndim != 1:
        raise ShapeMismatchError(f"配对向量长度不一致: {z_i.shape} vs {z_j.shape}")
    lambdas = np.asarray(lambdas, dtype=np.float64).reshape(-1, 1)
    if lambdas.size and (lambdas.min() < 0.0 or lambdas.max() > 1.0):
        raise ValueError("λ 必须在[0,1]内")
    return lambdas * z_i + (1.0 - lambdas) * z_j


def _generate_pair(z_i, z_j, spec: AugmentationSpec, rng: np.random.Generator):
    s = spec.samples_per_pair
    if spec.mode == "dens":
        lambdas = draw_lambdas(spec.k, s, rng)
        return interpolate_pair(z_i, z_j, lambdas), lambdas
    if spec.mode == "mixup":
        lambdas = rng.beta(spec.mixup_alpha, spec.mixup_alpha, size=s)
        return interpolate_pair(z_i, z_j, lambdas), lambdas
    # dens-latent
    z_i = np.asarray(z_i, dtype=np.float64)
    z_j = np.asarray(z_j, dtype=np.float64)
    midpoint = 0.5 * (z_i + z_j)
    std = np.sqrt(np.exp(spec.k)) * 0.5 * np.linalg.norm(z_j - z_i)
    rows = midpoint + rng.normal(0.0, 1.0, size=(s, len(midpoint))) * std
    return rows, np.full(s, np.nan)


def _generate_chunk(encodings, pairs, seeds, spec):
    rows, lambdas = [], []
    for (i, j), seed_seq in zip(pairs, seeds):
        pair_rows, pair_lambdas = _generate_pair(encodings[i], encodings[j], spec, np.random.default_rng(seed_seq))
        rows.append(pair_rows)
        lambdas.append(pair_lambdas)
    return np.concatenate(rows), np.concatenate(lambdas)


def densify(encodings: np.ndarray, spec: AugmentationSpec, n_jobs: Optional[int] = 1) -> EmbeddingSet:
    """
    由正样本编码生成加密嵌入集

    Args:
        encodings: Z_L，形状 (n, d)
        spec: 增强参数
        n_jobs: joblib 并行数，结果与并行数无关

    Returns:
        EmbeddingSet: n_pairs·s 行（mode=none 时为空）
    """
    spec.validate()
    encodings = np.asarray(encodings)
    if encodings.ndim != 2:
        raise ShapeMismatchError(f"编码矩阵必须是二维, 实际 {encodings.shape}")
    width = encodings.shape[1]
    if spec.mode == "none":
        return EmbeddingSet(
            matrix=np.zeros((0, width), dtype=np.float32),
            provenance=pd.DataFrame({c: pd.Series(dtype="int64" if c != "lambda" else "float64") for c in PROVENANCE_COLUMNS}),
        )
    if len(encodings) < 2:
        raise ValueError(f"至少需要2个编码才能配对, 实际 {len(encodings)}")

    pairs = sample_pairs(len(encodings), spec.n_pairs, spec.seed)
    seeds = np.random.SeedSequence(spec.seed).spawn(len(pairs))
    chunks = [slice(start, start + _CHUNK) for start in range(0, len(pairs), _CHUNK)]
    results = Parallel(n_jobs=n_jobs)(
        delayed(_generate_chunk)(encodings, pairs[chunk], seeds[chunk], spec) for chunk in chunks
    )
    matrix = np.concatenate([r[0] for r in results]).astype(np.float32)
    lambdas = np.concatenate([r[1] for r in results])

    s = spec.samples_per_pair
    provenance = pd.DataFrame(
        {
            "row_id": np.arange(len(matrix), dtype=np.int64),
            "i": np.repeat(pairs[:, 0], s),
            "j": np.repeat(pairs[:, 1], s),
            "lambda": lambdas,
        }
    )
    logger.info(f"生成嵌入 mode={spec.mode}: {len(pairs)} 对 × {s} = {len(matrix)} 行")
    return EmbeddingSet(matrix=matrix, provenance=provenance)
