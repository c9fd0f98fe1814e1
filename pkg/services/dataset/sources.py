# -*- coding: utf-8 -*-
"""
数据来源模块

根据 DatasetConfig 找到本地数据文件并构造 PU 划分
"""

import logging
from pathlib import Path
from typing import List

from config import RUNTIME_CONFIG, DatasetConfig

from .loaders import load_cifar10, load_idx
from .splits import make_pu_split, preprocess_split, subsample_unlabeled
from .synthetic import SyntheticSpec, gen_synthetic
from .types import PUSplit

logger = logging.getLogger(__name__)

FMNIST_DIR = "fashion-mnist"
CIFAR10_DIR = "cifar-10-batches-bin"


def _find(directory: Path, stem: str) -> Path:
    """优先未压缩文件，其次 .gz"""
    for candidate in (directory / stem, directory / f"{stem}.gz"):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"找不到数据文件: {directory / stem}[.gz]")


def data_root(cfg: DatasetConfig) -> Path:
    return Path(cfg.root or RUNTIME_CONFIG["data_root"])


def fmnist_paths(root: Path):
    directory = root / FMNIST_DIR
    return {
        "train": (_find(directory, "train-images-idx3-ubyte"), _find(directory, "train-labels-idx1-ubyte")),
        "test": (_find(directory, "t10k-images-idx3-ubyte"), _find(directory, "t10k-labels-idx1-ubyte")),
    }


def cifar10_paths(root: Path) -> List[Path]:
    directory = root / CIFAR10_DIR
    paths = [directory / f"data_batch_{i}.bin" for i in range(1, 6)] + [directory / "test_batch.bin"]
    missing = [str(p) for p in paths if not p.exists()]
    if missing:
        raise FileNotFoundError(f"缺少 CIFAR-10 文件: {', '.join(missing)}")
    return paths


def load_source(cfg: DatasetConfig, seed: int) -> PUSplit:
    """
    按配置读取数据并完成 PU 划分、无标注集下采样和尺寸预处理

    Args:
        cfg: 数据集配置
        seed: 划分与下采样使用的随机种子

    Returns:
        PUSplit: 划分结果，meta 中记录数据来源
    """
    if cfg.synthetic:
        spec = SyntheticSpec(
            generator=cfg.source,
            n_labeled=cfg.n_labeled,
            n_unlabeled=cfg.n_unlabeled,
            unlabeled_positive_fraction=cfg.unlabeled_positive_fraction,
            n_test=cfg.n_test,
            noise=cfg.noise,
        )
        split = gen_synthetic(spec, seed)
    else:
        root = data_root(cfg)
        if cfg.source == "fmnist":
            paths = fmnist_paths(root)
            train = load_idx(*paths["train"])
            test = load_idx(*paths["test"])
        elif cfg.source == "cifar10":
            paths = cifar10_paths(root)
            train = load_cifar10(paths[:-1])
            test = load_cifar10(paths[-1:])
        else:
            raise ValueError(f"未知的数据来源: {cfg.source}")
        logger.info(f"读取 {cfg.source}: 训练 {len(train)}, 测试 {len(test)}")
        split = make_pu_split(train, cfg.resolved_positive_classes(), cfg.n_labeled, test, seed)
        split.meta["source"] = cfg.source

    split = subsample_unlabeled(split, cfg.max_unlabeled, seed)
    if cfg.target_shape:
        split = preprocess_split(split, tuple(cfg.target_shape))
    return split
