# -*- coding: utf-8 -*-
"""
测试公共夹具
"""

import gzip
import struct
import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目根目录到Python路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from config import profile_defaults  # noqa: E402
from services.dataset import SyntheticSpec, gen_synthetic  # noqa: E402


def write_idx_images(path: Path, pixels: np.ndarray, compress: bool = False) -> Path:
    """写一个 IDX 图像文件，pixels 为 (n, rows, cols) 的 uint8"""
    pixels = np.asarray(pixels, dtype=np.uint8)
    n, rows, cols = pixels.shape
    raw = struct.pack(">IIII", 0x803, n, rows, cols) + pixels.tobytes()
    opener = gzip.open if compress else open
    with opener(path, "wb") as f:
        f.write(raw)
    return path


def write_idx_labels(path: Path, labels, compress: bool = False) -> Path:
    labels = np.asarray(labels, dtype=np.uint8)
    raw = struct.pack(">II", 0x801, len(labels)) + labels.tobytes()
    opener = gzip.open if compress else open
    with opener(path, "wb") as f:
        f.write(raw)
    return path


def write_cifar_batch(path: Path, labels, planes: np.ndarray) -> Path:
    """planes 形状 (n, 3, 32, 32) 的 uint8"""
    planes = np.asarray(planes, dtype=np.uint8)
    with open(path, "wb") as f:
        for label, image in zip(labels, planes):
            f.write(bytes([label]))
            f.write(image.tobytes())
    return path


@pytest.fixture
def out_dir(tmp_path) -> Path:
    path = tmp_path / "run"
    path.mkdir()
    return path


@pytest.fixture(scope="session")
def blobs_split():
    return gen_synthetic(SyntheticSpec(generator="blobs"), seed=0)


def fast_blobs_config(out_dir, seed: int = 0):
    """小规模 blobs 配置，用于需要多次跑完整流水线的测试"""
    config = profile_defaults("desk", "blobs")
    config.seed = seed
    config.out_dir = str(out_dir)
    config.dataset.n_labeled = 60
    config.dataset.n_unlabeled = 400
    config.dataset.n_test = 200
    config.autoencoder.epochs = 40
    config.augment.n_pairs = 300
    config.augment.samples_per_pair = 5
    config.forest.n_trees = 40
    config.forest.subsample_size = 128
    config.classifier.epochs = 40
    return config
