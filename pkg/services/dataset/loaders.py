# -*- coding: utf-8 -*-
"""
数据集读取模块

- IDX 格式（Fashion-MNIST / MNIST）
- CIFAR-10 二进制格式
"""

import gzip
import logging
import struct
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from core.exceptions import DataFormatError

from .types import ImageSet

logger = logging.getLogger(__name__)

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

CIFAR_RECORD_SIZE = 3073
CIFAR_SIDE = 32

PathLike = Union[str, Path]


def _read_bytes(path: PathLike) -> bytes:
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as f:
        return f.read()


def _parse_idx(raw: bytes, expected_magic: int, n_dims: int, what: str) -> np.ndarray:
    header_size = 4 + 4 * n_dims
    if len(raw) < header_size:
        raise DataFormatError(f"{what} 文件头被截断")
    magic = struct.unpack(">I", raw[:4])[0]
    if magic != expected_magic:
        raise DataFormatError(f"{what} 魔数错误: 0x{magic:08x}, 期望 0x{expected_magic:08x}")
    dims = struct.unpack(f">{n_dims}I", raw[4:header_size])
    count = int(np.prod(dims))
    payload = raw[header_size:]
    if len(payload) < count:
        raise DataFormatError(f"{what} 数据被截断: 期望 {count} 字节, 实际 {len(payload)} 字节")
    return np.frombuffer(payload[:count], dtype=np.uint8).reshape(dims)


def load_idx(images_path: PathLike, labels_path: PathLike) -> ImageSet:
    """
    读取 IDX 格式图像和标签

    Args:
        images_path: 图像文件（支持 .gz）
        labels_path: 标签文件（支持 .gz）

    Returns:
        ImageSet: (n, rows, cols, 1) 灰度图像，像素除以255
    """
    pixels = _parse_idx(_read_bytes(images_path), IDX_IMAGES_MAGIC, 3, "IDX图像")
    labels = _parse_idx(_read_bytes(labels_path), IDX_LABELS_MAGIC, 1, "IDX标签")
    if len(pixels) != len(labels):
        raise DataFormatError(f"图像数量 {len(pixels)} 与标签数量 {len(labels)} 不一致")

    data = pixels.astype(np.float32)[..., np.newaxis] / np.float32(255.0)
    logger.info(f"读取IDX数据: {images_path}, 共 {len(data)} 张, 尺寸 {data.shape[1:]}")
    return ImageSet(data=data, labels=labels.astype(np.int64))


def load_cifar10(batch_paths: Sequence[PathLike]) -> ImageSet:
    """
    读取 CIFAR-10 二进制批次文件

    每条记录 3073 字节: 1 字节标签 + 1024 R + 1024 G + 1024 B

    Args:
        batch_paths: 批次文件列表，按顺序拼接

    Returns:
        ImageSet: (n, 32, 32, 3) RGB 图像
    """
    images: List[np.ndarray] = []
    labels: List[np.ndarray] = []
    for path in batch_paths:
        raw = _read_bytes(path)
        if len(raw) % CIFAR_RECORD_SIZE != 0:
            raise DataFormatError(
                f"CIFAR-10 文件长度 {len(raw)} 不是记录大小 {CIFAR_RECORD_SIZE} 的整数倍: {path}"
            )
        records = np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD_SIZE)
        labels.append(records[:, 0].astype(np.int64))
        planes = records[:, 1:].reshape(-1, 3, CIFAR_SIDE, CIFAR_SIDE)
        images.append(planes.transpose(0, 2, 3, 1))
        logger.debug(f"读取CIFAR-10批次: {path}, {len(records)} 条记录")

    if not images:
        raise ValueError("至少需要一个CIFAR-10批次文件")

    data = np.concatenate(images).astype(np.float32) / np.float32(255.0)
    logger.info(f"读取CIFAR-10数据: 共 {len(data)} 张")
    return ImageSet(data=data, labels=np.concatenate(labels))
