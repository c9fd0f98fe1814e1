# -*- coding: utf-8 -*-
"""
划分落盘模块

每个 ImageSet 存为一个 DPU1 矩阵（展平像素）加一个 JSON 边车文件
"""

from pathlib import Path
from typing import Optional, Union

import numpy as np

from core.artifacts import read_json, read_matrix, write_json, write_matrix

from .types import ImageSet, PUSplit

PathLike = Union[str, Path]

SPLIT_PARTS = ("positive_labeled", "unlabeled", "test")


def save_image_set(images: ImageSet, path: PathLike, extra: Optional[dict] = None) -> None:
    """
    保存 ImageSet

    Args:
        images: 图像批次
        path: 矩阵文件路径（边车文件为同名 .json）
        extra: 附加写入边车文件的字段
    """
    path = Path(path)
    write_matrix(path, images.flat())
    sidecar = {
        "shape": list(images.image_shape),
        "labels": None if images.labels is None else images.labels.tolist(),
        "indices": images.indices.tolist(),
    }
    if extra:
        sidecar.update(extra)
    write_json(path.with_suffix(".json"), sidecar)


def load_image_set(path: PathLike) -> ImageSet:
    path = Path(path)
    sidecar = read_json(path.with_suffix(".json"))
    flat = read_matrix(path)
    data = flat.reshape((len(flat), *sidecar["shape"]))
    labels = sidecar.get("labels")
    return ImageSet(
        data=data,
        labels=None if labels is None else np.asarray(labels, dtype=np.int64),
        indices=np.asarray(sidecar["indices"], dtype=np.int64),
    )


def save_split(split: PUSplit, directory: PathLike) -> None:
    directory = Path(directory)
    save_image_set(split.positive_labeled, directory / "positive_labeled.dpu")
    save_image_set(
        split.unlabeled,
        directory / "unlabeled.dpu",
        extra={"hidden_truth": split.hidden_truth.tolist()},
    )
    save_image_set(split.test, directory / "test.dpu")
    write_json(
        directory / "split.json",
        {
            "positive_class_ids": sorted(split.positive_class_ids),
            "meta": split.meta,
            "sizes": split.summary(),
        },
    )


def load_split(directory: PathLike) -> PUSplit:
    directory = Path(directory)
    info = read_json(directory / "split.json")
    unlabeled_sidecar = read_json(directory / "unlabeled.json")
    return PUSplit(
        positive_labeled=load_image_set(directory / "positive_labeled.dpu"),
        unlabeled=load_image_set(directory / "unlabeled.dpu"),
        test=load_image_set(directory / "test.dpu"),
        positive_class_ids=frozenset(info["positive_class_ids"]),
        hidden_truth=np.asarray(unlabeled_sidecar["hidden_truth"], dtype=np.int64),
        meta=info.get("meta", {}),
    )
