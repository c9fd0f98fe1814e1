# -*- coding: utf-8 -*-
"""
数据集模块

读取基准数据、生成玩具数据、构造 PU 划分和预处理
"""

from .loaders import load_cifar10, load_idx
from .sources import data_root, load_source
from .splits import binarize, make_pu_split, preprocess, preprocess_split, subsample_unlabeled
from .storage import load_image_set, load_split, save_image_set, save_split
from .synthetic import SyntheticSpec, gen_synthetic, to_coordinates
from .types import ImageSet, PUSplit

__all__ = [
    "ImageSet",
    "PUSplit",
    "SyntheticSpec",
    "binarize",
    "data_root",
    "gen_synthetic",
    "load_cifar10",
    "load_idx",
    "load_image_set",
    "load_source",
    "load_split",
    "make_pu_split",
    "preprocess",
    "preprocess_split",
    "save_image_set",
    "save_split",
    "subsample_unlabeled",
    "to_coordinates",
]
