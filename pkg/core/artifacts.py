# -*- coding: utf-8 -*-
"""
产物读写模块

流水线各阶段落盘文件的统一格式：
- 矩阵文件（DPU1）：编码矩阵、嵌入矩阵、展平后的图像
- 模型检查点（DPUM）：层描述 + float32 权重
- 森林检查点（DPUF）：每棵树的节点数组
- JSON（原子写入）与 CSV 表格
"""

import json
import os
import struct
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .exceptions import DataFormatError

PathLike = Union[str, Path]

MATRIX_MAGIC = b"DPU1"
MODEL_MAGIC = b"DPUM"
FOREST_MAGIC = b"DPUF"
CHECKPOINT_VERSION = 1

_F32 = np.dtype("<f4")
_F64 = np.dtype("<f8")
_I32 = np.dtype("<i4")

# 森林节点数组：名称 -> 落盘类型
FOREST_NODE_FIELDS: Tuple[Tuple[str, np.dtype], ...] = (
    ("feature", _I32),
    ("threshold", _F64),
    ("left", _I32),
    ("right", _I32),
    ("size", _I32),
    ("depth", _I32),
)


def _ensure_parent(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise DataFormatError(f"{what} 被截断: 期望 {n} 字节, 实际 {len(data)} 字节")
    return data


def write_matrix(path: PathLike, matrix: np.ndarray) -> None:
    """
    以 DPU1 格式写入二维矩阵

    Args:
        path: 目标文件
        matrix: 二维数组，按 float32 小端行优先写入
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError(f"只能写入二维矩阵, 实际维度 {matrix.ndim}")
    path = Path(path)
    _ensure_parent(path)
    rows, cols = matrix.shape
    with open(path, "wb") as f:
        f.write(MATRIX_MAGIC)
        f.write(struct.pack("<II", rows, cols))
        f.write(np.ascontiguousarray(matrix, dtype=_F32).tobytes())


def read_matrix(path: PathLike) -> np.ndarray:
    """
    读取 DPU1 矩阵文件

    Returns:
        np.ndarray: float32 矩阵，形状 (rows, cols)
    """
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, "矩阵文件头")
        if magic != MATRIX_MAGIC:
            raise DataFormatError(f"矩阵文件魔数错误: {magic!r}")
        rows, cols = struct.unpack("<II", _read_exact(f, 8, "矩阵维度"))
        payload = _read_exact(f, rows * cols * 4, "矩阵数据")
    return np.frombuffer(payload, dtype=_F32).astype(np.float32).reshape(rows, cols)


def write_json(path: PathLike, obj: Any) -> None:
    """原子写入JSON（先写临时文件再替换）"""
    path = Path(path)
    _ensure_parent(path)
    tmp = str(path) + ".tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(obj, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
    os.replace(tmp, path)


def read_json(path: PathLike) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_table(path: PathLike, table: pd.DataFrame) -> None:
    """写入CSV表格（无索引列）"""
    path = Path(path)
    _ensure_parent(path)
    table.to_csv(path, index=False, lineterminator="\n")


def read_table(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path)


def _write_header(f, magic: bytes, header: Dict[str, Any]) -> None:
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    f.write(magic)
    f.write(struct.pack("<II", CHECKPOINT_VERSION, len(blob)))
    f.write(blob)


def _read_header(f, magic: bytes, what: str) -> Dict[str, Any]:
    found = _read_exact(f, 4, what)
    if found != magic:
        raise DataFormatError(f"{what}魔数错误: {found!r}")
    version, length = struct.unpack("<II", _read_exact(f, 8, what))
    if version != CHECKPOINT_VERSION:
        raise DataFormatError(f"{what}版本不受支持: {version}")
    return json.loads(_read_exact(f, length, what).decode("utf-8"))


def write_model_checkpoint(
    path: PathLike,
    layer_specs: List[Dict[str, Any]],
    weights: Sequence[np.ndarray],
    meta: Optional[Dict[str, Any]] = None,
) -> None:
    """
    写入模型检查点

    Args:
        path: 目标文件
        layer_specs: 层描述列表（可JSON序列化）
        weights: 按声明顺序排列的全部参数
        meta: 附加元数据（如编码器层数、输入形状）
    """
    path = Path(path)
    _ensure_parent(path)
    header = {
        "layers": layer_specs,
        "shapes": [list(np.shape(w)) for w in weights],
        "meta": meta or {},
    }
    with open(path, "wb") as f:
        _write_header(f, MODEL_MAGIC, header)
        for w in weights:
            f.write(np.ascontiguousarray(w, dtype=_F32).tobytes())


def read_model_checkpoint(
    path: PathLike,
) -> Tuple[List[Dict[str, Any]], List[np.ndarray], Dict[str, Any]]:
    """
    读取模型检查点

    Returns:
        (层描述列表, 参数列表, 元数据)，参数为 float64 数组
    """
    with open(path, "rb") as f:
        header = _read_header(f, MODEL_MAGIC, "模型检查点")
        weights = []
        for shape in header["shapes"]:
            count = int(np.prod(shape)) if shape else 1
            raw = _read_exact(f, count * 4, "模型权重")
            weights.append(np.frombuffer(raw, dtype=_F32).astype(np.float64).reshape(shape))
    return header["layers"], weights, header.get("meta", {})


def write_forest_checkpoint(
    path: PathLike, header: Dict[str, Any], trees: Sequence[Dict[str, np.ndarray]]
) -> None:
    """
    写入孤立森林检查点

    Args:
        path: 目标文件
        header: 森林元数据（树数量、子采样大小、阈值等）
        trees: 每棵树的节点数组字典，字段见 FOREST_NODE_FIELDS
    """
    path = Path(path)
    _ensure_parent(path)
    header = dict(header)
    header["node_counts"] = [int(len(t["feature"])) for t in trees]
    with open(path, "wb") as f:
        _write_header(f, FOREST_MAGIC, header)
        for tree in trees:
            for name, dtype in FOREST_NODE_FIELDS:
                f.write(np.ascontiguousarray(tree[name], dtype=dtype).tobytes())


def read_forest_checkpoint(
    path: PathLike,
) -> Tuple[Dict[str, Any], List[Dict[str, np.ndarray]]]:
    """读取孤立森林检查点，返回 (元数据, 节点数组列表)"""
    with open(path, "rb") as f:
        header = _read_header(f, FOREST_MAGIC, "森林检查点")
        trees = []
        for count in header["node_counts"]:
            tree = {}
            for name, dtype in FOREST_NODE_FIELDS:
                raw = _read_exact(f, count * dtype.itemsize, "森林节点")
                native = np.float64 if dtype.kind == "f" else np.int64
                tree[name] = np.frombuffer(raw, dtype=dtype).astype(native)
            trees.append(tree)
    return header, trees
