# -*- coding: utf-8 -*-
"""
产物查看工具

打印 DPU1 矩阵 / DPUM 模型检查点 / DPUF 森林检查点的头信息与形状摘要

用法: python tools/inspect_artifact.py runs/blobs/forest.ckpt [更多文件...]
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent))

from core.artifacts import (
    FOREST_MAGIC,
    MATRIX_MAGIC,
    MODEL_MAGIC,
    read_forest_checkpoint,
    read_matrix,
    read_model_checkpoint,
)
from core.exceptions import DataFormatError


def describe(path: Path) -> list:
    """返回描述文件内容的若干行文本"""
    with open(path, "rb") as f:
        magic = f.read(4)

    if magic == MATRIX_MAGIC:
        matrix = read_matrix(path)
        lines = ["类型: 矩阵 (DPU1)", f"形状: {matrix.shape[0]} × {matrix.shape[1]}"]
        if matrix.size:
            lines.append(f"取值: min={matrix.min():.6g}, max={matrix.max():.6g}, mean={matrix.mean():.6g}")
        return lines

    if magic == MODEL_MAGIC:
        layers, weights, meta = read_model_checkpoint(path)
        lines = ["类型: 模型检查点 (DPUM)", f"元数据: {meta}", f"参数总数: {sum(w.size for w in weights)}"]
        lines.append("层:")
        for spec in layers:
            extra = ", ".join(f"{k}={v}" for k, v in spec.items() if k != "type")
            lines.append(f"  - {spec['type']}" + (f" ({extra})" if extra else ""))
        return lines

    if magic == FOREST_MAGIC:
        header, trees = read_forest_checkpoint(path)
        depths = [int(t["depth"].max()) for t in trees]
        nodes = [len(t["feature"]) for t in trees]
        return [
            "类型: 孤立森林检查点 (DPUF)",
            f"树: {header['n_trees']}, ψ={header['subsample_size']}, 维度={header['n_features']}",
            f"阈值: {header.get('threshold')}, C={header.get('contamination')}",
            f"节点数: 平均 {np.mean(nodes):.1f}, 最多 {max(nodes)}",
            f"深度: 最大 {max(depths)}",
        ]

    raise DataFormatError(f"无法识别的文件魔数: {magic!r}")


def main():
    """主函数"""
    if len(sys.argv) < 2:
        print(__doc__)
        return 1

    status = 0
    for name in sys.argv[1:]:
        path = Path(name)
        print("=" * 70)
        print(path)
        print("-" * 70)
        try:
            for line in describe(path):
                print(line)
        except (OSError, DataFormatError) as e:
            print(f"读取失败: {e}")
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
