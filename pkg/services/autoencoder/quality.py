# -*- coding: utf-8 -*-
"""
重建质量模块
"""

import numpy as np

from core.exceptions import ShapeMismatchError

# 两张图完全相同时的 PSNR 哨兵值，报告中写作 "inf"
PSNR_IDENTICAL = float("inf")


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """
    峰值信噪比，信号峰值为1：10·log10(1/MSE)

    Args:
        a: 图像（像素值在[0,1]）
        b: 与 a 同形状的图像

    Returns:
        float: 分贝值，完全相同时返回 +inf
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"PSNR 输入形状不一致: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_IDENTICAL
    return float(10.0 * np.log10(1.0 / mse))


def psnr_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """逐样本 PSNR，a、b 形状为 (n, ...)"""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"PSNR 输入形状不一致: {a.shape} vs {b.shape}")
    mse = np.mean((a - b).reshape(len(a), -1) ** 2, axis=1)
    with np.errstate(divide="ignore"):
        return np.where(mse == 0.0, PSNR_IDENTICAL, 10.0 * np.log10(1.0 / mse))


def format_psnr(value: float) -> str:
    return "inf" if np.isinf(value) else repr(float(value))
