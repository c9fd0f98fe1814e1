# -*- coding: utf-8 -*-
"""
梯度检查模块

用中心差分验证反向传播得到的解析梯度
"""

from typing import Callable, Tuple

import numpy as np

from .network import Sequential

LossFn = Callable[[np.ndarray, np.ndarray], Tuple[float, np.ndarray]]


def _total_loss(network: Sequential, loss_fn: LossFn, x, y, weight_decay: float) -> float:
    loss, _ = loss_fn(network.forward(x), y)
    return loss + network.regularization(weight_decay)


def gradient_check(
    network: Sequential,
    loss_fn: LossFn,
    x: np.ndarray,
    y: np.ndarray,
    weight_decay: float = 0.0,
    step: float = 1e-4,
    floor: float = 1e-6,
) -> float:
    """
    比较解析梯度和中心差分梯度

    Args:
        network: 待检查的网络（建议 float64、参数不超过几十个）
        loss_fn: 损失函数，返回 (损失, 对输出的梯度)
        x: 输入
        y: 目标
        weight_decay: L2 系数，同时计入损失和梯度
        step: 差分步长
        floor: 相对误差分母下限，避免两个近零梯度放大噪声

    Returns:
        float: 所有参数元素上的最大相对误差
    """
    _, grad_out = loss_fn(network.forward(x), y)
    network.backward(grad_out)
    network.add_weight_decay(weight_decay)
    analytic = {(id(layer), name): layer.grads[name].copy() for layer, name in network.parameters()}

    worst = 0.0
    for layer, name in network.parameters():
        param = layer.params[name]
        grad = analytic[(id(layer), name)]
        for index in np.ndindex(param.shape):
            original = param[index]
            param[index] = original + step
            plus = _total_loss(network, loss_fn, x, y, weight_decay)
            param[index] = original - step
            minus = _total_loss(network, loss_fn, x, y, weight_decay)
            param[index] = original
            numeric = (plus - minus) / (2.0 * step)
            denom = max(abs(numeric), abs(grad[index]), floor)
            worst = max(worst, abs(numeric - grad[index]) / denom)
    return worst
