# -*- coding: utf-8 -*-
"""
顺序网络模块

把若干层串成一个可训练网络，并提供损失函数、参数遍历和检查点读写
"""

from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.artifacts import read_model_checkpoint, write_model_checkpoint

from .layers import Layer, build_layer


class Sequential:
    """顺序网络"""

    def __init__(self, layers: Sequence[Layer]):
        self.layers: List[Layer] = list(layers)

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, grad: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def parameters(self) -> Iterator[Tuple[Layer, str]]:
        """按声明顺序遍历 (层, 参数名)"""
        for layer in self.layers:
            for name in layer.param_names():
                yield layer, name

    def weights(self) -> List[np.ndarray]:
        return [layer.params[name] for layer, name in self.parameters()]

    def set_weights(self, weights: Sequence[np.ndarray]) -> None:
        slots = list(self.parameters())
        if len(slots) != len(weights):
            raise ValueError(f"参数数量不一致: 网络 {len(slots)}, 给定 {len(weights)}")
        for (layer, name), value in zip(slots, weights):
            if layer.params[name].shape != np.shape(value):
                raise ValueError(f"参数 {layer.kind}.{name} 形状不一致: {layer.params[name].shape} vs {np.shape(value)}")
            layer.params[name] = np.array(value, dtype=np.float64)

    def n_parameters(self) -> int:
        return int(sum(w.size for w in self.weights()))

    def regularization(self, weight_decay: float) -> float:
        """L_reg = (λ/2) · Σ‖W‖²，只对权重矩阵，不含偏置"""
        if weight_decay == 0:
            return 0.0
        total = 0.0
        for layer, name in self.parameters():
            if name in layer.regularized:
                total += float(np.sum(layer.params[name] ** 2))
        return 0.5 * weight_decay * total

    def add_weight_decay(self, weight_decay: float) -> None:
        """把 L_reg 的梯度 λW 加到已有梯度上"""
        if weight_decay == 0:
            return
        for layer, name in self.parameters():
            if name in layer.regularized:
                layer.grads[name] = layer.grads[name] + weight_decay * layer.params[name]

    def round_to_float32(self) -> None:
        """权重截断为 float32 精度，保证内存中的模型与检查点一致"""
        for layer, name in self.parameters():
            layer.params[name] = layer.params[name].astype(np.float32).astype(np.float64)

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(w)) for w in self.weights())

    def specs(self) -> List[Dict[str, Any]]:
        return [layer.spec() for layer in self.layers]

    def save(self, path: Union[str, Path], meta: Optional[Dict[str, Any]] = None) -> None:
        write_model_checkpoint(path, self.specs(), self.weights(), meta=meta)

    @classmethod
    def from_specs(cls, specs: Sequence[Dict[str, Any]]) -> "Sequential":
        return cls([build_layer(spec) for spec in specs])

    @classmethod
    def load(cls, path: Union[str, Path]) -> Tuple["Sequential", Dict[str, Any]]:
        """读取检查点，返回 (网络, 元数据)"""
        specs, weights, meta = read_model_checkpoint(path)
        network = cls.from_specs(specs)
        network.set_weights(weights)
        return network, meta


def mse_loss(pred: np.ndarray, target: np.ndarray) -> Tuple[float, np.ndarray]:
    """均方误差（对所有元素取平均），返回 (损失, 对 pred 的梯度)"""
    diff = pred - target
    loss = float(np.mean(diff ** 2))
    return loss, 2.0 * diff / diff.size


def bce_with_logits(logits: np.ndarray, target: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    二元交叉熵（输入为 logit，数值稳定形式）

    Returns:
        (平均损失, 对 logits 的梯度)
    """
    z = logits.reshape(-1)
    y = target.reshape(-1).astype(np.float64)
    loss = np.maximum(z, 0) - z * y + np.log1p(np.exp(-np.abs(z)))
    prob = 0.5 * (1.0 + np.tanh(0.5 * z))
    grad = (prob - y) / len(z)
    return float(np.mean(loss)), grad.reshape(logits.shape)
