# -*- coding: utf-8 -*-
"""
优化器模块
"""

from typing import Dict, Tuple

import numpy as np

from .network import Sequential


class Optimizer:
    def __init__(self, network: Sequential, learning_rate: float):
        if learning_rate <= 0:
            raise ValueError(f"学习率必须为正数: {learning_rate}")
        self.network = network
        self.learning_rate = learning_rate

    def step(self) -> None:
        raise NotImplementedError


class SGD(Optimizer):
    """随机梯度下降（可选动量）"""

    def __init__(self, network: Sequential, learning_rate: float, momentum: float = 0.0):
        super().__init__(network, learning_rate)
        self.momentum = momentum
        self._velocity: Dict[Tuple[int, str], np.ndarray] = {}

    def step(self) -> None:
        for layer, name in self.network.parameters():
            grad = layer.grads[name]
            if self.momentum:
                key = (id(layer), name)
                v = self._velocity.get(key)
                v = grad if v is None else self.momentum * v + grad
                self._velocity[key] = v
                grad = v
            layer.params[name] = layer.params[name] - self.learning_rate * grad


class Adam(Optimizer):
    """Adam，矩衰减 0.9/0.999，epsilon 1e-8"""

    def __init__(
        self,
        network: Sequential,
        learning_rate: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ):
        super().__init__(network, learning_rate)
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.t = 0
        self._m: Dict[Tuple[int, str], np.ndarray] = {}
        self._v: Dict[Tuple[int, str], np.ndarray] = {}

    def step(self) -> None:
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for layer, name in self.network.parameters():
            key = (id(layer), name)
            grad = layer.grads[name]
            m = self._m.get(key, np.zeros_like(grad))
            v = self._v.get(key, np.zeros_like(grad))
            m = self.beta1 * m + (1.0 - self.beta1) * grad
            v = self.beta2 * v + (1.0 - self.beta2) * grad ** 2
            self._m[key] = m
            self._v[key] = v
            m_hat = m / correction1
            v_hat = v / correction2
            layer.params[name] = layer.params[name] - self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)


def make_optimizer(name: str, network: Sequential, learning_rate: float, momentum: float = 0.0) -> Optimizer:
    name = name.lower()
    if name == "adam":
        return Adam(network, learning_rate)
    if name == "sgd":
        return SGD(network, learning_rate, momentum=momentum)
    raise ValueError(f"未知的优化器: {name}, 可选 adam / sgd")
