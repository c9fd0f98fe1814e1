# -*- coding: utf-8 -*-
"""
神经网络层模块

基于 numpy 的前向/反向实现，张量布局统一为 NHWC。
每个层在 forward 时缓存反向所需的中间量，backward 返回对输入的梯度并写入 grads。
"""

from typing import Any, Dict, List, Tuple

import numpy as np
from scipy.special import expit

from core.exceptions import ShapeMismatchError


class Layer:
    """层基类"""

    kind = "layer"
    # 参与权重衰减的参数名
    regularized: Tuple[str, ...] = ()

    def __init__(self):
        self.params: Dict[str, np.ndarray] = {}
        self.grads: Dict[str, np.ndarray] = {}

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def config(self) -> Dict[str, Any]:
        return {}

    def spec(self) -> Dict[str, Any]:
        return {"type": self.kind, **self.config()}

    def param_names(self) -> List[str]:
        return list(self.params.keys())


def _fan_in_uniform(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


class Dense(Layer):
    kind = "dense"
    regularized = ("W",)

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator = None):
        super().__init__()
        self.in_features = int(in_features)
        self.out_features = int(out_features)
        rng = rng or np.random.default_rng(0)
        self.params["W"] = _fan_in_uniform(rng, (self.in_features, self.out_features), self.in_features)
        self.params["b"] = np.zeros(self.out_features)
        self._x = None

    def config(self):
        return {"in_features": self.in_features, "out_features": self.out_features}

    def forward(self, x):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ShapeMismatchError(f"Dense 期望输入 (n,{self.in_features}), 实际 {x.shape}")
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, grad):
        self.grads["W"] = self._x.T @ grad
        self.grads["b"] = grad.sum(axis=0)
        return grad @ self.params["W"].T


class Conv2D(Layer):
    """same 填充、步长1 的二维卷积，权重形状 (k, k, c_in, c_out)"""

    kind = "conv2d"
    regularized = ("W",)

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int = 3, rng: np.random.Generator = None):
        super().__init__()
        if kernel_size % 2 != 1:
            raise ValueError("卷积核大小必须为奇数")
        self.in_channels = int(in_channels)
        self.out_channels = int(out_channels)
        self.kernel_size = int(kernel_size)
        rng = rng or np.random.default_rng(0)
        k = self.kernel_size
        fan_in = k * k * self.in_channels
        self.params["W"] = _fan_in_uniform(rng, (k, k, self.in_channels, self.out_channels), fan_in)
        self.params["b"] = np.zeros(self.out_channels)
        self._xp = None

    def config(self):
        return {
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "kernel_size": self.kernel_size,
        }

    def forward(self, x):
        if x.ndim != 4 or x.shape[3] != self.in_channels:
            raise ShapeMismatchError(f"Conv2D 期望 {self.in_channels} 个输入通道, 实际 {x.shape}")
        k = self.kernel_size
        pad = k // 2
        n, h, w, _ = x.shape
        xp = np.pad(x, ((0, 0), (pad, pad), (pad, pad), (0, 0)))
        self._xp = xp
        out = np.zeros((n, h, w, self.out_channels), dtype=np.result_type(x, self.params["W"]))
        # 按卷积核偏移逐个做矩阵乘，避免展开整张 im2col 矩阵
        for a in range(k):
            for b in range(k):
                out += xp[:, a:a + h, b:b + w, :] @ self.params["W"][a, b]
        return out + self.params["b"]

    def backward(self, grad):
        k = self.kernel_size
        pad = k // 2
        xp = self._xp
        n, h, w, _ = grad.shape
        flat_grad = grad.reshape(-1, self.out_channels)
        dW = np.zeros_like(self.params["W"])
        dxp = np.zeros_like(xp)
        for a in range(k):
            for b in range(k):
                window = xp[:, a:a + h, b:b + w, :].reshape(-1, self.in_channels)
                dW[a, b] = window.T @ flat_grad
                dxp[:, a:a + h, b:b + w, :] += grad @ self.params["W"][a, b].T
        self.grads["W"] = dW
        self.grads["b"] = flat_grad.sum(axis=0)
        return dxp[:, pad:pad + h, pad:pad + w, :]


class MaxPool2D(Layer):
    """2×2 最大池化，步长2"""

    kind = "maxpool2d"

    def __init__(self):
        super().__init__()
        self._argmax = None
        self._shape = None

    def forward(self, x):
        n, h, w, c = x.shape
        if h % 2 or w % 2:
            raise ShapeMismatchError(f"MaxPool2D 需要偶数尺寸, 实际 {x.shape}")
        blocks = (
            x.reshape(n, h // 2, 2, w // 2, 2, c)
            .transpose(0, 1, 3, 5, 2, 4)
            .reshape(n, h // 2, w // 2, c, 4)
        )
        self._argmax = blocks.argmax(axis=-1)
        self._shape = x.shape
        return np.take_along_axis(blocks, self._argmax[..., None], axis=-1)[..., 0]

    def backward(self, grad):
        n, h, w, c = self._shape
        blocks = np.zeros((n, h // 2, w // 2, c, 4), dtype=grad.dtype)
        np.put_along_axis(blocks, self._argmax[..., None], grad[..., None], axis=-1)
        return (
            blocks.reshape(n, h // 2, w // 2, c, 2, 2)
            .transpose(0, 1, 4, 2, 5, 3)
            .reshape(n, h, w, c)
        )


class UpSample2D(Layer):
    """最近邻2倍上采样"""

    kind = "upsample2d"

    def forward(self, x):
        return np.repeat(np.repeat(x, 2, axis=1), 2, axis=2)

    def backward(self, grad):
        n, h, w, c = grad.shape
        return grad.reshape(n, h // 2, 2, w // 2, 2, c).sum(axis=(2, 4))


class Flatten(Layer):
    kind = "flatten"

    def __init__(self):
        super().__init__()
        self._shape = None

    def forward(self, x):
        self._shape = x.shape
        return x.reshape(len(x), -1)

    def backward(self, grad):
        return grad.reshape(self._shape)


class Reshape(Layer):
    kind = "reshape"

    def __init__(self, shape):
        super().__init__()
        self.shape = tuple(int(s) for s in shape)

    def config(self):
        return {"shape": list(self.shape)}

    def forward(self, x):
        return x.reshape((len(x), *self.shape))

    def backward(self, grad):
        return grad.reshape(len(grad), -1)


class ReLU(Layer):
    kind = "relu"

    def __init__(self):
        super().__init__()
        self._mask = None

    def forward(self, x):
        self._mask = x > 0
        return x * self._mask

    def backward(self, grad):
        return grad * self._mask


class Sigmoid(Layer):
    kind = "sigmoid"

    def __init__(self):
        super().__init__()
        self._out = None

    def forward(self, x):
        self._out = expit(x)
        return self._out

    def backward(self, grad):
        return grad * self._out * (1.0 - self._out)


class Tanh(Layer):
    kind = "tanh"

    def __init__(self):
        super().__init__()
        self._out = None

    def forward(self, x):
        self._out = np.tanh(x)
        return self._out

    def backward(self, grad):
        return grad * (1.0 - self._out ** 2)


class Identity(Layer):
    kind = "identity"

    def forward(self, x):
        return x

    def backward(self, grad):
        return grad


ACTIVATIONS = {
    "relu": ReLU,
    "sigmoid": Sigmoid,
    "tanh": Tanh,
    "identity": Identity,
}

_LAYER_TYPES = {
    cls.kind: cls
    for cls in (Dense, Conv2D, MaxPool2D, UpSample2D, Flatten, Reshape, ReLU, Sigmoid, Tanh, Identity)
}


def activation(name: str) -> Layer:
    if name not in ACTIVATIONS:
        raise ValueError(f"未知的激活函数: {name}, 可选 {sorted(ACTIVATIONS)}")
    return ACTIVATIONS[name]()


def build_layer(spec: Dict[str, Any]) -> Layer:
    """根据层描述重建层（参数随后由检查点覆盖）"""
    spec = dict(spec)
    kind = spec.pop("type")
    if kind not in _LAYER_TYPES:
        raise ValueError(f"未知的层类型: {kind}")
    return _LAYER_TYPES[kind](**spec)
