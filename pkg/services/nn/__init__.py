# -*- coding: utf-8 -*-
"""
神经网络基础模块

自编码器和二分类器共用的层、网络、优化器与梯度检查
"""

from .gradcheck import gradient_check
from .layers import (
    Conv2D,
    Dense,
    Flatten,
    Identity,
    MaxPool2D,
    ReLU,
    Reshape,
    Sigmoid,
    Tanh,
    UpSample2D,
    activation,
    build_layer,
)
from .network import Sequential, bce_with_logits, mse_loss
from .optim import SGD, Adam, make_optimizer

__all__ = [
    "Adam",
    "Conv2D",
    "Dense",
    "Flatten",
    "Identity",
    "MaxPool2D",
    "ReLU",
    "Reshape",
    "SGD",
    "Sequential",
    "Sigmoid",
    "Tanh",
    "UpSample2D",
    "activation",
    "bce_with_logits",
    "build_layer",
    "gradient_check",
    "make_optimizer",
    "mse_loss",
]
