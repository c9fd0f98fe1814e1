# -*- coding: utf-8 -*-
"""
自编码器模型模块

卷积版本：三层卷积 + 两次 2×2 池化，解码器对称地用上采样还原；
latent_dim 与卷积展平维度不一致时在瓶颈处加一个全连接层。
全连接版本用于二维玩具数据，接口相同。
"""

from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from config import AutoencoderConfig
from core.exceptions import ShapeMismatchError
from services.dataset import ImageSet
from services.nn import (
    Conv2D,
    Dense,
    Flatten,
    MaxPool2D,
    ReLU,
    Reshape,
    Sequential,
    Sigmoid,
    UpSample2D,
    activation,
)

PathLike = Union[str, Path]
ArrayOrImages = Union[ImageSet, np.ndarray]

INFERENCE_BATCH = 256


def resolve_kind(kind: str, input_shape: Sequence[int]) -> str:
    """auto: 高宽能被4整除的图像用卷积，其余（如 1×1×2 玩具数据）用全连接"""
    if kind != "auto":
        return kind
    height, width = input_shape[0], input_shape[1]
    return "conv" if height >= 4 and height % 4 == 0 and width % 4 == 0 else "dense"


def _conv_layers(input_shape, hyper: AutoencoderConfig, rng) -> Tuple[list, list]:
    if len(hyper.filters) != 3:
        raise ValueError(f"卷积自编码器需要3个滤波器数量, 实际 {hyper.filters}")
    height, width, channels = input_shape
    if height % 4 or width % 4:
        raise ShapeMismatchError(f"卷积自编码器要求高宽能被4整除, 实际 {tuple(input_shape)}")
    f1, f2, f3 = hyper.filters
    code_shape = (height // 4, width // 4, f3)
    flat = int(np.prod(code_shape))

    encoder = [
        Conv2D(channels, f1, rng=rng), ReLU(), MaxPool2D(),
        Conv2D(f1, f2, rng=rng), ReLU(), MaxPool2D(),
        Conv2D(f2, f3, rng=rng), ReLU(),
        Flatten(),
    ]
    decoder = []
    if hyper.latent_dim != flat:
        encoder += [Dense(flat, hyper.latent_dim, rng=rng), activation(hyper.latent_activation)]
        decoder += [Dense(hyper.latent_dim, flat, rng=rng), ReLU()]
    decoder += [
        Reshape(code_shape),
        Conv2D(f3, f2, rng=rng), ReLU(), UpSample2D(),
        Conv2D(f2, f1, rng=rng), ReLU(), UpSample2D(),
        Conv2D(f1, channels, rng=rng), Sigmoid(),
    ]
    return encoder, decoder


def _dense_layers(input_shape, hyper: AutoencoderConfig, rng) -> Tuple[list, list]:
    n_in = int(np.prod(input_shape))
    widths = [n_in, *hyper.hidden]
    encoder: list = [Flatten()]
    for a, b in zip(widths[:-1], widths[1:]):
        encoder += [Dense(a, b, rng=rng), ReLU()]
    encoder += [Dense(widths[-1], hyper.latent_dim, rng=rng), activation(hyper.latent_activation)]

    decoder: list = []
    reverse = widths[::-1]
    previous = hyper.latent_dim
    for width in reverse[:-1]:
        decoder += [Dense(previous, width, rng=rng), ReLU()]
        previous = width
    decoder += [Dense(previous, n_in, rng=rng), Sigmoid(), Reshape(input_shape)]
    return encoder, decoder


class AutoencoderModel:
    """编码器 + 解码器"""

    def __init__(self, encoder: Sequential, decoder: Sequential, input_shape: Sequence[int], kind: str):
        self.encoder = encoder
        self.decoder = decoder
        self.input_shape = tuple(int(v) for v in input_shape)
        self.kind = kind
        self.network = Sequential(encoder.layers + decoder.layers)

    @property
    def latent_dim(self) -> int:
        probe = self.encoder.forward(np.zeros((1, *self.input_shape)))
        return int(probe.shape[1])

    def _check_shape(self, data: np.ndarray) -> None:
        if tuple(data.shape[1:]) != self.input_shape:
            raise ShapeMismatchError(f"模型输入形状为 {self.input_shape}, 实际 {tuple(data.shape[1:])}")

    def _batched(self, network: Sequential, data: np.ndarray) -> np.ndarray:
        outputs = [
            network.forward(data[start:start + INFERENCE_BATCH].astype(np.float64))
            for start in range(0, len(data), INFERENCE_BATCH)
        ]
        return np.concatenate(outputs, axis=0)

    def encode(self, images: ArrayOrImages) -> np.ndarray:
        """每张图一行、宽度 latent_dim 的 float32 编码矩阵"""
        data = images.data if isinstance(images, ImageSet) else np.asarray(images)
        self._check_shape(data)
        if len(data) == 0:
            return np.zeros((0, self.latent_dim), dtype=np.float32)
        return self._batched(self.encoder, data).astype(np.float32)

    def decode(self, codes: np.ndarray) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.float64)
        return np.clip(self._batched(self.decoder, codes), 0.0, 1.0)

    def reconstruct(self, images: ImageSet) -> ImageSet:
        """解码器作用于编码，输出裁剪到[0,1]，标签与下标保留"""
        self._check_shape(images.data)
        if len(images) == 0:
            return images
        output = np.clip(self._batched(self.network, images.data), 0.0, 1.0)
        return ImageSet(data=output.astype(np.float32), labels=images.labels, indices=images.indices)

    def meta(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "input_shape": list(self.input_shape),
            "n_encoder_layers": len(self.encoder.layers),
        }

    def save(self, path: PathLike) -> None:
        self.network.save(path, meta=self.meta())

    @classmethod
    def load(cls, path: PathLike) -> "AutoencoderModel":
        network, meta = Sequential.load(path)
        split_at = int(meta["n_encoder_layers"])
        layers: List = network.layers
        return cls(
            encoder=Sequential(layers[:split_at]),
            decoder=Sequential(layers[split_at:]),
            input_shape=meta["input_shape"],
            kind=meta.get("kind", "conv"),
        )


def build_autoencoder(
    input_shape: Sequence[int], hyper: AutoencoderConfig, rng: np.random.Generator
) -> AutoencoderModel:
    """
    按配置搭建自编码器（权重按 fan-in 均匀初始化）

    Args:
        input_shape: 单张图像形状 (h, w, c)
        hyper: 自编码器配置
        rng: 初始化用随机数生成器

    Returns:
        AutoencoderModel: 未训练的模型
    """
    input_shape = tuple(int(v) for v in input_shape)
    kind = resolve_kind(hyper.kind, input_shape)
    if kind == "conv":
        encoder, decoder = _conv_layers(input_shape, hyper, rng)
    elif kind == "dense":
        encoder, decoder = _dense_layers(input_shape, hyper, rng)
    else:
        raise ValueError(f"未知的自编码器类型: {kind}")
    return AutoencoderModel(Sequential(encoder), Sequential(decoder), input_shape, kind)


def encode(model: AutoencoderModel, images: ArrayOrImages) -> np.ndarray:
    return model.encode(images)


def reconstruct(model: AutoencoderModel, images: ImageSet) -> ImageSet:
    return model.reconstruct(images)
