# -*- coding: utf-8 -*-
"""
二分类器模块

在 P_L（标签1）与 Ñ（标签0）上训练的最终分类器：
图像用两段卷积 + 池化，二维玩具数据和编码输入用全连接；
末端统一为 128 个 ReLU 单元接单个 sigmoid 输出（网络输出 logit，sigmoid 在预测时施加）
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import expit

from config import ClassifierConfig
from core.exceptions import ShapeMismatchError, TrainingDivergedError
from services.dataset import ImageSet
from services.nn import Conv2D, Dense, Flatten, MaxPool2D, ReLU, Sequential, bce_with_logits, make_optimizer

PathLike = Union[str, Path]
ArrayOrImages = Union[ImageSet, np.ndarray]

DECISION_THRESHOLD = 0.5
# 输出概率严格落在(0,1)内
PROBABILITY_EPS = 1e-7
INFERENCE_BATCH = 256


def _as_array(samples: ArrayOrImages) -> np.ndarray:
    data = samples.data if isinstance(samples, ImageSet) else np.asarray(samples)
    if data.ndim == 2:
        data = data.reshape(len(data), 1, 1, data.shape[1])
    return data


def build_classifier(input_shape: Sequence[int], hyper: ClassifierConfig, rng: np.random.Generator) -> Tuple[Sequential, str]:
    """
    搭建分类网络

    Returns:
        (网络, 实际类型 conv / dense)
    """
    height, width, channels = (int(v) for v in input_shape)
    kind = hyper.kind
    if kind == "auto":
        kind = "conv" if height >= 4 and height % 4 == 0 and width % 4 == 0 else "dense"

    layers: list = []
    if kind == "conv":
        if len(hyper.filters) != 2:
            raise ValueError(f"卷积分类器需要2个滤波器数量, 实际 {hyper.filters}")
        if height % 4 or width % 4:
            raise ShapeMismatchError(f"卷积分类器要求高宽能被4整除, 实际 {tuple(input_shape)}")
        f1, f2 = hyper.filters
        layers += [
            Conv2D(channels, f1, rng=rng), ReLU(), MaxPool2D(),
            Conv2D(f1, f2, rng=rng), ReLU(), MaxPool2D(),
            Flatten(),
        ]
        features = (height // 4) * (width // 4) * f2
    elif kind == "dense":
        layers.append(Flatten())
        features = height * width * channels
        for units in hyper.hidden:
            layers += [Dense(features, units, rng=rng), ReLU()]
            features = units
    else:
        raise ValueError(f"未知的分类器类型: {kind}")
    layers += [Dense(features, hyper.head_units, rng=rng), ReLU(), Dense(hyper.head_units, 1, rng=rng)]
    return Sequential(layers), kind


@dataclass
class ClassifierHistory:
    """逐轮训练记录"""

    loss: List[float] = field(default_factory=list)
    positive_draws: List[int] = field(default_factory=list)
    negative_draws: List[int] = field(default_factory=list)
    stopped_early: bool = False

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "epoch": np.arange(1, len(self.loss) + 1),
                "loss": self.loss,
                "positive_draws": self.positive_draws,
                "negative_draws": self.negative_draws,
            }
        )


class BinaryClassifier:
    """网络 + 输入形状；predict 输出正类概率"""

    def __init__(self, network: Sequential, input_shape: Sequence[int], kind: str):
        self.network = network
        self.input_shape = tuple(int(v) for v in input_shape)
        self.kind = kind
        self.history: Optional[ClassifierHistory] = None

    def logits(self, samples: ArrayOrImages) -> np.ndarray:
        data = _as_array(samples)
        if tuple(data.shape[1:]) != self.input_shape:
            raise ShapeMismatchError(f"分类器输入形状为 {self.input_shape}, 实际 {tuple(data.shape[1:])}")
        if len(data) == 0:
            return np.zeros(0)
        outputs = [
            self.network.forward(data[start:start + INFERENCE_BATCH].astype(np.float64)).reshape(-1)
            for start in range(0, len(data), INFERENCE_BATCH)
        ]
        return np.concatenate(outputs)

    def predict(self, samples: ArrayOrImages) -> np.ndarray:
        """逐样本正类概率"""
        return np.clip(expit(self.logits(samples)), PROBABILITY_EPS, 1.0 - PROBABILITY_EPS)

    def predict_labels(self, samples: ArrayOrImages) -> np.ndarray:
        return (self.predict(samples) >= DECISION_THRESHOLD).astype(np.int64)

    def save(self, path: PathLike) -> None:
        self.network.save(path, meta={"kind": self.kind, "input_shape": list(self.input_shape)})

    @classmethod
    def load(cls, path: PathLike) -> "BinaryClassifier":
        network, meta = Sequential.load(path)
        return cls(network, meta["input_shape"], meta.get("kind", "dense"))


class ClassifierTrainer:
    """二分类器训练器：类别数量不等时每个小批量两类各取一半"""

    def __init__(self, hyper: ClassifierConfig, seed: int):
        self.hyper = hyper
        self.seed = seed
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def _epoch_batches(self, rng, n_pos: int, n_neg: int):
        """
        生成一轮的 (正样本行, 反样本行) 批次

        两类数量相同时整体打乱后切批；否则较大的一类每轮下采样到较小类的数量，
        每批两类各取 batch_size//2 个
        """
        size = self.hyper.batch_size
        if n_pos == n_neg:
            order = rng.permutation(n_pos + n_neg)
            for start in range(0, len(order), size):
                chunk = order[start:start + size]
                yield chunk[chunk < n_pos], chunk[chunk >= n_pos] - n_pos
            return
        m = min(n_pos, n_neg)
        pos_rows = rng.permutation(n_pos)[:m]
        neg_rows = rng.permutation(n_neg)[:m]
        half = max(1, size // 2)
        for start in range(0, m, half):
            yield pos_rows[start:start + half], neg_rows[start:start + half]

    def train(self, positives: ArrayOrImages, negatives: ArrayOrImages) -> BinaryClassifier:
        """
        训练分类器

        Args:
            positives: 正样本（P_L）
            negatives: 反例（Ñ）

        Returns:
            BinaryClassifier: 训练好的模型，history 记录逐轮损失与两类抽样数
        """
        pos = _as_array(positives).astype(np.float64)
        neg = _as_array(negatives).astype(np.float64)
        if len(pos) == 0 or len(neg) == 0:
            raise ValueError(f"两类样本都不能为空: 正 {len(pos)}, 反 {len(neg)}")
        if pos.shape[1:] != neg.shape[1:]:
            raise ShapeMismatchError(f"两类样本形状不一致: {pos.shape[1:]} vs {neg.shape[1:]}")
        hyper = self.hyper
        if hyper.epochs < 1 or hyper.batch_size < 1:
            raise ValueError(f"epochs 和 batch_size 必须为正数: {hyper.epochs}, {hyper.batch_size}")

        rng = np.random.default_rng(self.seed)
        network, kind = build_classifier(pos.shape[1:], hyper, rng)
        optimizer = make_optimizer(hyper.optimizer, network, hyper.learning_rate, momentum=hyper.momentum)
        history = ClassifierHistory()
        self.logger.info(
            f"开始训练分类器: kind={kind}, 参数 {network.n_parameters()}, 正 {len(pos)}, 反 {len(neg)}"
        )

        best = np.inf
        stale = 0
        for epoch in range(hyper.epochs):
            loss_sum = 0.0
            drawn_pos = 0
            drawn_neg = 0
            for batch_index, (pos_rows, neg_rows) in enumerate(self._epoch_batches(rng, len(pos), len(neg))):
                x = np.concatenate([pos[pos_rows], neg[neg_rows]])
                y = np.concatenate([np.ones(len(pos_rows)), np.zeros(len(neg_rows))])
                loss, grad = bce_with_logits(network.forward(x), y.reshape(-1, 1))
                total = loss + network.regularization(hyper.weight_decay)
                if not np.isfinite(total):
                    raise TrainingDivergedError(epoch, batch_index, total)
                network.backward(grad)
                network.add_weight_decay(hyper.weight_decay)
                optimizer.step()
                loss_sum += total * len(x)
                drawn_pos += len(pos_rows)
                drawn_neg += len(neg_rows)

            epoch_loss = loss_sum / (drawn_pos + drawn_neg)
            history.loss.append(epoch_loss)
            history.positive_draws.append(drawn_pos)
            history.negative_draws.append(drawn_neg)
            self.logger.debug(f"epoch {epoch + 1}: loss={epoch_loss:.6f}")

            if best - epoch_loss >= hyper.min_delta:
                best = epoch_loss
                stale = 0
            else:
                stale += 1
                if stale >= hyper.patience:
                    history.stopped_early = True
                    self.logger.info(f"损失连续 {hyper.patience} 轮未改善，第 {epoch + 1} 轮提前停止")
                    break

        network.round_to_float32()
        model = BinaryClassifier(network, pos.shape[1:], kind)
        model.history = history
        self.logger.info(f"分类器训练完成: {len(history.loss)} 轮, 最终损失 {history.loss[-1]:.6f}")
        return model


def train_classifier(
    positives: ArrayOrImages, negatives: ArrayOrImages, hyper: ClassifierConfig, seed: int
) -> BinaryClassifier:
    return ClassifierTrainer(hyper, seed).train(positives, negatives)


def predict(model: BinaryClassifier, samples: ArrayOrImages) -> np.ndarray:
    return model.predict(samples)
