# -*- coding: utf-8 -*-
"""
自编码器训练模块

最小化 L_total = MSE(x, x̂) + (λ/2)·Σ‖W‖²，小批量 Adam
"""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
import pandas as pd

from config import AutoencoderConfig
from core.exceptions import TrainingDivergedError
from services.dataset import ImageSet
from services.nn import Adam, mse_loss

from .model import AutoencoderModel, build_autoencoder


@dataclass
class TrainReport:
    """逐轮记录的损失（批均值，按批大小加权）"""

    initial_loss: float = float("nan")
    total_loss: List[float] = field(default_factory=list)
    reconstruction_loss: List[float] = field(default_factory=list)
    regularization_loss: List[float] = field(default_factory=list)
    epoch_seconds: List[float] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.total_loss[-1] if self.total_loss else self.initial_loss

    @property
    def wall_time(self) -> float:
        return float(sum(self.epoch_seconds))

    def to_frame(self, include_time: bool = False) -> pd.DataFrame:
        """
        训练历史表

        Args:
            include_time: 是否包含耗时列（耗时不可复现，落盘产物默认不含）
        """
        frame = pd.DataFrame(
            {
                "epoch": np.arange(1, len(self.total_loss) + 1),
                "loss_total": self.total_loss,
                "loss_reconstruction": self.reconstruction_loss,
                "loss_regularization": self.regularization_loss,
            }
        )
        if include_time:
            frame["seconds"] = self.epoch_seconds
        return frame


class CAETrainer:
    """自编码器训练器（只在 P_L 上训练）"""

    def __init__(self, hyper: AutoencoderConfig, seed: int):
        self.hyper = hyper
        self.seed = seed
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def _full_loss(self, model: AutoencoderModel, data: np.ndarray) -> float:
        recon = model.reconstruct(ImageSet(data=data)).data.astype(np.float64)
        return float(np.mean((recon - data) ** 2)) + model.network.regularization(self.hyper.weight_decay)

    def train(self, images: ImageSet) -> Tuple[AutoencoderModel, TrainReport]:
        """
        训练自编码器

        Args:
            images: 训练图像（通常为 P_L）

        Returns:
            (模型, 训练记录)；模型权重已截断到 float32 精度
        """
        if len(images) == 0:
            raise ValueError("训练集为空")
        hyper = self.hyper
        if hyper.epochs < 1 or hyper.batch_size < 1:
            raise ValueError(f"epochs 和 batch_size 必须为正数: {hyper.epochs}, {hyper.batch_size}")

        rng = np.random.default_rng(self.seed)
        model = build_autoencoder(images.image_shape, hyper, rng)
        network = model.network
        optimizer = Adam(network, hyper.learning_rate)
        data = images.data.astype(np.float64)
        n = len(data)

        report = TrainReport(initial_loss=self._full_loss(model, images.data))
        self.logger.info(
            f"开始训练自编码器: kind={model.kind}, 参数 {network.n_parameters()}, "
            f"样本 {n}, 初始损失 {report.initial_loss:.6f}"
        )

        for epoch in range(hyper.epochs):
            started = time.perf_counter()
            order = rng.permutation(n)
            recon_sum = 0.0
            reg_sum = 0.0
            for batch_index, start in enumerate(range(0, n, hyper.batch_size)):
                batch = data[order[start:start + hyper.batch_size]]
                output = network.forward(batch)
                loss, grad = mse_loss(output, batch)
                reg = network.regularization(hyper.weight_decay)
                if not np.isfinite(loss + reg):
                    raise TrainingDivergedError(epoch, batch_index, loss + reg)
                network.backward(grad)
                network.add_weight_decay(hyper.weight_decay)
                optimizer.step()
                recon_sum += loss * len(batch)
                reg_sum += reg * len(batch)
                self.logger.debug(f"epoch {epoch + 1} batch {batch_index}: L={loss:.6f}, L_reg={reg:.6f}")

            if not network.all_finite():
                raise TrainingDivergedError(epoch, batch_index, float("nan"))
            recon_mean = recon_sum / n
            reg_mean = reg_sum / n
            report.reconstruction_loss.append(recon_mean)
            report.regularization_loss.append(reg_mean)
            report.total_loss.append(recon_mean + reg_mean)
            report.epoch_seconds.append(time.perf_counter() - started)
            self.logger.info(
                f"epoch {epoch + 1}/{hyper.epochs}: L_total={recon_mean + reg_mean:.6f} "
                f"(L={recon_mean:.6f}, L_reg={reg_mean:.6f})"
            )

        network.round_to_float32()
        self.logger.info(f"自编码器训练完成: 最终损失 {report.final_loss:.6f}, 用时 {report.wall_time:.1f}s")
        return model, report


def train_cae(images: ImageSet, hyper: AutoencoderConfig, seed: int) -> Tuple[AutoencoderModel, TrainReport]:
    return CAETrainer(hyper, seed).train(images)
