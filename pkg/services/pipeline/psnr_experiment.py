# -*- coding: utf-8 -*-
"""
重建质量实验模块

只在正样本上训练的自编码器，对测试集正负样本的 PSNR 分布是否不同？
输出两类 PSNR 的直方图、Mann-Whitney U 检验结果，以及只用一个 PSNR 阈值
做分类能达到的最高准确率。
"""

import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from config import PipelineConfig
from core.artifacts import write_json, write_table
from services.autoencoder import AutoencoderModel, psnr_rows
from services.metrics import best_threshold_accuracy, mann_whitney_u

from .service import PipelineService

PathLike = Union[str, Path]

HISTOGRAM_BINS = 30


@dataclass
class PSNRExperimentResult:
    n_positive: int
    n_negative: int
    mean_psnr_positive: float
    mean_psnr_negative: float
    u_statistic: float
    p_value: float
    self_p_value: float
    best_threshold_accuracy: float
    best_threshold: float
    best_direction: str

    def to_dict(self) -> dict:
        """非有限值写成字符串 "inf" / "-inf" / "nan"，保证 JSON 合法"""
        return {
            key: str(value) if isinstance(value, float) and not np.isfinite(value) else value
            for key, value in asdict(self).items()
        }


def psnr_histogram(values_pos: np.ndarray, values_neg: np.ndarray, bins: int = HISTOGRAM_BINS) -> pd.DataFrame:
    """两类共用分箱的直方图；+inf 计入最后一个箱"""
    finite = np.concatenate([values_pos, values_neg])
    finite = finite[np.isfinite(finite)]
    if len(finite) == 0:
        finite = np.zeros(1)
    edges = np.histogram_bin_edges(finite, bins=bins)

    def counts(values):
        clipped = np.where(np.isfinite(values), values, edges[-1])
        return np.histogram(clipped, bins=edges)[0]

    return pd.DataFrame(
        {
            "bin_left": edges[:-1],
            "bin_right": edges[1:],
            "positive_count": counts(values_pos),
            "negative_count": counts(values_neg),
        }
    )


def _finite_mean(values: np.ndarray) -> float:
    finite = values[np.isfinite(values)]
    return float(finite.mean()) if len(finite) else float("nan")


class PSNRExperiment:
    """复用流水线的 prepare-data 与 train-cae 阶段"""

    def __init__(self, config: PipelineConfig, out_dir: Optional[PathLike] = None):
        self.config = config
        self.service = PipelineService(config, out_dir=out_dir)
        self.out_dir = self.service.out_dir
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def run(self) -> PSNRExperimentResult:
        service = self.service
        if not service.path("split").exists():
            service.run_stage("prepare-data")
        if not service.path("cae").exists():
            service.run_stage("train-cae")

        split = service._split()
        model = AutoencoderModel.load(service.path("cae"))
        test = split.test
        values = psnr_rows(test.data, model.reconstruct(test).data)
        truth = test.labels
        values_pos = values[truth == 1]
        values_neg = values[truth == 0]
        if len(values_pos) == 0 or len(values_neg) == 0:
            raise ValueError("测试集需要同时包含正负样本")

        write_table(
            self.out_dir / "psnr_values.csv",
            pd.DataFrame({"sample_id": test.indices, "label": truth, "psnr": values}),
        )
        write_table(self.out_dir / "plots" / "psnr_histogram.csv", psnr_histogram(values_pos, values_neg))

        u_statistic, p_value = mann_whitney_u(values_pos, values_neg)
        _, self_p_value = mann_whitney_u(values_pos, values_pos)
        accuracy, threshold, direction = best_threshold_accuracy(values_pos, values_neg)
        result = PSNRExperimentResult(
            n_positive=len(values_pos),
            n_negative=len(values_neg),
            mean_psnr_positive=_finite_mean(values_pos),
            mean_psnr_negative=_finite_mean(values_neg),
            u_statistic=u_statistic,
            p_value=p_value,
            self_p_value=self_p_value,
            best_threshold_accuracy=accuracy,
            best_threshold=threshold,
            best_direction=direction,
        )
        write_json(self.out_dir / "psnr_experiment.json", result.to_dict())
        self.logger.info(
            f"PSNR 正 {result.mean_psnr_positive:.2f} dB / 负 {result.mean_psnr_negative:.2f} dB, "
            f"Mann-Whitney p={p_value:.3g}, 单阈值最高准确率 {accuracy:.4f}"
        )
        return result


def run_psnr_experiment(config: PipelineConfig) -> PSNRExperimentResult:
    return PSNRExperiment(config).run()
