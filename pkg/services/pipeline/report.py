# -*- coding: utf-8 -*-
"""
报告模块

PipelineReport 与各类结果表（指标 CSV、消融汇总）
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from services.metrics import MetricsRecord

METRIC_COLUMNS = ["dataset", "variant", "seed", "acc", "prec", "rec", "f1", "auc"]
SCORE_NAMES = ["acc", "prec", "rec", "f1", "auc"]


@dataclass
class PipelineReport:
    """一次流水线运行的结果与溯源信息；耗时单独保存，不进入 report.json"""

    dataset: str
    variant: str
    seed: int
    config_hash: str
    metrics: MetricsRecord
    n_unlabeled: int
    n_inliers: int
    n_leftovers: int
    n_negatives: int
    negative_purity: Optional[float] = None
    contamination: Optional[float] = None
    threshold: Optional[float] = None
    expected_loss: Optional[float] = None
    n_embeddings: int = 0
    cae_initial_loss: Optional[float] = None
    cae_final_loss: Optional[float] = None
    timings: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_inliers + self.n_leftovers != self.n_unlabeled:
            raise ValueError(
                f"计数不守恒: 内点 {self.n_inliers} + 剩余 {self.n_leftovers} != |U| {self.n_unlabeled}"
            )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("timings")
        data["metrics"] = self.metrics.to_dict()
        return data

    def metrics_row(self) -> Dict[str, Any]:
        m = self.metrics
        return {
            "dataset": self.dataset,
            "variant": self.variant,
            "seed": self.seed,
            "acc": m.accuracy,
            "prec": m.precision,
            "rec": m.recall,
            "f1": m.f1,
            "auc": m.auc,
        }

    def metrics_frame(self) -> pd.DataFrame:
        return pd.DataFrame([self.metrics_row()], columns=METRIC_COLUMNS)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PipelineReport":
        data = dict(data)
        data["metrics"] = MetricsRecord(**data["metrics"])
        return cls(**data)


def summarize(long: pd.DataFrame, by: List[str], repeats: Optional[int] = None) -> pd.DataFrame:
    """
    按 by 分组求各指标的均值和标准差（总体标准差，ddof=0）

    Args:
        long: 每行一个 (单元格, 种子) 的结果
        by: 分组列
        repeats: 标注的重复次数，为 None 时按实际行数

    Returns:
        pd.DataFrame: 每个分组一行，列为 <指标>_mean / <指标>_std / repeats
    """
    metrics = [c for c in long.columns if c in SCORE_NAMES + ["purity", "n_negatives"]]
    rows = []
    for key, group in long.groupby(by, sort=False):
        key = key if isinstance(key, tuple) else (key,)
        row = dict(zip(by, key))
        for name in metrics:
            values = group[name].to_numpy(dtype=np.float64)
            row[f"{name}_mean"] = float(np.nanmean(values)) if np.isfinite(values).any() else float("nan")
            row[f"{name}_std"] = float(np.nanstd(values)) if np.isfinite(values).any() else float("nan")
        row["repeats"] = int(repeats if repeats is not None else len(group))
        rows.append(row)
    return pd.DataFrame(rows)
