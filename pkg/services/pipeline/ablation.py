# -*- coding: utf-8 -*-
"""
消融实验模块

三种扫描，每个单元格在 config.repeats 个种子上重复：
- labeled_fraction：标注正样本占训练正样本的比例
- variant：增强方式（无 / mixup / dens）× 反例挑选（随机 / 异常排序），外加直接把 U 当反例
- population：反例数量模式（全部剩余 / 随机数量 / 与 |P_L| 相同）

同一种子下 variant 与 population 扫描的各单元格共享数据划分、自编码器和编码
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from config import PipelineConfig
from core.artifacts import write_json, write_table
from services.dataset import load_source

from .report import summarize
from .service import PipelineService

PathLike = Union[str, Path]

SWEEPS = ("labeled_fraction", "variant", "population")

LABELED_FRACTIONS = (0.01, 0.05, 0.10, 0.25, 0.30, 0.50)

# 变体名 -> 配置修改
VARIANTS: Dict[str, Dict[str, Any]] = {
    "u-as-negatives": {"augment.mode": "none", "selection.strategy": "random_unlabeled"},
    "none+random": {"augment.mode": "none", "selection.strategy": "random_leftovers"},
    "none+anomaly": {"augment.mode": "none", "selection.strategy": "anomaly"},
    "mixup+random": {"augment.mode": "mixup", "selection.strategy": "random_leftovers"},
    "mixup+anomaly": {"augment.mode": "mixup", "selection.strategy": "anomaly"},
    "dens+random": {"augment.mode": "dens", "selection.strategy": "random_leftovers"},
    "dens+anomaly": {"augment.mode": "dens", "selection.strategy": "anomaly"},
}

POPULATION_CELLS = ("all_leftovers", "random_count", "match_positives")


def count_training_positives(config: PipelineConfig) -> int:
    """训练集中正类样本总数（P_L 与 U 中隐藏正样本之和，下采样之前）"""
    dataset = config.dataset
    if dataset.synthetic:
        return dataset.n_labeled + int(round(dataset.n_unlabeled * dataset.unlabeled_positive_fraction))
    no_cap = config.replace(**{"dataset.max_unlabeled": 0, "dataset.target_shape": ()})
    split = load_source(no_cap.dataset, config.seed)
    return len(split.positive_labeled) + int(split.evaluation_truth().sum())


def labeled_fraction_overrides(config: PipelineConfig, fraction: float, total_positives: int) -> Dict[str, Any]:
    """
    标注比例对应的配置修改；玩具数据保持正样本总数和 U 中反例数量不变
    """
    n_labeled = max(2, int(round(fraction * total_positives)))
    changes: Dict[str, Any] = {"dataset.n_labeled": n_labeled}
    dataset = config.dataset
    if dataset.synthetic:
        n_negatives = dataset.n_unlabeled - int(round(dataset.n_unlabeled * dataset.unlabeled_positive_fraction))
        hidden_positives = total_positives - n_labeled
        n_unlabeled = n_negatives + hidden_positives
        changes["dataset.n_unlabeled"] = n_unlabeled
        changes["dataset.unlabeled_positive_fraction"] = hidden_positives / n_unlabeled
    return changes


class AblationRunner:
    """消融实验执行器"""

    def __init__(self, config: PipelineConfig, out_dir: Optional[PathLike] = None):
        self.config = config
        self.out_dir = Path(out_dir or config.out_dir)
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def cells(self, sweep: str) -> List[Tuple[str, Dict[str, Any], bool]]:
        """
        扫描的单元格列表

        Returns:
            [(单元格名, 配置修改, 是否共享上游产物)]
        """
        if sweep == "variant":
            return [(name, {**changes, "variant": name}, True) for name, changes in VARIANTS.items()]
        if sweep == "population":
            return [
                (name, {"selection.population": name, "selection.strategy": "anomaly", "variant": f"population={name}"}, True)
                for name in POPULATION_CELLS
            ]
        if sweep == "labeled_fraction":
            total = count_training_positives(self.config)
            self.logger.info(f"训练正样本总数 {total}")
            cells = []
            for fraction in LABELED_FRACTIONS:
                name = f"{fraction * 100:g}%"
                changes = labeled_fraction_overrides(self.config, fraction, total)
                changes["variant"] = f"labeled={name}"
                cells.append((name, changes, False))
            return cells
        raise ValueError(f"未知的扫描: {sweep}, 可选 {SWEEPS}")

    def run(self, sweep: str) -> pd.DataFrame:
        """
        执行扫描，写出 ablation_<sweep>_long.csv / _summary.csv / _summary.json

        Returns:
            pd.DataFrame: 汇总表（每个单元格一行，均值与标准差）
        """
        cells = self.cells(sweep)
        seeds = [self.config.seed + r for r in range(self.config.repeats)]
        rows = []
        for seed in seeds:
            shared_dir = self.out_dir / f"seed_{seed}" / "shared"
            for name, changes, share in cells:
                cell_config = self.config.replace(seed=seed, **changes)
                cell_dir = self.out_dir / f"seed_{seed}" / _slug(name)
                service = PipelineService(cell_config, out_dir=cell_dir, shared_dir=shared_dir if share else None)
                self.logger.info(f"消融 {sweep}: 单元格 {name}, seed={seed}")
                report = service.run(skip_shared=share)
                row = {"sweep": sweep, "cell": name, **report.metrics_row()}
                row["purity"] = report.negative_purity
                row["n_negatives"] = report.n_negatives
                rows.append(row)

        long = pd.DataFrame(rows)
        summary = summarize(long, ["sweep", "cell"], repeats=len(seeds))
        write_table(self.out_dir / f"ablation_{sweep}_long.csv", long)
        write_table(self.out_dir / f"ablation_{sweep}_summary.csv", summary)
        write_json(
            self.out_dir / f"ablation_{sweep}_summary.json",
            {
                "sweep": sweep,
                "repeats": len(seeds),
                "seeds": seeds,
                "cells": _json_records(summary),
            },
        )
        for _, cell in summary.iterrows():
            self.logger.info(
                f"{cell['cell']}: F1 {cell['f1_mean']:.4f} ± {cell['f1_std']:.4f} ({len(seeds)} 个种子)"
            )
        return summary


def _slug(name: str) -> str:
    return name.replace("%", "pct").replace("+", "_").replace("=", "_")


def _json_records(frame: pd.DataFrame) -> List[Dict[str, Any]]:
    records = []
    for record in frame.to_dict(orient="records"):
        records.append({k: (None if isinstance(v, float) and not np.isfinite(v) else v) for k, v in record.items()})
    return records


def run_ablation(config: PipelineConfig, sweep: str) -> pd.DataFrame:
    if sweep not in SWEEPS:
        raise ValueError(f"未知的扫描: {sweep}, 可选 {SWEEPS}")
    return AblationRunner(config).run(sweep)
