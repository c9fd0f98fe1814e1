# -*- coding: utf-8 -*-
"""
流水线服务模块

流水线拆成可单独运行的阶段，每个阶段只从输出目录读取上游产物、把结果写回输出目录，
因此逐阶段执行与一次性执行得到完全相同的文件：

    prepare-data → train-cae → encode → densify → detect → select-negatives
    → train-classifier → evaluate

任何阶段失败都包装为 StageError，已写出的产物保留在磁盘上。
"""

import logging
import time
from pathlib import Path
from typing import Callable, Dict, Optional, Union

import numpy as np
import pandas as pd

from config import PipelineConfig, config_hash, save_pipeline_config
from core.artifacts import read_json, read_matrix, read_table, write_json, write_matrix, write_table
from core.exceptions import StageError
from core.logging_config import run_log
from services.anomaly import (
    AnomalyPartition,
    build_forest,
    contamination,
    expected_loss,
    fit_threshold,
    partition_unlabeled,
)
from services.augmentation import AugmentationSpec, EmbeddingSet, densify
from services.autoencoder import AutoencoderModel, train_cae
from services.classifier import BinaryClassifier, train_classifier
from services.dataset import PUSplit, load_source, load_split, save_split
from services.metrics import auc, classification_metrics, negative_purity, roc_points
from services.selection import random_leftovers, random_unlabeled, rank_leftovers, select_negatives

from .report import PipelineReport

PathLike = Union[str, Path]

STAGES = (
    "prepare-data",
    "train-cae",
    "encode",
    "densify",
    "detect",
    "select-negatives",
    "train-classifier",
    "evaluate",
)

# 各阶段使用的随机种子偏移
_STAGE_STREAMS = {name: index for index, name in enumerate(STAGES)}

# 输出目录中的产物文件
ARTIFACTS = {
    "config": "config.conf",
    "split": "split",
    "cae": "cae.ckpt",
    "cae_summary": "cae.json",
    "cae_history": "cae_history.csv",
    "z_labeled": "z_labeled.dpu",
    "z_unlabeled": "z_unlabeled.dpu",
    "z_test": "z_test.dpu",
    "embeddings": "embeddings.dpu",
    "forest": "forest.ckpt",
    "scores": "scores.csv",
    "detect_summary": "detect.json",
    "negatives": "negatives.csv",
    "selection_summary": "selection.json",
    "classifier": "classifier.ckpt",
    "classifier_history": "classifier_history.csv",
    "predictions": "predictions.csv",
    "metrics": "metrics.csv",
    "report": "report.json",
    "timings": "timings.json",
    "roc": "plots/roc.csv",
    "lambdas": "plots/lambda_samples.csv",
}

# 消融实验中可在多个变体间共享的产物
SHARED_ARTIFACTS = ("split", "cae", "cae_summary", "cae_history", "z_labeled", "z_unlabeled", "z_test")


def stage_seed(seed: int, stage: str) -> int:
    """由全局种子派生某个阶段的种子"""
    state = np.random.SeedSequence([int(seed), _STAGE_STREAMS[stage]]).generate_state(1)
    return int(state[0])


class PipelineService:
    """Dens-PU 流水线"""

    def __init__(self, config: PipelineConfig, out_dir: Optional[PathLike] = None, shared_dir: Optional[PathLike] = None):
        """
        Args:
            config: 流水线配置
            out_dir: 输出目录，默认取 config.out_dir
            shared_dir: 共享产物目录（消融实验复用数据划分、自编码器和编码）
        """
        self.config = config
        self.out_dir = Path(out_dir or config.out_dir)
        self.shared_dir = Path(shared_dir) if shared_dir else self.out_dir
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")
        self._stages: Dict[str, Callable[[], object]] = {
            "prepare-data": self.prepare_data,
            "train-cae": self.train_cae,
            "encode": self.encode,
            "densify": self.densify,
            "detect": self.detect,
            "select-negatives": self.select_negatives,
            "train-classifier": self.train_classifier,
            "evaluate": self.evaluate,
        }

    # ------------------------------------------------------------------
    # 路径与通用读取
    # ------------------------------------------------------------------

    def path(self, name: str) -> Path:
        base = self.shared_dir if name in SHARED_ARTIFACTS else self.out_dir
        return base / ARTIFACTS[name]

    def seed_for(self, stage: str) -> int:
        return stage_seed(self.config.seed, stage)

    def _split(self) -> PUSplit:
        return load_split(self.path("split"))

    def _read_optional_json(self, name: str) -> dict:
        path = self.path(name)
        return read_json(path) if path.exists() else {}

    def _augmentation_spec(self, n_labeled: int) -> AugmentationSpec:
        return AugmentationSpec.from_config(self.config.augment, n_labeled, self.seed_for("densify"))

    def _record_timing(self, stage: str, seconds: float) -> None:
        path = self.path("timings")
        timings = read_json(path) if path.exists() else {}
        timings[stage] = round(seconds, 3)
        write_json(path, timings)

    # ------------------------------------------------------------------
    # 阶段执行
    # ------------------------------------------------------------------

    def run_stage(self, stage: str):
        """执行单个阶段，失败时抛出 StageError"""
        if stage not in self._stages:
            raise ValueError(f"未知的阶段: {stage}, 可选 {STAGES}")
        self.out_dir.mkdir(parents=True, exist_ok=True)
        save_pipeline_config(self.config, self.path("config"))
        with run_log(self.out_dir):
            self.logger.info(f"阶段开始: {stage}")
            started = time.perf_counter()
            try:
                result = self._stages[stage]()
            except Exception as e:
                self.logger.exception(f"阶段 {stage} 失败: {e}")
                raise StageError(stage, e) from e
            elapsed = time.perf_counter() - started
            self.logger.info(f"阶段完成: {stage} ({elapsed:.2f}s)")
        self._record_timing(stage, elapsed)
        return result

    def run(self, skip_shared: bool = False) -> PipelineReport:
        """
        按顺序执行全部阶段

        Args:
            skip_shared: 共享目录中的数据划分、自编码器和编码已存在时跳过对应阶段
        """
        for stage in STAGES:
            if skip_shared and stage in ("prepare-data", "train-cae", "encode") and self._shared_done(stage):
                self.logger.info(f"复用共享产物，跳过阶段 {stage}")
                continue
            result = self.run_stage(stage)
        result.timings = read_json(self.path("timings"))
        return result

    def _shared_done(self, stage: str) -> bool:
        needed = {
            "prepare-data": ("split",),
            "train-cae": ("cae",),
            "encode": ("z_labeled", "z_unlabeled", "z_test"),
        }[stage]
        return all(self.path(name).exists() for name in needed)

    # ------------------------------------------------------------------
    # 各阶段
    # ------------------------------------------------------------------

    def prepare_data(self) -> PUSplit:
        split = load_source(self.config.dataset, self.seed_for("prepare-data"))
        save_split(split, self.path("split"))
        return split

    def train_cae(self):
        split = self._split()
        model, report = train_cae(split.positive_labeled, self.config.autoencoder, self.seed_for("train-cae"))
        model.save(self.path("cae"))
        write_table(self.path("cae_history"), report.to_frame())
        write_json(
            self.path("cae_summary"),
            {
                "kind": model.kind,
                "n_parameters": model.network.n_parameters(),
                "initial_loss": report.initial_loss,
                "final_loss": report.final_loss,
                "epochs": len(report.total_loss),
            },
        )
        return model, report

    def encode(self) -> Dict[str, np.ndarray]:
        split = self._split()
        model = AutoencoderModel.load(self.path("cae"))
        encodings = {
            "z_labeled": model.encode(split.positive_labeled),
            "z_unlabeled": model.encode(split.unlabeled),
            "z_test": model.encode(split.test),
        }
        for name, matrix in encodings.items():
            write_matrix(self.path(name), matrix)
        self.logger.info(
            f"编码完成: Z_L {encodings['z_labeled'].shape}, Z_U {encodings['z_unlabeled'].shape}"
        )
        return encodings

    def densify(self) -> EmbeddingSet:
        z_labeled = read_matrix(self.path("z_labeled"))
        spec = self._augmentation_spec(len(z_labeled))
        embeddings = densify(z_labeled, spec, n_jobs=self.config.forest.n_jobs)
        embeddings.save(self.path("embeddings"))
        write_table(self.path("lambdas"), embeddings.provenance[["lambda"]])
        return embeddings

    def detect(self) -> Optional[AnomalyPartition]:
        if self.config.selection.strategy == "random_unlabeled":
            self.logger.info("selection.strategy=random_unlabeled，不使用异常检测")
            write_json(self.path("detect_summary"), {"detector": False})
            return None

        split = self._split()
        z_labeled = read_matrix(self.path("z_labeled"))
        z_unlabeled = read_matrix(self.path("z_unlabeled"))
        embeddings = EmbeddingSet.load(self.path("embeddings"))
        spec = self._augmentation_spec(len(z_labeled))
        cfg = self.config.forest

        c = cfg.contamination
        if c is None:
            c = contamination(len(z_labeled), spec.n_pairs, spec.samples_per_pair)
        fitting = np.vstack([embeddings.matrix, z_labeled])
        forest = build_forest(fitting, cfg.n_trees, cfg.subsample_size, self.seed_for("detect"), n_jobs=cfg.n_jobs)
        fitting_scores = forest.score(fitting)
        forest = fit_threshold(forest, fitting, c, scores=fitting_scores)
        forest.save(self.path("forest"))

        partition = partition_unlabeled(forest, z_unlabeled)
        write_table(self.path("scores"), partition.to_frame(split.unlabeled.indices))

        summary = {
            "detector": True,
            "contamination": c,
            "threshold": forest.threshold,
            "n_fitting": len(fitting),
            "n_fitting_flagged": int(np.sum(fitting_scores > forest.threshold)),
            "n_inliers": partition.n_inliers,
            "n_leftovers": partition.n_leftovers,
            "expected_loss": None,
        }
        if len(embeddings):
            n_embeddings = len(embeddings)
            summary["expected_loss"] = expected_loss(
                fitting_scores[:n_embeddings], fitting_scores[n_embeddings:], forest.threshold, c
            )
        write_json(self.path("detect_summary"), summary)
        return partition

    def _partition(self) -> AnomalyPartition:
        return AnomalyPartition.from_frame(read_table(self.path("scores")))

    def select_negatives(self) -> np.ndarray:
        split = self._split()
        cfg = self.config.selection
        n_positives = len(split.positive_labeled)
        seed = self.seed_for("select-negatives")
        sample_ids = split.unlabeled.indices

        if cfg.strategy == "random_unlabeled":
            selected = random_unlabeled(len(split.unlabeled), n_positives, seed)
            table = pd.DataFrame(
                {"sample_id": sample_ids[selected], "rank_value": np.nan, "selected_flag": 1}
            )
            n_inliers, n_leftovers = 0, len(split.unlabeled)
        else:
            partition = self._partition()
            z_labeled = read_matrix(self.path("z_labeled"))
            z_unlabeled = read_matrix(self.path("z_unlabeled")) if cfg.rank_mode == "min_distance" else None
            ranked = rank_leftovers(partition, z_labeled, cfg.rank_mode, z_unlabeled)
            if cfg.strategy == "anomaly":
                selected = select_negatives(ranked, cfg.population, n_positives, seed)
            else:
                selected = random_leftovers(partition, n_positives, seed)
            table = ranked.to_frame(selected, sample_ids)
            n_inliers, n_leftovers = partition.n_inliers, partition.n_leftovers

        write_table(self.path("negatives"), table)
        purity = negative_purity(selected, split.evaluation_truth())
        write_json(
            self.path("selection_summary"),
            {
                "strategy": cfg.strategy,
                "population": cfg.population,
                "rank_mode": cfg.rank_mode,
                "rows": [int(r) for r in np.sort(selected)],
                "n_negatives": int(len(selected)),
                "n_inliers": int(n_inliers),
                "n_leftovers": int(n_leftovers),
                "negative_purity": purity,
            },
        )
        self.logger.info(f"反例 {len(selected)} 个, 纯度 {purity:.4f}")
        return selected

    def _classifier_inputs(self, split: PUSplit):
        rows = np.asarray(read_json(self.path("selection_summary"))["rows"], dtype=np.int64)
        if self.config.classifier.input == "encodings":
            z_unlabeled = read_matrix(self.path("z_unlabeled"))
            return read_matrix(self.path("z_labeled")), z_unlabeled[rows]
        return split.positive_labeled, split.unlabeled.subset(rows)

    def train_classifier(self) -> BinaryClassifier:
        split = self._split()
        positives, negatives = self._classifier_inputs(split)
        model = train_classifier(positives, negatives, self.config.classifier, self.seed_for("train-classifier"))
        model.save(self.path("classifier"))
        write_table(self.path("classifier_history"), model.history.to_frame())
        return model

    def evaluate(self) -> PipelineReport:
        split = self._split()
        model = BinaryClassifier.load(self.path("classifier"))
        if self.config.classifier.input == "encodings":
            inputs = read_matrix(self.path("z_test"))
        else:
            inputs = split.test
        truth = split.test.labels
        probability = model.predict(inputs)
        labels = (probability >= 0.5).astype(np.int64)

        write_table(
            self.path("predictions"),
            pd.DataFrame({"sample_id": split.test.indices, "probability": probability, "label": labels}),
        )
        metrics = classification_metrics(truth, labels)
        if len(np.unique(truth)) == 2:
            metrics = metrics.with_auc(auc(truth, probability))
            write_table(self.path("roc"), roc_points(truth, probability))

        detect = self._read_optional_json("detect_summary")
        selection = read_json(self.path("selection_summary"))
        cae = self._read_optional_json("cae_summary")
        embeddings = self.path("embeddings")
        report = PipelineReport(
            dataset=self.config.dataset.source,
            variant=self.config.variant,
            seed=self.config.seed,
            config_hash=config_hash(self.config),
            metrics=metrics,
            n_unlabeled=len(split.unlabeled),
            n_inliers=selection["n_inliers"],
            n_leftovers=selection["n_leftovers"],
            n_negatives=selection["n_negatives"],
            negative_purity=selection["negative_purity"],
            contamination=detect.get("contamination"),
            threshold=detect.get("threshold"),
            expected_loss=detect.get("expected_loss"),
            n_embeddings=len(read_matrix(embeddings)) if embeddings.exists() else 0,
            cae_initial_loss=cae.get("initial_loss"),
            cae_final_loss=cae.get("final_loss"),
        )
        write_table(self.path("metrics"), report.metrics_frame())
        write_json(self.path("report"), report.to_dict())
        timings_path = self.path("timings")
        if timings_path.exists():
            report.timings = read_json(timings_path)
        self.logger.info(
            f"测试集: acc={metrics.accuracy:.4f}, prec={metrics.precision:.4f}, "
            f"rec={metrics.recall:.4f}, f1={metrics.f1:.4f}, auc={metrics.auc}"
        )
        return report


def run_pipeline(config: PipelineConfig) -> PipelineReport:
    """一次性执行完整流水线"""
    return PipelineService(config).run()
