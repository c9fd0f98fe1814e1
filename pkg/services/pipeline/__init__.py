# -*- coding: utf-8 -*-
"""
流水线模块

阶段编排、消融实验、重建质量实验与报告
"""

from .ablation import LABELED_FRACTIONS, SWEEPS, VARIANTS, AblationRunner, run_ablation
from .psnr_experiment import PSNRExperiment, PSNRExperimentResult, run_psnr_experiment
from .report import METRIC_COLUMNS, PipelineReport, summarize
from .service import ARTIFACTS, STAGES, PipelineService, run_pipeline, stage_seed

__all__ = [
    "ARTIFACTS",
    "AblationRunner",
    "LABELED_FRACTIONS",
    "METRIC_COLUMNS",
    "PSNRExperiment",
    "PSNRExperimentResult",
    "PipelineReport",
    "PipelineService",
    "STAGES",
    "SWEEPS",
    "VARIANTS",
    "run_ablation",
    "run_pipeline",
    "run_psnr_experiment",
    "stage_seed",
    "summarize",
]
