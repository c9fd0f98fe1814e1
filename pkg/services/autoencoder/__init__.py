# -*- coding: utf-8 -*-
"""
自编码器模块

只在 P_L 上训练，为所有样本提供潜空间编码，并用 PSNR 评估重建质量
"""

from .model import AutoencoderModel, build_autoencoder, encode, reconstruct, resolve_kind
from .quality import PSNR_IDENTICAL, format_psnr, psnr, psnr_rows
from .trainer import CAETrainer, TrainReport, train_cae

__all__ = [
    "AutoencoderModel",
    "CAETrainer",
    "PSNR_IDENTICAL",
    "TrainReport",
    "build_autoencoder",
    "encode",
    "format_psnr",
    "psnr",
    "psnr_rows",
    "reconstruct",
    "resolve_kind",
    "train_cae",
]
