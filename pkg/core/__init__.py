# -*- coding: utf-8 -*-
"""
核心模块
"""

from .exceptions import (
    DataFormatError,
    DensPUError,
    ShapeMismatchError,
    StageError,
    TrainingDivergedError,
)
from .logging_config import configure_logging, resolve_level, run_log

__all__ = [
    "configure_logging",
    "DensPUError",
    "DataFormatError",
    "ShapeMismatchError",
    "StageError",
    "TrainingDivergedError",
    "resolve_level",
    "run_log",
]
