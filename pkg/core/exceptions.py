# -*- coding: utf-8 -*-
"""
异常定义模块

项目内所有可预期错误的统一基类和子类
"""

from typing import Optional


class DensPUError(Exception):
    """项目异常基类"""


class DataFormatError(DensPUError, ValueError):
    """数据文件格式错误（魔数不符、文件截断、记录长度不对等）"""


class ShapeMismatchError(DensPUError, ValueError):
    """输入形状与模型或另一输入不一致"""


class TrainingDivergedError(DensPUError, FloatingPointError):
    """训练过程中出现非有限的损失值"""

    def __init__(self, epoch: int, batch: int, loss: float):
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        super().__init__(f"损失值非有限: epoch={epoch}, batch={batch}, loss={loss}")


class StageError(DensPUError, RuntimeError):
    """流水线某一阶段失败"""

    def __init__(self, stage: str, cause: Optional[BaseException] = None):
        self.stage = stage
        self.cause = cause
        message = f"阶段 {stage} 失败"
        if cause is not None:
            message += f": {cause}"
        super().__init__(message)
