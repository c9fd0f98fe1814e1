# -*- coding: utf-8 -*-
"""
日志配置模块

- configure_logging：进程级的控制台 + 文件日志（log/dens_pu.log）
- run_log：流水线运行期间把日志额外写到输出目录下的 run.log
"""

import logging
import os
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Union

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
RUN_LOG_FILE = "run.log"


def resolve_level(level: Union[int, str]) -> int:
    """"INFO" / "debug" / 20 都转换成整数级别，无法识别时取 INFO"""
    if isinstance(level, int):
        return level
    resolved = logging.getLevelName(str(level).strip().upper())
    return resolved if isinstance(resolved, int) else logging.INFO


def _formatter() -> logging.Formatter:
    return logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)


def configure_logging(
    level: Union[int, str] = logging.INFO,
    log_dir: str = "log",
    log_file: str = "dens_pu.log",
) -> logging.Logger:
    """
    配置根logger

    根logger已有处理器时只调整级别，不重复添加

    Args:
        level: 日志级别
        log_dir: 日志文件目录
        log_file: 日志文件名

    Returns:
        logging.Logger: 根logger
    """
    level = resolve_level(level)
    root_logger = logging.getLogger()
    root_logger.setLevel(level)

    if not root_logger.handlers:
        os.makedirs(log_dir, exist_ok=True)

        console_handler = logging.StreamHandler(sys.stdout)
        # Windows 控制台中文乱码
        if hasattr(sys.stdout, "reconfigure"):
            sys.stdout.reconfigure(encoding="utf-8")
        file_handler = logging.FileHandler(os.path.join(log_dir, log_file), encoding="utf-8")

        for handler in (console_handler, file_handler):
            handler.setFormatter(_formatter())
            handler.setLevel(level)
            root_logger.addHandler(handler)

    return root_logger


@contextmanager
def run_log(out_dir: Union[str, Path]) -> Iterator[Path]:
    """
    在 with 块内把根logger的输出追加到 <out_dir>/run.log

    Yields:
        Path: run.log 路径
    """
    path = Path(out_dir) / RUN_LOG_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(path, encoding="utf-8")
    handler.setFormatter(_formatter())
    root_logger = logging.getLogger()
    root_logger.addHandler(handler)
    try:
        yield path
    finally:
        root_logger.removeHandler(handler)
        handler.close()
