# -*- coding: utf-8 -*-
"""
配置管理模块

- 运行时配置：从 .env / 环境变量读取日志级别、日志目录、数据集根目录等
- 流水线配置：扁平的分节键值文件（如 augment.k = 0.2），覆盖 desk / paper 两套默认值
"""

import dataclasses
import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union, get_args, get_origin, get_type_hints

from dotenv import dotenv_values, load_dotenv

project_root = Path(__file__).parent
env_file = project_root / ".env"

# 运行时配置容器（热更新时就地更新）
RUNTIME_CONFIG: Dict[str, Any] = {}

PROFILES = ("desk", "paper")
SYNTHETIC_SOURCES = ("blobs", "rings")
IMAGE_SOURCES = ("fmnist", "cifar10")

# 各数据集默认正类（原始类别编号）
DEFAULT_POSITIVE_CLASSES = {
    "fmnist": (0, 2, 4, 6),
    "cifar10": (0, 1, 8, 9),
    "blobs": (1,),
    "rings": (1,),
}


def _get_int_env(name: str, default: int) -> int:
    """安全读取整数环境变量"""
    try:
        return int(os.getenv(name, str(default)))
    except (TypeError, ValueError):
        return default


def _load_env() -> None:
    if env_file.exists():
        load_dotenv(env_file, override=True)


def reload_config() -> None:
    """热更新运行时配置（就地更新配置字典）"""
    _load_env()

    RUNTIME_CONFIG.clear()
    RUNTIME_CONFIG.update(
        {
            "log_level": os.getenv("DENSPU_LOG_LEVEL", "INFO"),
            "log_dir": os.getenv("DENSPU_LOG_DIR", "log"),
            "data_root": os.getenv("DENSPU_DATA_ROOT", str(project_root / "data")),
            "n_jobs": _get_int_env("DENSPU_N_JOBS", 1),
        }
    )


def get_config_status() -> dict:
    """获取配置状态，用于诊断"""
    data_root = Path(RUNTIME_CONFIG["data_root"])
    return {
        "env_file_exists": env_file.exists(),
        "data_root_exists": data_root.exists(),
        "fmnist_available": (data_root / "fashion-mnist").exists(),
        "cifar10_available": (data_root / "cifar-10-batches-bin").exists(),
    }


# ---------------------------------------------------------------------------
# 流水线配置
# ---------------------------------------------------------------------------


@dataclass
class DatasetConfig:
    """数据集与 PU 划分"""

    source: str = "fmnist"
    root: str = ""
    # 为空时使用 DEFAULT_POSITIVE_CLASSES
    positive_class_ids: Tuple[int, ...] = ()
    n_labeled: int = 1000
    # 0 表示不下采样
    max_unlabeled: int = 0
    # 为空时保持原始尺寸，例如 32,32,3
    target_shape: Tuple[int, ...] = ()
    # 以下仅用于玩具数据
    n_unlabeled: int = 1000
    n_test: int = 1000
    unlabeled_positive_fraction: float = 0.5
    noise: float = 0.5

    def resolved_positive_classes(self) -> Tuple[int, ...]:
        return self.positive_class_ids or DEFAULT_POSITIVE_CLASSES[self.source]

    @property
    def synthetic(self) -> bool:
        return self.source in SYNTHETIC_SOURCES


@dataclass
class AutoencoderConfig:
    """自编码器结构与训练参数"""

    # auto: 二维玩具数据用全连接，图像用卷积
    kind: str = "auto"
    filters: Tuple[int, ...] = (64, 32, 8)
    hidden: Tuple[int, ...] = (16,)
    latent_dim: int = 512
    latent_activation: str = "relu"
    epochs: int = 50
    batch_size: int = 64
    learning_rate: float = 1e-4
    weight_decay: float = 1e-3


@dataclass
class AugmentConfig:
    """潜空间加密增强"""

    # dens | mixup | dens-latent | none
    mode: str = "dens"
    k: float = 0.2
    # 0 表示按 16·|P_L| 自动确定
    n_pairs: int = 16000
    samples_per_pair: int = 11
    mixup_alpha: float = 0.4


@dataclass
class ForestConfig:
    """孤立森林"""

    n_trees: int = 1000
    subsample_size: int = 256
    # None 表示按 |Z_L| / (n_pairs·s) 计算
    contamination: Optional[float] = None
    n_jobs: int = 1


@dataclass
class SelectionConfig:
    """反例挑选"""

    # anomaly | random_leftovers | random_unlabeled
    strategy: str = "anomaly"
    # forest_score | min_distance
    rank_mode: str = "forest_score"
    # match_positives | all_leftovers | random_count
    population: str = "match_positives"


@dataclass
class ClassifierConfig:
    """最终二分类器"""

    kind: str = "auto"
    # images | encodings
    input: str = "images"
    filters: Tuple[int, ...] = (16, 32)
    hidden: Tuple[int, ...] = (32,)
    head_units: int = 128
    optimizer: str = "sgd"
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 1e-4
    weight_decay: float = 1e-3
    momentum: float = 0.0
    patience: int = 10
    min_delta: float = 1e-4


@dataclass
class PipelineConfig:
    """一次完整运行的全部配置"""

    seed: int = 0
    profile: str = "desk"
    out_dir: str = "runs/default"
    variant: str = "dens-pu"
    repeats: int = 3
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    autoencoder: AutoencoderConfig = field(default_factory=AutoencoderConfig)
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    forest: ForestConfig = field(default_factory=ForestConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)

    def replace(self, **changes: Any) -> "PipelineConfig":
        """
        复制配置并修改字段，支持 "augment.mode" 这样的分节键

        Args:
            changes: 键为字段名或 "分节.字段"（点号用双下划线代替也可）
        """
        flat = {key.replace("__", "."): value for key, value in changes.items()}
        copy = dataclasses.replace(
            self,
            **{
                name: dataclasses.replace(getattr(self, name))
                for name in SECTIONS
            },
        )
        for key, value in flat.items():
            _set_value(copy, key, value, coerce=False)
        return copy


SECTIONS = ("dataset", "autoencoder", "augment", "forest", "selection", "classifier")
# 不参与配置哈希的键
_UNHASHED_KEYS = ("out_dir", "forest.n_jobs")


def profile_defaults(profile: str = "desk", source: str = "fmnist") -> PipelineConfig:
    """
    返回指定规模的默认配置

    Args:
        profile: desk（单机可复现的缩小规模）或 paper（原始实验规模）
        source: 数据来源，玩具数据在 desk 规模下使用更小的网络

    Returns:
        PipelineConfig: 默认配置
    """
    if profile not in PROFILES:
        raise ValueError(f"未知的规模配置: {profile}, 可选 {PROFILES}")

    config = PipelineConfig(profile=profile)
    config.dataset.source = source
    config.forest.n_jobs = RUNTIME_CONFIG.get("n_jobs", 1)
    if profile == "paper":
        if source == "fmnist":
            config.dataset.target_shape = (32, 32, 3)
        return config

    # desk: U 不超过6000、配对数 16·|P_L|、200棵树
    config.dataset.max_unlabeled = 6000
    config.autoencoder.filters = (32, 16, 8)
    config.autoencoder.latent_dim = 64
    config.autoencoder.epochs = 20
    config.autoencoder.learning_rate = 1e-3
    config.autoencoder.weight_decay = 1e-5
    config.augment.n_pairs = 0
    config.forest.n_trees = 200
    config.classifier.epochs = 60
    config.classifier.learning_rate = 1e-2
    config.classifier.momentum = 0.9
    config.classifier.weight_decay = 1e-4

    if source in SYNTHETIC_SOURCES:
        config.dataset.n_labeled = 100
        config.autoencoder.latent_dim = 8
        config.autoencoder.latent_activation = "identity"
        config.autoencoder.epochs = 200
        config.autoencoder.batch_size = 32
        config.autoencoder.learning_rate = 5e-3
        config.classifier.epochs = 200
    return config


def _coerce(value: Any, annotation: Any) -> Any:
    """把字符串值转换为字段声明的类型"""
    origin = get_origin(annotation)
    args = get_args(annotation)
    if origin is Union:
        inner = [a for a in args if a is not type(None)][0]
        if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none", "null")):
            return None
        return _coerce(value, inner)
    if origin in (tuple, Tuple):
        if isinstance(value, (tuple, list)):
            items = list(value)
        else:
            text = "" if value is None else str(value).strip()
            items = [item.strip() for item in text.split(",") if item.strip()]
        return tuple(_coerce(item, args[0]) for item in items)
    if annotation is bool:
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"无法解析布尔值: {value}")
    if annotation is int:
        if isinstance(value, str):
            value = value.strip()
        return int(value)
    if annotation is float:
        return float(value)
    return "" if value is None else str(value).strip()


def _set_value(config: PipelineConfig, key: str, value: Any, coerce: bool = True) -> None:
    parts = key.split(".")
    if len(parts) == 1:
        target, name = config, parts[0]
        if name in SECTIONS:
            raise ValueError(f"{name} 是分节名，不能直接赋值")
    elif len(parts) == 2 and parts[0] in SECTIONS:
        target, name = getattr(config, parts[0]), parts[1]
    else:
        raise ValueError(f"无法识别的配置键: {key}")

    hints = get_type_hints(type(target))
    if name not in hints:
        raise ValueError(f"未知的配置项: {key}")
    if coerce or isinstance(value, str):
        try:
            value = _coerce(value, hints[name])
        except (TypeError, ValueError) as e:
            raise ValueError(f"配置项 {key} 的值无效: {value!r} ({e})") from e
    setattr(target, name, value)


def load_pipeline_config(
    path: Optional[Union[str, Path]] = None,
    profile: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> PipelineConfig:
    """
    读取流水线配置

    优先级：overrides > 配置文件 > 规模默认值；规模本身取 profile 参数 > 文件中的 profile > desk

    Args:
        path: 配置文件路径（扁平键值格式），为 None 时只使用默认值
        profile: 规模名称
        overrides: 额外覆盖项，例如 {"seed": 3, "out_dir": "runs/x"}

    Returns:
        PipelineConfig: 合并后的配置
    """
    values: Dict[str, Optional[str]] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"配置文件不存在: {path}")
        values = dict(dotenv_values(path))

    overrides = {key.replace("__", "."): value for key, value in (overrides or {}).items()}
    chosen_profile = profile or values.get("profile") or "desk"
    source = str(overrides.get("dataset.source") or values.get("dataset.source") or "fmnist").strip()
    config = profile_defaults(chosen_profile.strip(), source)

    for key, value in values.items():
        if key == "profile":
            continue
        _set_value(config, key, value)
    for key, value in overrides.items():
        if value is not None:
            _set_value(config, key, value)
    validate_pipeline_config(config)
    return config


def validate_pipeline_config(config: PipelineConfig) -> None:
    """检查取值范围，违反时抛出 ValueError"""
    choices = {
        "dataset.source": (config.dataset.source, IMAGE_SOURCES + SYNTHETIC_SOURCES),
        "autoencoder.kind": (config.autoencoder.kind, ("auto", "conv", "dense")),
        "augment.mode": (config.augment.mode, ("dens", "mixup", "dens-latent", "none")),
        "selection.strategy": (config.selection.strategy, ("anomaly", "random_leftovers", "random_unlabeled")),
        "selection.rank_mode": (config.selection.rank_mode, ("forest_score", "min_distance")),
        "selection.population": (config.selection.population, ("match_positives", "all_leftovers", "random_count")),
        "classifier.kind": (config.classifier.kind, ("auto", "conv", "dense")),
        "classifier.input": (config.classifier.input, ("images", "encodings")),
        "classifier.optimizer": (config.classifier.optimizer, ("sgd", "adam")),
    }
    for key, (value, allowed) in choices.items():
        if value not in allowed:
            raise ValueError(f"{key}={value!r} 无效，可选 {allowed}")
    if not 0.0 < config.augment.k < 1.0:
        raise ValueError(f"augment.k 必须在(0,1)内: {config.augment.k}")
    if config.augment.samples_per_pair < 1:
        raise ValueError("augment.samples_per_pair 至少为1")
    if config.forest.subsample_size < 2:
        raise ValueError("forest.subsample_size 至少为2")
    if config.forest.contamination is not None and not 0.0 <= config.forest.contamination < 1.0:
        raise ValueError("forest.contamination 必须在[0,1)内")
    if config.repeats < 1:
        raise ValueError("repeats 至少为1")


def _format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_to_flat(config: PipelineConfig) -> Dict[str, str]:
    """展开为 "分节.字段" -> 字符串 的有序字典"""
    flat: Dict[str, str] = {}
    for f in dataclasses.fields(config):
        if f.name in SECTIONS:
            section = getattr(config, f.name)
            for sf in dataclasses.fields(section):
                flat[f"{f.name}.{sf.name}"] = _format_value(getattr(section, sf.name))
        else:
            flat[f.name] = _format_value(getattr(config, f.name))
    return flat


def config_to_text(config: PipelineConfig, include_unhashed: bool = True) -> str:
    lines = []
    for key, value in config_to_flat(config).items():
        if not include_unhashed and key in _UNHASHED_KEYS:
            continue
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def save_pipeline_config(config: PipelineConfig, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(config_to_text(config))


def config_hash(config: PipelineConfig) -> str:
    """配置哈希（不含输出目录和并行数），用于报告溯源"""
    text = config_to_text(config, include_unhashed=False)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


reload_config()


if __name__ == "__main__":
    status = get_config_status()
    print("配置状态检查:")
    for key, value in status.items():
        mark = "OK" if value else "NO"
        print(f"  [{mark}] {key}: {value}")
    print("\n运行时配置:")
    for key, value in RUNTIME_CONFIG.items():
        print(f"  {key}: {value}")
