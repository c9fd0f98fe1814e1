# -*- coding: utf-8 -*-
"""
Dens-PU 主程序

统一的项目入口：逐阶段子命令、一次性流水线、消融实验和重建质量实验
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

# 添加项目根目录到Python路径
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from config import PROFILES, RUNTIME_CONFIG, config_hash, get_config_status, load_pipeline_config

# 导入核心模块
from core import DensPUError, configure_logging

# 导入服务模块
from services.pipeline import STAGES, SWEEPS, AblationRunner, PipelineService, PSNRExperiment


class DensPUApp:
    """Dens-PU 命令行应用

    负责日志初始化、配置加载，并把子命令分派给流水线服务
    """

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.logger = configure_logging(
            level=args.log_level or RUNTIME_CONFIG["log_level"],
            log_dir=RUNTIME_CONFIG["log_dir"],
        )
        self._log_config_status(get_config_status())

        overrides = {"seed": args.seed, "out_dir": args.out}
        for item in args.set or []:
            key, _, value = item.partition("=")
            overrides[key.strip()] = value.strip()
        self.config = load_pipeline_config(args.config, profile=args.profile, overrides=overrides)
        self.logger.info(
            f"配置: profile={self.config.profile}, dataset={self.config.dataset.source}, "
            f"seed={self.config.seed}, out={self.config.out_dir}, hash={config_hash(self.config)}"
        )

    def _log_config_status(self, status: dict):
        """记录配置状态"""
        self.logger.info("配置状态检查:")
        for key, value in status.items():
            mark = "OK" if value else "NO"
            self.logger.info(f"  [{mark}] {key}: {value}")

    def run(self) -> int:
        command = self.args.command
        if command in STAGES:
            PipelineService(self.config).run_stage(command)
        elif command == "pipeline":
            report = PipelineService(self.config).run()
            print(report.metrics_frame().to_string(index=False))
        elif command == "ablation":
            summary = AblationRunner(self.config).run(self.args.sweep)
            columns = ["cell", "f1_mean", "f1_std", "auc_mean", "purity_mean", "repeats"]
            print(summary[[c for c in columns if c in summary.columns]].to_string(index=False))
        elif command == "psnr-experiment":
            result = PSNRExperiment(self.config).run()
            for key, value in result.to_dict().items():
                print(f"{key}: {value}")
        return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Dens-PU: 基于潜空间加密与孤立森林的正样本-无标注学习")
    parser.add_argument("--config", type=str, default=None, help="流水线配置文件（扁平键值格式）")
    parser.add_argument("--seed", type=int, default=None, help="随机种子，覆盖配置文件")
    parser.add_argument("--out", type=str, default=None, help="输出目录，覆盖配置文件")
    parser.add_argument("--profile", choices=PROFILES, default=None, help="默认值规模: desk(默认) 或 paper")
    parser.add_argument("--log-level", type=str, default=None, help="日志级别，默认取 DENSPU_LOG_LEVEL")
    parser.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="覆盖单个配置项，例如 --set augment.k=0.3，可重复",
    )

    subparsers = parser.add_subparsers(dest="command", required=True)
    stage_help = {
        "prepare-data": "读取数据并构造 PU 划分",
        "train-cae": "在 P_L 上训练自编码器",
        "encode": "编码 P_L、U 和测试集",
        "densify": "在正样本编码之间插值生成嵌入",
        "detect": "拟合孤立森林并划分 U",
        "select-negatives": "对剩余样本排序并挑选反例",
        "train-classifier": "在 P_L 与反例上训练分类器",
        "evaluate": "在测试集上评估并写出报告",
    }
    for stage in STAGES:
        subparsers.add_parser(stage, help=stage_help[stage])
    subparsers.add_parser("pipeline", help="按顺序执行全部阶段")
    ablation = subparsers.add_parser("ablation", help="消融实验")
    ablation.add_argument("--sweep", choices=SWEEPS, required=True, help="扫描类型")
    subparsers.add_parser("psnr-experiment", help="正负样本重建 PSNR 分布对比")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """主函数 - 项目统一入口"""
    args = build_parser().parse_args(argv)
    try:
        app = DensPUApp(args)
        return app.run()
    except (DensPUError, ValueError, FileNotFoundError) as e:
        print(f"运行失败: {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        print("\n收到中断信号，已停止")
        return 130


if __name__ == "__main__":
    sys.exit(main())
