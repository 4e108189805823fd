"""
VR眼动事件检测工具主程序
VR Gaze Event Toolkit Main Program

命令行入口：仿真语料、分类注视/扫视、计算指标、网格调参、算法比较与报告

使用方法：
    python main.py simulate out/corpus --task both --sessions 100 --seed 7
    python main.py classify out/corpus out/mivdt --algo mivdt --preset paper-optimal
    python main.py evaluate out/corpus out/eval --classified out/mivdt
    python main.py tune out/corpus out/tune-ivdt --algo ivdt --grid default --workers 8
    python main.py compare out/corpus out/compare
    python main.py report out/tune-ivdt out/tune-ivdt.md

退出码：0 成功，1 用法错误，2 数据错误，3 内部错误
"""

import sys
import logging
import argparse
from typing import List, Optional

from commands import cmd_classify, cmd_compare, cmd_evaluate, cmd_report, cmd_simulate, cmd_tune
from simulator import TASK_CHOICES
from utils.config import MERGE_MODES, TOOL_VERSION, VELOCITY_CONSTANTS, load_environment, load_settings, setup_logging
from utils.errors import GazeToolkitError, UsageError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DATA_ERROR = 2
EXIT_INTERNAL_ERROR = 3


class ToolkitArgumentParser(argparse.ArgumentParser):
    """参数错误抛出 UsageError，由 main 统一映射退出码"""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--workers", type=int, default=None,
                        help="进程数（默认取 GAZE_EVENTS_WORKERS，未设置时为 1）")
    parent.add_argument("--velocity-constant", choices=sorted(VELOCITY_CONSTANTS), default=None,
                        help="角速度换算常数（默认取 GAZE_EVENTS_VELOCITY_CONSTANT）")
    parent.add_argument("--merge-mode", choices=MERGE_MODES, default=None,
                        help="相邻注视组合并判据（默认取 GAZE_EVENTS_MERGE_MODE）")
    parent.add_argument("--fqns-clip", type=int, choices=(0, 1), default=None,
                        help="FQnS 只计入与目标停留窗口的重叠部分（默认取 GAZE_EVENTS_FQNS_CLIP）")
    return parent


def _threshold_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--algo", required=True, help="算法: ivt / idt / ivdt / mivdt")
    parser.add_argument("--velocity", type=float, default=None, help="速度阈值（度/秒）")
    parser.add_argument("--duration", type=float, default=None, help="最短注视时长（毫秒）")
    parser.add_argument("--dispersion", type=float, default=None, help="离散度阈值（度）")
    parser.add_argument("--z-threshold", type=float, default=None, help="m-IVDT 离群深度阈值（米）")
    parser.add_argument("--preset", choices=("paper-optimal",), default=None, help="使用预设阈值")


def build_parser() -> argparse.ArgumentParser:
    """构建命令行解析器"""
    parser = ToolkitArgumentParser(prog="main.py", description="VR 眼动注视/扫视检测与评价工具")
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    subparsers = parser.add_subparsers(dest="command", parser_class=ToolkitArgumentParser)
    common = _common_options()

    simulate = subparsers.add_parser("simulate", parents=[common], help="生成仿真会话语料")
    simulate.add_argument("output", help="输出目录")
    simulate.add_argument("--task", choices=TASK_CHOICES, default="single")
    simulate.add_argument("--sessions", type=int, default=100)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--n-targets", type=int, default=20)
    simulate.add_argument("--dwell", type=float, default=1500.0, help="每个目标的停留时长（毫秒）")
    simulate.add_argument("--sphere-radius", type=float, default=0.05, help="目标球半径（米）")
    simulate.add_argument("--sample-rate", type=float, default=120.0, help="采样率（Hz）")
    simulate.add_argument("--rate-jitter", type=float, default=0.1)
    simulate.add_argument("--noise-sigma", type=float, default=0.5, help="注视角度噪声标准差（度）")
    simulate.add_argument("--noise-correlation", type=float, default=50.0, help="噪声相关时间（毫秒）")
    simulate.add_argument("--latency", type=float, default=200.0, help="扫视潜伏期（毫秒）")
    simulate.add_argument("--blink-rate", type=float, default=0.0, help="每分钟眨眼次数")
    simulate.add_argument("--blink-duration", type=float, default=150.0)
    simulate.add_argument("--far-miss-rate", type=float, default=0.0, help="处于偏离平台的注视样本比例")
    simulate.set_defaults(func=cmd_simulate)

    classify = subparsers.add_parser("classify", parents=[common], help="对会话运行分类器")
    classify.add_argument("input", help="会话目录")
    classify.add_argument("output", help="输出目录")
    _threshold_options(classify)
    classify.set_defaults(func=cmd_classify)

    evaluate = subparsers.add_parser("evaluate", parents=[common], help="计算分类结果的指标")
    evaluate.add_argument("input", help="会话目录（含协议与真值文件）")
    evaluate.add_argument("output", help="输出目录")
    evaluate.add_argument("--classified", nargs="+", default=None, help="classify 的输出目录")
    evaluate.add_argument("--oracle", action="store_true", help="同时评价由真值构造的完美分类")
    evaluate.add_argument("--format", choices=("json", "csv"), default="csv")
    evaluate.set_defaults(func=cmd_evaluate)

    tune = subparsers.add_parser("tune", parents=[common], help="网格搜索阈值")
    tune.add_argument("input", help="会话目录")
    tune.add_argument("output", help="输出目录")
    tune.add_argument("--algo", required=True)
    tune.add_argument("--grid", default="default", help="default / default20 / 网格JSON文件")
    tune.add_argument("--z-threshold", type=float, default=4.9)
    tune.add_argument("--checkpoint-dir", default=None, help="检查点目录（默认 <output>.checkpoints）")
    tune.add_argument("--format", choices=("json", "csv"), default="csv")
    tune.set_defaults(func=cmd_tune)

    compare = subparsers.add_parser("compare", parents=[common], help="比较多个算法")
    compare.add_argument("input", help="会话目录")
    compare.add_argument("output", help="输出目录")
    compare.add_argument("--algos", nargs="+", default=None, help="参与比较的算法（默认全部，使用预设阈值）")
    compare.add_argument("--tuned", nargs="+", default=None, help="tune 输出目录，用其最优参数替换预设")
    compare.add_argument("--format", choices=("json", "csv"), default="csv")
    compare.set_defaults(func=cmd_compare)

    report = subparsers.add_parser("report", parents=[common], help="把调参结果渲染为 Markdown")
    report.add_argument("input", help="tune 输出目录")
    report.add_argument("output", help="Markdown 文件路径")
    report.add_argument("--top", type=int, default=10)
    report.set_defaults(func=cmd_report)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """
    解析参数并执行命令

    Args:
        argv: 命令行参数，缺省取 sys.argv[1:]

    Returns:
        int: 退出码
    """
    try:
        load_environment()
        args = build_parser().parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("需要指定命令: simulate / classify / evaluate / tune / compare / report")
        settings = load_settings(workers=args.workers,
                                 velocity_constant_name=args.velocity_constant,
                                 merge_mode=args.merge_mode,
                                 fqns_clip=None if args.fqns_clip is None else bool(args.fqns_clip))
        setup_logging(settings)
        result = args.func(args, settings)
        logger.info(f"✅ {args.command} 完成: {result}")
        return EXIT_OK
    except GazeToolkitError as e:
        logger.error(f"❌ {type(e).__name__}: {e.message}")
        return e.exit_code
    except OSError as e:
        logger.error(f"❌ 文件读写失败: {e}")
        return EXIT_DATA_ERROR
    except Exception as e:
        logger.exception(f"程序运行发生错误: {str(e)}")
        return EXIT_INTERNAL_ERROR


def main():
    """
    主函数
    """
    sys.exit(run())


if __name__ == "__main__":
    main()
