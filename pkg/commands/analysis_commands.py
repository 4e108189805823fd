"""
分析命令模块
Analysis Commands Module

tune / compare / report：网格调参、算法比较与 Markdown 报告
"""

import os
import math
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from classifiers import ALGORITHM_NAMES, PAPER_OPTIMAL_PRESETS, ClassifierParams, create_classifier
from metrics import METRIC_NAMES
from tuner import CheckpointStore, CorpusEntry, compare_algorithms, corpus_key, load_grid, run_grid
from utils.config import Settings
from utils.errors import SessionFormatError, UsageError
from utils.io_utils import atomic_output_dir, config_hash, ensure_writable_parent, read_json, write_frame, write_json
from .common import discover_sessions, load_corpus, run_config, write_manifest
from .pipeline_commands import write_report_tables

logger = logging.getLogger(__name__)

CHECKPOINT_SUFFIX = ".checkpoints"


def _corpus_entries(input_dir: Path, settings: Settings) -> List[CorpusEntry]:
    sessions = load_corpus(discover_sessions(input_dir), settings)
    return [CorpusEntry.from_session(s) for s in sessions]


def cmd_tune(args: Any, settings: Settings) -> Path:
    """
    在会话语料上对一个算法做网格搜索

    输出 table.csv（每个组合 × 会话一行）、summary.csv（每个组合一行）与 best.json。
    检查点写在输出目录之外，中断后以相同参数重跑会跳过已完成的组合。

    Args:
        args: 命令行参数（algo, grid, z_threshold, checkpoint_dir, format, input, output）
        settings: 运行设置

    Returns:
        Path: 输出目录
    """
    algorithm = create_classifier(args.algo).name
    grid = load_grid(args.grid)
    ensure_writable_parent(args.output)
    corpus = _corpus_entries(Path(args.input), settings)

    checkpoint_dir = args.checkpoint_dir or f"{Path(args.output)}{CHECKPOINT_SUFFIX}"
    store = CheckpointStore(checkpoint_dir,
                            run_key=corpus_key(corpus, algorithm, settings.merge_mode, settings.fqns_clip))
    config = run_config(args, exclude=("workers", "func", "output", "checkpoint_dir"))
    config["grid"] = grid.to_dict()
    run_id = config_hash(config)[:12]

    result = run_grid(corpus, algorithm, grid, workers=settings.workers, merge_mode=settings.merge_mode,
                      fqns_clip=settings.fqns_clip, checkpoint=store, run_id=run_id,
                      z_threshold=args.z_threshold)
    for index, error in sorted(result.errors.items()):
        logger.warning(f"⚠️ 参数组合 {result.params[index].as_dict()} 失败: {error}")

    with atomic_output_dir(args.output) as staging:
        table = result.table()
        if args.format == "json":
            write_json(staging / "table.json", table.to_dict(orient="records"))
        else:
            write_frame(staging / "table.csv", table)
        write_frame(staging / "summary.csv", result.summary_frame())
        write_json(staging / "best.json", result.summary())
        write_manifest(staging, "tune", config, settings)
    logger.info(f"检查点保留在 {checkpoint_dir}（{store.count()} 个组合）")
    return Path(args.output)


def tuned_params(directory: Path) -> Dict[str, ClassifierParams]:
    """读取 tune 输出目录 best.json 中的最优参数"""
    best_path = directory / "best.json"
    if not best_path.exists():
        raise UsageError(f"调参目录 {directory} 中没有 best.json")
    summary = read_json(best_path)
    best = summary.get("best")
    if not best:
        raise SessionFormatError(f"调参目录 {directory} 没有可用的最优组合")
    name = create_classifier(summary["algorithm"]).name
    fields = {
        "velocity_threshold": best.get("velocity"),
        "min_fixation_duration": best.get("duration"),
        "dispersion_threshold": best.get("dispersion"),
    }
    if best.get("z_threshold") is not None:
        fields["z_outlier_threshold"] = best["z_threshold"]
    return {name: ClassifierParams(**{k: v for k, v in fields.items() if v is not None})}


def cmd_compare(args: Any, settings: Settings) -> Path:
    """
    多个算法在同一语料上运行，结果在并集上归一化，输出算法 × 指标与任务 × 指标表

    Args:
        args: 命令行参数（algos, tuned 调参目录列表, format, input, output）
        settings: 运行设置

    Returns:
        Path: 输出目录
    """
    param_sets: Dict[str, ClassifierParams] = {}
    for name in args.algos or ALGORITHM_NAMES:
        info = create_classifier(name)
        param_sets[info.name] = PAPER_OPTIMAL_PRESETS[info.name]
    for directory in args.tuned or []:
        param_sets.update(tuned_params(Path(directory)))
    ensure_writable_parent(args.output)
    corpus = _corpus_entries(Path(args.input), settings)

    config = run_config(args)
    config["params"] = {name: params.as_dict() for name, params in param_sets.items()}
    reports = compare_algorithms(corpus, param_sets, workers=settings.workers, merge_mode=settings.merge_mode,
                                 fqns_clip=settings.fqns_clip, run_id=config_hash(config)[:12])
    with atomic_output_dir(args.output) as staging:
        write_report_tables(staging, reports, args.format)
        write_manifest(staging, "compare", config, settings)
    return Path(args.output)


def _cell(value: Any) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


def markdown_table(frame: pd.DataFrame, columns: Optional[Sequence[str]] = None) -> str:
    """DataFrame → GitHub 风格的 Markdown 表格"""
    columns = list(columns or frame.columns)
    lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
    for row in frame[columns].itertuples(index=False):
        lines.append("| " + " | ".join(_cell(v) for v in row) + " |")
    return "\n".join(lines)


def render_tune_report(summary: Dict[str, Any], table: pd.DataFrame, top: int = 10) -> str:
    """
    把调参结果渲染为 Markdown

    Args:
        summary: best.json 内容
        table: summary.csv 内容（每个组合一行）
        top: 列出的最优组合个数

    Returns:
        str: Markdown 文本
    """
    algorithm = summary.get("algorithm", "")
    lines = [f"# {algorithm} 网格搜索报告", ""]
    lines.append(f"- 运行标识: `{summary.get('run_id', '')}`")
    lines.append(f"- 参数组合: {summary.get('combos', len(table))}，失败: {summary.get('failed_combos', 0)}")
    best = summary.get("best")
    if best:
        described = ", ".join(f"{k}={_cell(v)}" for k, v in best.items() if v is not None and k != "mean_overall")
        lines.append(f"- 最优组合: {described}（平均 Overall {_cell(best.get('mean_overall'))}）")
    else:
        lines.append("- 最优组合: 无（所有组合均失败）")
    constant = summary.get("normalization", {}).get("constant_metrics") or []
    if constant:
        lines.append(f"- 取值恒定、归一化为 0 的指标: {', '.join(constant)}")
    lines.append("")

    ranked = table.dropna(subset=["overall"]).sort_values("overall", kind="mergesort").head(top)
    lines += [f"## 平均 Overall 最低的 {len(ranked)} 个组合", ""]
    lines += [markdown_table(ranked, ["velocity", "duration", "dispersion", *METRIC_NAMES, "overall"]), ""]

    # 每个维度上的边际均值，对应阈值-得分曲线
    for dimension in ("velocity", "duration", "dispersion"):
        if table[dimension].isna().all():
            continue
        marginal = (table.dropna(subset=["overall"]).groupby(dimension, sort=True)["overall"]
                    .mean().reset_index())
        lines += [f"## 按 {dimension} 的平均 Overall", "", markdown_table(marginal), ""]

    failed = table[table["error"].fillna("") != ""]
    if len(failed):
        lines += ["## 失败的组合", "", markdown_table(failed, ["velocity", "duration", "dispersion", "error"]), ""]
    return "\n".join(lines)


def cmd_report(args: Any, settings: Settings) -> Path:
    """
    由 tune 输出目录生成 Markdown 报告

    Args:
        args: 命令行参数（input 调参目录, output Markdown 文件, top）
        settings: 运行设置

    Returns:
        Path: 报告文件
    """
    directory = Path(args.input)
    summary_path = directory / "summary.csv"
    best_path = directory / "best.json"
    if not (summary_path.exists() and best_path.exists()):
        raise UsageError(f"{directory} 不是调参输出目录（需要 summary.csv 与 best.json）")
    table = pd.read_csv(summary_path, keep_default_na=True)
    text = render_tune_report(read_json(best_path), table, top=args.top)

    target = Path(args.output)
    ensure_writable_parent(target)
    staging = target.with_name(f".{target.name}.tmp")
    with open(staging, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
        f.write("\n")
    os.replace(staging, target)
    logger.info(f"报告已保存到: {target}")
    return target
