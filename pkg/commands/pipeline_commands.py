"""
流水线命令模块
Pipeline Commands Module

simulate / classify / evaluate 三个命令：生成语料、分类会话、计算指标
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from classifiers import (
    LabeledStream,
    build_params,
    classify,
    create_classifier,
    read_classification,
    write_fixations_csv,
    write_labels_csv,
)
from ingest import load_session
from metrics import (
    MetricReport,
    aggregate_reports,
    evaluate_session,
    format_mean_std,
    long_format_series,
    normalize_reports,
    reports_frame,
)
from protocol import save_protocol
from simulator import SimulationConfig, oracle_stream, plan_corpus, read_ground_truth, simulate_planned, write_ground_truth
from utils.config import Settings
from utils.errors import SessionFormatError, UsageError
from utils.io_utils import atomic_output_dir, config_hash, read_json, write_frame, write_json
from utils.parallel_utils import ProgressReporter, run_ordered
from .common import MANIFEST_NAME, discover_sessions, run_config, write_manifest

logger = logging.getLogger(__name__)

TRUTH_SUFFIX = ".truth.csv"
FIXATIONS_SUFFIX = ".fixations.csv"
LABELS_SUFFIX = ".labels.csv"
ORACLE_SOURCE = "oracle"


def _simulate_one(task: Tuple[Any, SimulationConfig, Dict[str, Any]]):
    plan, config, protocol_options = task
    return simulate_planned(plan, config, protocol_options)


def cmd_simulate(args: Any, settings: Settings) -> Path:
    """
    生成带种子的仿真语料：每个会话一个CSV、协议JSON与真值CSV

    Args:
        args: 命令行参数（task, sessions, seed, 仿真与协议选项, output）
        settings: 运行设置

    Returns:
        Path: 输出目录
    """
    config = SimulationConfig(
        sample_rate=args.sample_rate,
        rate_jitter=args.rate_jitter,
        angular_noise_sigma=args.noise_sigma,
        noise_correlation_ms=args.noise_correlation,
        saccadic_latency=args.latency,
        blink_rate=args.blink_rate,
        blink_duration=args.blink_duration,
        far_miss_rate=args.far_miss_rate,
    )
    protocol_options = {"n_targets": args.n_targets, "dwell": args.dwell, "sphere_radius": args.sphere_radius}
    plans = plan_corpus(args.task, args.sessions, args.seed)
    logger.info(f"🧪 仿真 {len(plans)} 个会话（任务 {args.task}，种子 {args.seed}）")

    with atomic_output_dir(args.output) as staging:
        def write_one(index: int, result) -> None:
            protocol, frame, truth = result
            session_id = plans[index].session_id
            write_frame(staging / f"{session_id}.csv", frame)
            save_protocol(protocol, staging / f"{session_id}.protocol.json")
            write_ground_truth(staging / f"{session_id}{TRUTH_SUFFIX}", truth)

        run_ordered(_simulate_one, [(plan, config, protocol_options) for plan in plans],
                    workers=settings.workers, progress=ProgressReporter(len(plans), "仿真会话"),
                    on_result=write_one)
        write_manifest(staging, "simulate", run_config(args), settings)
    return Path(args.output)


def _classify_one(task: Tuple[str, str, Any, str, float]) -> LabeledStream:
    path, algorithm, params, merge_mode, velocity_constant = task
    session = load_session(path, velocity_constant=velocity_constant)
    return classify(algorithm, session, params, merge_mode=merge_mode)


def cmd_classify(args: Any, settings: Settings) -> Path:
    """
    对目录中的每个会话运行一个分类器，输出注视CSV与逐样本标注CSV

    Args:
        args: 命令行参数（algo, 阈值或 preset, input, output）
        settings: 运行设置

    Returns:
        Path: 输出目录
    """
    params = build_params(args.algo, velocity=args.velocity, duration=args.duration,
                          dispersion=args.dispersion, z_threshold=args.z_threshold, preset=args.preset)
    paths = discover_sessions(args.input)
    logger.info(f"🔬 {args.algo} 分类 {len(paths)} 个会话，参数 {params.as_dict()}")

    with atomic_output_dir(args.output) as staging:
        def write_one(index: int, stream: LabeledStream) -> None:
            stem = paths[index].stem
            write_fixations_csv(staging / f"{stem}{FIXATIONS_SUFFIX}", stream)
            write_labels_csv(staging / f"{stem}{LABELS_SUFFIX}", stream)

        tasks = [(str(p), args.algo, params, settings.merge_mode, settings.velocity_constant) for p in paths]
        run_ordered(_classify_one, tasks, workers=settings.workers,
                    progress=ProgressReporter(len(tasks), f"{args.algo} 分类"), on_result=write_one)
        config = run_config(args, exclude=("workers", "func", "output", "input"))
        config["algo"] = create_classifier(args.algo).name
        config["params"] = params.as_dict()
        write_manifest(staging, "classify", config, settings)
    return Path(args.output)


def classification_source(directory: Path) -> Tuple[str, Optional[Dict[str, float]]]:
    """从分类输出目录的清单中读取算法名与参数；没有清单时以目录名作算法名"""
    manifest = directory / MANIFEST_NAME
    if not manifest.exists():
        logger.warning(f"⚠️ 分类目录 {directory} 没有 {MANIFEST_NAME}，以目录名作为算法名")
        return directory.name, None
    config = read_json(manifest).get("config", {})
    return config.get("algo", directory.name), config.get("params")


def _evaluate_one(task: Tuple[str, List[Tuple[str, Optional[str], Optional[Dict[str, float]]]], float, bool]
                  ) -> List[MetricReport]:
    path, sources, velocity_constant, clip = task
    session = load_session(path, velocity_constant=velocity_constant)
    session_path = Path(path)
    reports = []
    for algorithm, directory, params in sources:
        if directory is None:
            truth_path = session_path.with_name(session_path.stem + TRUTH_SUFFIX)
            if not truth_path.exists():
                raise SessionFormatError(f"会话 {session.session_id} 缺少真值文件 {truth_path.name}")
            stream = oracle_stream(read_ground_truth(truth_path), session)
        else:
            fixations_path = Path(directory) / f"{session_path.stem}{FIXATIONS_SUFFIX}"
            labels_path = Path(directory) / f"{session_path.stem}{LABELS_SUFFIX}"
            if not (fixations_path.exists() and labels_path.exists()):
                raise SessionFormatError(f"目录 {directory} 中缺少会话 {session.session_id} 的分类结果")
            stream = read_classification(fixations_path, labels_path, algorithm=algorithm)
        report = evaluate_session(session, stream, clip=clip)
        if params:
            report.params = dict(params)
        reports.append(report)
    return reports


def write_report_tables(staging: Path, reports: Sequence[MetricReport], output_format: str) -> None:
    """逐会话报告、均值±标准差汇总与长格式序列"""
    if output_format == "json":
        for report in reports:
            folder = staging / "reports" / report.algorithm
            folder.mkdir(parents=True, exist_ok=True)
            write_json(folder / f"{report.session_id}.json", report.to_dict())
    else:
        write_frame(staging / "reports.csv", reports_frame(reports))

    by_algorithm = aggregate_reports(reports, by=("algorithm",))
    by_task = aggregate_reports(reports, by=("algorithm", "task"))
    write_frame(staging / "aggregate.csv", by_algorithm)
    write_frame(staging / "aggregate_by_task.csv", by_task)
    write_frame(staging / "aggregate_raw.csv", aggregate_reports(reports, by=("algorithm",), normalized=False))
    write_frame(staging / "algorithm_table.csv", format_mean_std(by_algorithm))
    write_frame(staging / "task_table.csv", format_mean_std(by_task))
    write_frame(staging / "series.csv", long_format_series(reports))


def cmd_evaluate(args: Any, settings: Settings) -> Path:
    """
    按分类结果计算指标，在本次运行的全部结果上归一化

    Args:
        args: 命令行参数（input 会话目录, classified 分类目录列表, oracle, format, output）
        settings: 运行设置

    Returns:
        Path: 输出目录
    """
    sources: List[Tuple[str, Optional[str], Optional[Dict[str, float]]]] = []
    for directory in args.classified or []:
        directory = Path(directory)
        if not directory.is_dir():
            raise UsageError(f"分类目录不存在: {directory}")
        algorithm, params = classification_source(directory)
        sources.append((algorithm, str(directory), params))
    if args.oracle:
        sources.append((ORACLE_SOURCE, None, None))
    if not sources:
        raise UsageError("至少需要一个 --classified 目录或 --oracle")
    names = [name for name, _, _ in sources]
    if len(set(names)) != len(names):
        raise UsageError(f"分类来源的算法名重复: {names}")

    paths = discover_sessions(args.input)
    logger.info(f"📊 评价 {len(paths)} 个会话 × {len(sources)} 个分类来源")
    with atomic_output_dir(args.output) as staging:
        tasks = [(str(p), sources, settings.velocity_constant, settings.fqns_clip) for p in paths]
        per_session = run_ordered(_evaluate_one, tasks, workers=settings.workers,
                                  progress=ProgressReporter(len(tasks), "评价会话"))
        # 按 (来源, 会话) 排列后归一化
        ordered = [per_session[s][k] for k in range(len(sources)) for s in range(len(paths))]
        config = run_config(args)
        reports = normalize_reports(ordered, run_id=config_hash(config)[:12])
        write_report_tables(staging, reports, args.format)
        write_manifest(staging, "evaluate", config, settings)
    return Path(args.output)
