"""
网格搜索模块
Grid Search Module

对语料中每个会话、每个参数组合分类并计算指标，在整个运行上归一化后
按平均 Overall 选出最优参数
"""

import hashlib
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from classifiers import (
    ClassifierParams,
    GazeArrays,
    LabeledStream,
    as_gaze_arrays,
    classify,
    create_classifier,
    dispersion_groups,
    idt_stream,
    ivdt_stream,
    velocity_groups,
)
from classifiers.velocity_classifier import classify_ivt
from metrics import METRIC_NAMES, IdealValues, MetricReport, evaluate_session, normalize_reports
from protocol import StimulusProtocol, protocol_to_dict
from utils.errors import ContractError, GazeToolkitError
from utils.io_utils import config_hash
from utils.parallel_utils import ProgressReporter, run_ordered
from .checkpoint_store import CheckpointStore
from .grid import ParamGrid, enumerate_grid

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ["algorithm", "velocity", "duration", "dispersion", "session_id",
                 "fqns", "fqls", "fn", "afd", "sn", "asa", "sqns", "overall"]


@dataclass
class CorpusEntry:
    """调参用的轻量会话：只保留分类与评价需要的数组"""

    session_id: str
    protocol: StimulusProtocol
    arrays: GazeArrays
    positions: np.ndarray
    origins: np.ndarray
    ideals: IdealValues

    @classmethod
    def from_session(cls, session) -> "CorpusEntry":
        if session.protocol is None:
            raise ContractError(f"会话 {session.session_id} 没有对应的刺激协议，无法调参")
        return cls(session_id=session.session_id, protocol=session.protocol,
                   arrays=as_gaze_arrays(session), positions=session.positions, origins=session.origins,
                   ideals=IdealValues.for_protocol(session.protocol))


@dataclass
class TuneResult:
    algorithm: str
    params: List[ClassifierParams]
    reports: List[List[MetricReport]]
    mean_overall: List[Optional[float]]
    errors: Dict[int, str] = field(default_factory=dict)
    best_index: int = -1
    run_id: str = ""

    @property
    def best_params(self) -> Optional[ClassifierParams]:
        return self.params[self.best_index] if self.best_index >= 0 else None

    def table(self) -> pd.DataFrame:
        """每个 (组合, 会话) 一行"""
        rows = []
        for params, reports in zip(self.params, self.reports):
            for report in reports:
                row = {
                    "algorithm": self.algorithm,
                    "velocity": params.velocity_threshold,
                    "duration": params.min_fixation_duration,
                    "dispersion": params.dispersion_threshold,
                    "session_id": report.session_id,
                }
                row.update({name: report.values[name] for name in METRIC_NAMES})
                row["overall"] = report.overall
                rows.append(row)
        return pd.DataFrame(rows, columns=TABLE_COLUMNS)

    def summary_frame(self) -> pd.DataFrame:
        """每个组合一行：各指标平均归一化偏差与平均 Overall"""
        rows = []
        for index, (params, reports) in enumerate(zip(self.params, self.reports)):
            row = {
                "algorithm": self.algorithm,
                "velocity": params.velocity_threshold,
                "duration": params.min_fixation_duration,
                "dispersion": params.dispersion_threshold,
            }
            for name in METRIC_NAMES:
                row[name] = (math.fsum(r.normalized[name] for r in reports) / len(reports)) if reports else None
            row["overall"] = self.mean_overall[index]
            row["error"] = self.errors.get(index, "")
            rows.append(row)
        return pd.DataFrame(rows, columns=["algorithm", "velocity", "duration", "dispersion",
                                           *METRIC_NAMES, "overall", "error"])

    def summary(self) -> Dict[str, Any]:
        best = self.best_params
        provenance = next((r[0].provenance for r in self.reports if r), {})
        return {
            "algorithm": self.algorithm,
            "run_id": self.run_id,
            "combos": len(self.params),
            "failed_combos": len(self.errors),
            "best": None if best is None else {
                "velocity": best.velocity_threshold,
                "duration": best.min_fixation_duration,
                "dispersion": best.dispersion_threshold,
                "z_threshold": best.z_outlier_threshold if self.algorithm == "mivdt" else None,
                "mean_overall": self.mean_overall[self.best_index],
            },
            "normalization": provenance,
        }


def select_best(params: Sequence[ClassifierParams], mean_overall: Sequence[Optional[float]]) -> int:
    """
    平均 Overall 最小者；并列时取速度更低、离散度更低、时长更长的组合

    Returns:
        int: 最优组合下标，全部失败时为 -1
    """
    def sort_key(index: int) -> Tuple[float, float, float, float]:
        p = params[index]
        return (mean_overall[index],
                p.velocity_threshold or 0.0,
                p.dispersion_threshold or 0.0,
                -(p.min_fixation_duration or 0.0))

    candidates = [i for i, value in enumerate(mean_overall) if value is not None]
    if not candidates:
        return -1
    return min(candidates, key=sort_key)


# 工作进程内的语料（由 initializer 设置）
_WORKER_STATE: Dict[str, Any] = {}


def _init_worker(corpus: List[CorpusEntry], algorithm: str, merge_mode: str, fqns_clip: bool) -> None:
    _WORKER_STATE.update(corpus=corpus, algorithm=algorithm, merge_mode=merge_mode, fqns_clip=fqns_clip)


def _classify_cached(entry: CorpusEntry, algorithm: str, params: ClassifierParams,
                     cache: Dict[Tuple[int, float], Any], entry_index: int, merge_mode: str) -> LabeledStream:
    """同一会话、同一速度（IVDT）或同一离散度（IDT）下的候选组只计算一次"""
    if algorithm == "ivt":
        return classify_ivt(entry.arrays, params)
    if algorithm == "idt":
        key = (entry_index, params.dispersion_threshold)
        if key not in cache:
            cache[key] = dispersion_groups(entry.arrays, params.dispersion_threshold)
        return idt_stream(entry.arrays, cache[key], params, merge_mode)
    key = (entry_index, params.velocity_threshold)
    if key not in cache:
        cache[key] = velocity_groups(entry.arrays, params.velocity_threshold)
    return ivdt_stream(entry.arrays, cache[key], params, merge_mode, correct=(algorithm == "mivdt"))


def _run_slice(combos: List[ClassifierParams]) -> List[Tuple[Optional[List[MetricReport]], Optional[str]]]:
    """一个任务：共享候选组的一组参数在全部会话上的报告"""
    corpus: List[CorpusEntry] = _WORKER_STATE["corpus"]
    algorithm: str = _WORKER_STATE["algorithm"]
    cache: Dict[Tuple[int, float], Any] = {}
    results = []
    for params in combos:
        try:
            reports = []
            for index, entry in enumerate(corpus):
                stream = _classify_cached(entry, algorithm, params, cache, index, _WORKER_STATE["merge_mode"])
                reports.append(evaluate_session(entry, stream, entry.protocol,
                                                clip=_WORKER_STATE["fqns_clip"], ideals=entry.ideals))
            results.append((reports, None))
        except GazeToolkitError as e:
            logger.warning(f"⚠️ 参数组合 {params.as_dict()} 失败: {e.message}")
            results.append((None, e.message))
        except Exception as e:
            # 单个组合的意外错误只作废该组合，其余组合继续
            message = f"{type(e).__name__}: {e}"
            logger.error(f"❌ 参数组合 {params.as_dict()} 出现意外错误: {message}")
            results.append((None, message))
    return results


def _slice_key(algorithm: str, params: ClassifierParams) -> float:
    if algorithm == "idt":
        return params.dispersion_threshold
    return params.velocity_threshold


def entry_digest(entry: CorpusEntry) -> str:
    """会话全部数组与协议内容的 SHA-256"""
    digest = hashlib.sha256()
    for values in (entry.arrays.timestamps, entry.arrays.positions, entry.arrays.origins, entry.arrays.velocities):
        digest.update(np.ascontiguousarray(values, dtype=np.float64).tobytes())
    digest.update(config_hash(protocol_to_dict(entry.protocol)).encode("ascii"))
    return digest.hexdigest()


def corpus_key(corpus: Sequence[CorpusEntry], algorithm: str, merge_mode: str, fqns_clip: bool) -> str:
    """语料与设置的指纹，用于区分不同运行的检查点"""
    return config_hash({
        "algorithm": algorithm,
        "merge_mode": merge_mode,
        "fqns_clip": fqns_clip,
        "sessions": [(e.session_id, entry_digest(e)) for e in corpus],
    })


def run_grid(corpus: Sequence, algorithm: str, grid: ParamGrid,
             workers: int = 1,
             merge_mode: str = "auto",
             fqns_clip: bool = True,
             checkpoint: Optional[CheckpointStore] = None,
             run_id: str = "",
             z_threshold: float = 4.9) -> TuneResult:
    """
    网格搜索

    Args:
        corpus: 预处理后的会话（或 CorpusEntry）列表，每个会话需带协议
        algorithm: 算法名
        grid: 参数网格
        workers: 进程数
        merge_mode: 相邻组合并判据
        fqns_clip: FQnS 是否裁剪到停留窗口
        checkpoint: 检查点存储，已完成的组合直接读取
        run_id: 运行标识
        z_threshold: m-IVDT 的离群深度阈值

    Returns:
        TuneResult: 全部组合的归一化报告与最优组合
    """
    if not corpus:
        raise ContractError("调参语料为空")
    algorithm = create_classifier(algorithm).name
    entries = [e if isinstance(e, CorpusEntry) else CorpusEntry.from_session(e) for e in corpus]
    combos = enumerate_grid(grid, algorithm, z_threshold=z_threshold)
    raw: List[Optional[List[MetricReport]]] = [None] * len(combos)
    errors: Dict[int, str] = {}

    pending: Dict[Any, List[int]] = {}
    for index, params in enumerate(combos):
        if checkpoint is not None and checkpoint.has(algorithm, params):
            raw[index], error = checkpoint.load(algorithm, params)
            if error:
                errors[index] = error
            continue
        pending.setdefault(_slice_key(algorithm, params), []).append(index)
    if checkpoint is not None and len(combos) - sum(len(v) for v in pending.values()):
        logger.info(f"从检查点恢复 {len(combos) - sum(len(v) for v in pending.values())} 个参数组合")

    slices = list(pending.values())
    logger.info(f"🔍 {algorithm} 网格搜索: {len(combos)} 个组合 × {len(entries)} 个会话, "
                f"{len(slices)} 个任务, {workers} 个进程")

    def record(slice_index: int, results) -> None:
        for combo_index, (reports, error) in zip(slices[slice_index], results):
            raw[combo_index] = reports
            if error:
                errors[combo_index] = error
            if checkpoint is not None:
                checkpoint.save(algorithm, combos[combo_index], reports, error)

    run_ordered(_run_slice, [[combos[i] for i in s] for s in slices], workers=workers,
                initializer=_init_worker, initargs=(entries, algorithm, merge_mode, fqns_clip),
                progress=ProgressReporter(len(slices), f"{algorithm} 调参"), on_result=record)

    # 归一化总体按 (组合, 会话) 的固定顺序展开
    flat = [report for reports in raw if reports is not None for report in reports]
    normalized = normalize_reports(flat, run_id=run_id)
    reports_by_combo: List[List[MetricReport]] = []
    mean_overall: List[Optional[float]] = []
    cursor = 0
    for reports in raw:
        if reports is None:
            reports_by_combo.append([])
            mean_overall.append(None)
            continue
        chunk = normalized[cursor:cursor + len(reports)]
        cursor += len(reports)
        reports_by_combo.append(chunk)
        mean_overall.append(math.fsum(r.overall for r in chunk) / len(chunk))

    best = select_best(combos, mean_overall)
    result = TuneResult(algorithm=algorithm, params=combos, reports=reports_by_combo,
                        mean_overall=mean_overall, errors=errors, best_index=best, run_id=run_id)
    if best >= 0:
        logger.info(f"✅ {algorithm} 最优参数: {combos[best].as_dict()}, 平均 Overall={mean_overall[best]:.4f}")
    else:
        logger.warning(f"⚠️ {algorithm} 所有参数组合均失败")
    return result


def _compare_one(task: Tuple[int, str, ClassifierParams]) -> MetricReport:
    entry_index, algorithm, params = task
    entry: CorpusEntry = _WORKER_STATE["corpus"][entry_index]
    stream = classify(algorithm, entry.arrays, params, merge_mode=_WORKER_STATE["merge_mode"])
    return evaluate_session(entry, stream, entry.protocol, clip=_WORKER_STATE["fqns_clip"], ideals=entry.ideals)


def compare_algorithms(corpus: Sequence, param_sets: Dict[str, ClassifierParams],
                       workers: int = 1,
                       merge_mode: str = "auto",
                       fqns_clip: bool = True,
                       run_id: str = "") -> List[MetricReport]:
    """
    多个算法在同一语料上运行，并在所有结果的并集上归一化

    Args:
        corpus: 预处理后的会话（或 CorpusEntry）列表
        param_sets: 算法名 → 参数
        workers: 进程数
        merge_mode: 相邻组合并判据
        fqns_clip: FQnS 是否裁剪到停留窗口
        run_id: 运行标识

    Returns:
        List[MetricReport]: 按 (算法, 会话) 顺序排列的归一化报告
    """
    if not corpus:
        raise ContractError("比较语料为空")
    entries = [e if isinstance(e, CorpusEntry) else CorpusEntry.from_session(e) for e in corpus]
    tasks = [(index, create_classifier(name).name, params)
             for name, params in param_sets.items() for index in range(len(entries))]
    reports = run_ordered(_compare_one, tasks, workers=workers,
                          initializer=_init_worker, initargs=(entries, "", merge_mode, fqns_clip),
                          progress=ProgressReporter(len(tasks), "算法比较"))
    return normalize_reports(reports, run_id=run_id)
