"""
指标报告模块
Metric Report Module

理想值、偏差、最小-最大归一化与 Overall 分数
"""

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

from classifiers import LabeledStream
from protocol import StimulusProtocol, stimulus_saccades
from utils.errors import ContractError
from .scores import basic_metrics, fqls, fqns, ideal_fqns, sqns

logger = logging.getLogger(__name__)

# 与调参结果表的列顺序一致
METRIC_NAMES = ("fqns", "fqls", "fn", "afd", "sn", "asa", "sqns")

PAPER_IDEAL_AFN = 21.0
PAPER_IDEAL_AFD = 1500.0
PAPER_IDEAL_ANS = 20.0
PAPER_IDEAL_FQLS = 0.5
PAPER_IDEAL_SQNS = 100.0


@dataclass(frozen=True)
class IdealValues:
    ideal_afn: float = PAPER_IDEAL_AFN
    ideal_afd: float = PAPER_IDEAL_AFD
    ideal_ans: float = PAPER_IDEAL_ANS
    ideal_asa: float = 0.0
    ideal_fqns: float = 0.0
    ideal_fqls: float = PAPER_IDEAL_FQLS
    ideal_sqns: float = PAPER_IDEAL_SQNS

    @classmethod
    def for_protocol(cls, protocol: StimulusProtocol, derive_counts: bool = True) -> "IdealValues":
        """
        按协议计算理想值

        Args:
            protocol: 刺激协议
            derive_counts: True 时理想注视数/扫视数取 (n, n-1)、理想时长取平均停留时长，
                否则使用 21 / 1500 ms / 20

        Returns:
            IdealValues: 理想值
        """
        saccades = stimulus_saccades(protocol)
        if not saccades:
            raise ContractError("协议至少需要 2 个目标")
        asa = math.fsum(s.amplitude for s in saccades) / len(saccades)
        if derive_counts:
            return cls(ideal_afn=float(protocol.n_targets),
                       ideal_afd=protocol.total_dwell / protocol.n_targets,
                       ideal_ans=float(len(saccades)),
                       ideal_asa=asa,
                       ideal_fqns=ideal_fqns(protocol))
        return cls(ideal_asa=asa, ideal_fqns=ideal_fqns(protocol))

    def by_metric(self) -> Dict[str, float]:
        return {
            "fqns": self.ideal_fqns,
            "fqls": self.ideal_fqls,
            "fn": self.ideal_afn,
            "afd": self.ideal_afd,
            "sn": self.ideal_ans,
            "asa": self.ideal_asa,
            "sqns": self.ideal_sqns,
        }


@dataclass
class MetricReport:
    """一个会话在一组参数下的全部指标"""

    session_id: str
    algorithm: str
    task_kind: str
    values: Dict[str, float]
    ideals: IdealValues
    params: Dict[str, Optional[float]] = field(default_factory=dict)
    flags: List[str] = field(default_factory=list)
    normalized: Optional[Dict[str, float]] = None
    overall: Optional[float] = None
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def deviations(self) -> Dict[str, float]:
        ideals = self.ideals.by_metric()
        return {name: abs(self.values[name] - ideals[name]) for name in METRIC_NAMES}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "session_id": self.session_id,
            "algorithm": self.algorithm,
            "task_kind": self.task_kind,
            "params": dict(self.params),
            "values": dict(self.values),
            "ideals": asdict(self.ideals),
            "deviations": self.deviations,
            "normalized": dict(self.normalized) if self.normalized is not None else None,
            "overall": self.overall,
            "flags": list(self.flags),
            "provenance": dict(self.provenance),
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "MetricReport":
        return cls(
            session_id=payload["session_id"],
            algorithm=payload["algorithm"],
            task_kind=payload["task_kind"],
            values={k: float(v) for k, v in payload["values"].items()},
            ideals=IdealValues(**payload["ideals"]),
            params=dict(payload.get("params", {})),
            flags=list(payload.get("flags", [])),
            normalized=payload.get("normalized"),
            overall=payload.get("overall"),
            provenance=dict(payload.get("provenance", {})),
        )


def normalize_deviations(values: Sequence[float]) -> Tuple[List[float], bool]:
    """
    最小-最大归一化

    Args:
        values: 同一指标在比较集合中的偏差

    Returns:
        Tuple[List[float], bool]: (归一化结果, 是否为常数指标)；常数时全部为 0
    """
    if not values:
        return [], False
    low, high = min(values), max(values)
    if high == low:
        return [0.0 for _ in values], True
    span = high - low
    return [min(1.0, max(0.0, (v - low) / span)) for v in values], False


def overall_score(normalized: Sequence[float]) -> float:
    """七个归一化偏差的算术平均"""
    if len(normalized) != len(METRIC_NAMES):
        raise ContractError(f"Overall 需要 {len(METRIC_NAMES)} 个归一化值，实际 {len(normalized)} 个")
    return math.fsum(normalized) / len(normalized)


def evaluate_session(session, stream: LabeledStream, protocol: Optional[StimulusProtocol] = None,
                     clip: bool = True, ideals: Optional[IdealValues] = None) -> MetricReport:
    """
    计算一个会话的原始指标、理想值与偏差（归一化由 normalize_reports 完成）

    Args:
        session: 预处理后的会话
        stream: 该会话的分类结果
        protocol: 刺激协议，缺省取会话上的协议
        clip: FQnS 是否按停留窗口裁剪
        ideals: 理想值，缺省按协议计算

    Returns:
        MetricReport: 未归一化的报告
    """
    protocol = protocol or session.protocol
    if protocol is None:
        raise ContractError(f"会话 {session.session_id} 没有对应的刺激协议")
    if len(stream) != len(session.positions):
        raise ContractError(f"会话 {session.session_id}: 标注数 {len(stream)} 与样本数 {len(session.positions)} 不一致")
    ideals = ideals or IdealValues.for_protocol(protocol)

    basic = basic_metrics(stream, session.positions, session.origins)
    fqls_value, fqls_undefined = fqls(stream, protocol, session.session_id)
    values = {
        "fqns": fqns(stream, protocol, clip=clip, session_id=session.session_id),
        "fqls": fqls_value,
        "fn": basic.fn_count,
        "afd": basic.afd,
        "sn": basic.sn_count,
        "asa": basic.asa,
        "sqns": sqns(stream, protocol, session.positions, session.origins),
    }
    flags = list(basic.flags)
    if fqls_undefined:
        flags.append("fqls_undefined")
    if any(f.uncorrectable for f in stream.fixations):
        flags.append("uncorrectable_fixation")
    params = stream.params.as_dict() if stream.params is not None else {}
    return MetricReport(session_id=session.session_id, algorithm=stream.algorithm,
                        task_kind=protocol.task_kind.value, values=values, ideals=ideals,
                        params=params, flags=flags)


def normalize_reports(reports: Sequence[MetricReport], run_id: str = "") -> List[MetricReport]:
    """
    在整个比较集合上做最小-最大归一化并计算 Overall

    Args:
        reports: 同一次调参或比较运行中的全部报告
        run_id: 记录到来源信息中的运行标识

    Returns:
        List[MetricReport]: 新的报告列表（输入不被修改）
    """
    if not reports:
        return []
    deviations = [r.deviations for r in reports]
    columns: Dict[str, List[float]] = {}
    minimum, maximum, constant = [], [], []
    for name in METRIC_NAMES:
        values = [d[name] for d in deviations]
        normalized, is_constant = normalize_deviations(values)
        columns[name] = normalized
        minimum.append(min(values))
        maximum.append(max(values))
        if is_constant:
            constant.append(name)
            logger.warning(f"⚠️ 指标 {name} 在 {len(values)} 个结果中取值相同，归一化结果全部为 0")

    provenance = {
        "normalization_min": minimum,
        "normalization_max": maximum,
        "constant_metrics": constant,
        "run_id": run_id,
    }
    result = []
    for index, report in enumerate(reports):
        normalized = {name: columns[name][index] for name in METRIC_NAMES}
        result.append(replace(report,
                              normalized=normalized,
                              overall=overall_score([normalized[name] for name in METRIC_NAMES]),
                              provenance=dict(provenance)))
    return result
