"""
评价指标模块
Evaluation Scores Module

ANF/AFD/ANS/ASA 四个常用指标，以及基于刺激协议的 FQnS、FQlS、SQnS
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from classifiers import FIXATION, Fixation, LabeledStream
from geometry import angle_at_origin, chord_length, norm, sub
from protocol import SACCADIC_LATENCY_MS, StimulusProtocol, saccade_duration, stimulus_saccades
from utils.errors import AlignmentError, ContractError, UndefinedMetricError

logger = logging.getLogger(__name__)

ALIGNMENT_TOLERANCE_MS = 100.0


@dataclass
class BasicMetrics:
    fn_count: float
    afd: float
    sn_count: float
    asa: float
    flags: List[str] = field(default_factory=list)


def detected_saccade_amplitudes(stream: LabeledStream, positions, origins) -> List[float]:
    """两侧都有样本的扫视段：以段首样本原点为顶点，前后相邻样本之间的视角"""
    n = len(stream)
    amplitudes = []
    for start, end in stream.saccade_runs():
        if start == 0 or end == n - 1:
            continue
        amplitudes.append(angle_at_origin(origins[start], positions[start - 1], positions[end + 1]))
    return amplitudes


def basic_metrics(stream: LabeledStream, positions, origins) -> BasicMetrics:
    """
    注视数、平均注视时长、扫视数、平均扫视幅度

    Args:
        stream: 分类结果
        positions: (N, 3) 注视点
        origins: (N, 3) 世界坐标瞳孔位置

    Returns:
        BasicMetrics: 四个指标；没有注视或没有扫视时对应值为 0 并记录标志
    """
    if len(positions) != len(stream) or len(origins) != len(stream):
        raise ContractError(f"标注数 {len(stream)} 与注视点数 {len(positions)} 不一致")
    flags = []
    fn_count = len(stream.fixations)
    if fn_count:
        afd = math.fsum(f.duration for f in stream.fixations) / fn_count
    else:
        afd = 0.0
        flags.append("no_fixations")

    sn_count = len(stream.saccade_runs())
    amplitudes = detected_saccade_amplitudes(stream, positions, origins)
    if amplitudes:
        asa = math.fsum(amplitudes) / len(amplitudes)
    else:
        asa = 0.0
        flags.append("no_saccades")
    return BasicMetrics(float(fn_count), afd, float(sn_count), asa, flags)


def check_alignment(fixations: Sequence[Fixation], protocol: StimulusProtocol, session_id: str = "",
                    tolerance: float = ALIGNMENT_TOLERANCE_MS) -> None:
    low = protocol.start_ms - tolerance
    high = protocol.end_ms + tolerance
    for fixation in fixations:
        if fixation.t_end < low or fixation.t_start > high:
            raise AlignmentError(
                f"会话 {session_id} 的注视 [{fixation.t_start}, {fixation.t_end}] ms "
                f"不在协议时间范围 [{protocol.start_ms}, {protocol.end_ms}] ms 内",
                session_id=session_id)


def concurrent_target(fixation: Fixation, protocol: StimulusProtocol) -> int:
    """与注视时间重叠最长的目标（并列取较早者；零时长注视取包含起点的目标）"""
    best_index, best_overlap = -1, 0.0
    for index, target in enumerate(protocol.targets):
        overlap = min(fixation.t_end, target.offset) - max(fixation.t_start, target.onset)
        if overlap > best_overlap:
            best_index, best_overlap = index, overlap
    if best_index < 0:
        return protocol.target_index_at(fixation.t_start)
    return best_index


def proximity_radii(protocol: StimulusProtocol) -> List[float]:
    """
    每个目标的邻近半径（米）

    角度为上一个刺激扫视幅度的 1/3，在目标到观察点的距离处换算为弦长；
    第一个目标使用第一个扫视的幅度。
    """
    saccades = stimulus_saccades(protocol)
    if not saccades:
        raise ContractError("协议至少需要 2 个目标才能计算邻近半径")
    radii = []
    for index, target in enumerate(protocol.targets):
        amplitude = saccades[max(index, 1) - 1].amplitude
        target_range = norm(sub(target.position, protocol.viewer_origin))
        radii.append(chord_length(target_range, amplitude / 3.0))
    return radii


def fqns(stream: LabeledStream, protocol: StimulusProtocol, clip: bool = True, session_id: str = "") -> float:
    """
    注视定量分数（百分比）

    Args:
        stream: 分类结果
        protocol: 刺激协议
        clip: True（默认）时只计入注视与目标停留窗口的重叠时长，False 时计入注视的全部时长
        session_id: 用于报错

    Returns:
        float: 100 × 邻近目标的注视时长 / 总停留时长
    """
    check_alignment(stream.fixations, protocol, session_id)
    radii = proximity_radii(protocol)
    credited = []
    for fixation in stream.fixations:
        index = concurrent_target(fixation, protocol)
        target = protocol.targets[index]
        distance = norm(sub(fixation.position, target.position))
        logger.debug(f"注视 {fixation.first_index}: 目标 {index}, 距离 {distance:.4f} m, 半径 {radii[index]:.4f} m")
        if distance <= radii[index]:
            if clip:
                credited.append(max(0.0, min(fixation.t_end, target.offset) - max(fixation.t_start, target.onset)))
            else:
                credited.append(fixation.duration)
    return 100.0 * math.fsum(credited) / protocol.total_dwell


def ideal_fqns(protocol: StimulusProtocol, latency: float = SACCADIC_LATENCY_MS) -> float:
    """理想 FQnS：扣除每次扫视的潜伏期与主序列扫视时长"""
    saccades = stimulus_saccades(protocol)
    if not saccades:
        raise ContractError("协议至少需要 2 个目标才能计算理想 FQnS")
    lost = len(saccades) * latency + math.fsum(saccade_duration(s.amplitude) for s in saccades)
    return 100.0 * (1.0 - lost / protocol.total_dwell)


def fqls(stream: LabeledStream, protocol: StimulusProtocol, session_id: str = "") -> Tuple[float, bool]:
    """
    注视定性分数（米）

    Returns:
        Tuple[float, bool]: (每个注视样本所属注视质心到同期目标距离的均值, 是否未定义)；
        没有注视样本时返回 (0.0, True)
    """
    check_alignment(stream.fixations, protocol, session_id)
    owner = stream.fixation_index_per_sample()
    counted = (stream.labels == FIXATION) & (owner >= 0)
    if not np.any(counted):
        return 0.0, True
    counts = np.bincount(owner[counted], minlength=len(stream.fixations))
    distances = [
        norm(sub(fixation.position, protocol.targets[concurrent_target(fixation, protocol)].position))
        for fixation in stream.fixations
    ]
    total = math.fsum(float(c) * d for c, d in zip(counts, distances))
    return total / float(counts.sum()), False


def sqns(stream: LabeledStream, protocol: StimulusProtocol, positions, origins) -> float:
    """扫视定量分数：检测到的扫视幅度之和 / 刺激扫视幅度之和 × 100"""
    stimulus_total = math.fsum(s.amplitude for s in stimulus_saccades(protocol))
    if stimulus_total <= 0.0:
        raise UndefinedMetricError(f"协议 {protocol.protocol_id} 的刺激扫视幅度之和为 0，SQnS 无定义")
    detected_total = math.fsum(detected_saccade_amplitudes(stream, positions, origins))
    return 100.0 * detected_total / stimulus_total
