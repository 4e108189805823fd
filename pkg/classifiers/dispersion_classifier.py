"""
离散度阈值分类器（IDT）
Dispersion-Threshold Classifier

不设初始窗口：先按视角离散度生长注视组，组确定后再检查最短时长，
相邻的存活组按视角合并
"""

import logging
import math
from typing import List

from geometry import angle_at_origin
from .base import (
    CandidateGroup,
    ClassifierParams,
    GazeArrays,
    LabeledStream,
    as_gaze_arrays,
    build_fixation,
    resolve_merge_mode,
    resolve_groups,
    stream_from_fixations,
)

logger = logging.getLogger(__name__)


def dispersion_groups(arrays: GazeArrays, dispersion: float) -> List[CandidateGroup]:
    """
    按离散度划分候选组

    当前组从第 1 个样本开始；新样本与当前组质心在当前样本原点处的视角
    小于 dispersion 时加入，否则当前组结束，新样本开始下一组。

    Args:
        arrays: 注视数据
        dispersion: 离散度阈值（度）

    Returns:
        List[CandidateGroup]: 候选组，末组的 break_index 为 n-1
    """
    n = len(arrays)
    if n < 2:
        return []
    positions = arrays.positions
    groups: List[CandidateGroup] = []
    first = 1
    xs, ys, zs = [positions[1][0]], [positions[1][1]], [positions[1][2]]
    for i in range(2, n):
        count = len(xs)
        group_centroid = (math.fsum(xs) / count, math.fsum(ys) / count, math.fsum(zs) / count)
        p = positions[i]
        if angle_at_origin(arrays.origins[i], group_centroid, p) < dispersion:
            xs.append(p[0])
            ys.append(p[1])
            zs.append(p[2])
            continue
        groups.append(CandidateGroup(first, i - 1, i))
        first = i
        xs, ys, zs = [p[0]], [p[1]], [p[2]]
    groups.append(CandidateGroup(first, n - 1, n - 1))
    return groups


def classify_idt(points, params: ClassifierParams, merge_mode: str = "auto") -> LabeledStream:
    """
    IDT 分类

    Args:
        points: 预处理后的会话或注视点序列
        params: 需要 dispersion_threshold 与 min_fixation_duration
        merge_mode: 相邻组合并判据（auto 取 centroid）

    Returns:
        LabeledStream: 标注与注视
    """
    params.require("dispersion_threshold", "min_fixation_duration")
    resolve_merge_mode("idt", merge_mode)
    arrays = as_gaze_arrays(points)
    candidates = dispersion_groups(arrays, params.dispersion_threshold)
    return idt_stream(arrays, candidates, params, merge_mode)


def idt_stream(arrays: GazeArrays, candidates: List[CandidateGroup], params: ClassifierParams,
               merge_mode: str = "auto") -> LabeledStream:
    """由缓存的候选组生成标注流（调参时复用同一离散度下的候选组）"""
    merged = resolve_groups(candidates, arrays, params.dispersion_threshold,
                            params.min_fixation_duration, resolve_merge_mode("idt", merge_mode))
    fixations = [build_fixation(segments, arrays) for segments in merged]
    logger.debug(f"IDT: {len(candidates)} 个候选组 → {len(fixations)} 个注视")
    return stream_from_fixations(len(arrays), fixations, "idt", params)
