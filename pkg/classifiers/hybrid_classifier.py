"""
速度-离散度混合分类器（IVDT 与 m-IVDT）
Velocity-Dispersion Hybrid Classifiers

速度决定组成员，时长决定组是否存活，离散度决定相邻组是否合并。
m-IVDT 在输出注视前把深度离群样本投影到经过注视中心的平面上再求质心。
"""

import logging
from typing import List, Sequence

from geometry import (
    Plane,
    Ray,
    Vec3,
    centroid,
    norm,
    normalize,
    ray_plane_intersection,
    sub,
)
from utils.errors import InvalidArgumentError
from .base import (
    CandidateGroup,
    ClassifierParams,
    Fixation,
    GazeArrays,
    LabeledStream,
    Segment,
    as_gaze_arrays,
    build_fixation,
    resolve_merge_mode,
    resolve_groups,
    segment_members,
    stream_from_fixations,
)

logger = logging.getLogger(__name__)


def velocity_groups(arrays: GazeArrays, velocity: float) -> List[CandidateGroup]:
    """
    按速度划分候选组

    第 1 个样本总是开启当前组；之后 v_i < velocity 的样本加入当前组（组为空时开启新组），
    其余样本结束当前组且自身不进入任何组。
    """
    n = len(arrays)
    if n < 2:
        return []
    velocities = arrays.velocities
    groups: List[CandidateGroup] = []
    first, last = 1, 1
    for i in range(2, n):
        if velocities[i] < velocity:
            if first is None:
                first = i
            last = i
        elif first is not None:
            groups.append(CandidateGroup(first, last, i))
            first = None
    if first is not None:
        groups.append(CandidateGroup(first, last, n - 1))
    return groups


def classify_ivdt(points, params: ClassifierParams, merge_mode: str = "auto") -> LabeledStream:
    """
    IVDT 分类

    Args:
        points: 预处理后的会话或注视点序列（带速度）
        params: 需要速度、时长、离散度三个阈值
        merge_mode: 相邻组合并判据（auto 取 boundary）

    Returns:
        LabeledStream: 标注与注视
    """
    params.require("velocity_threshold", "dispersion_threshold", "min_fixation_duration")
    resolve_merge_mode("ivdt", merge_mode)
    arrays = as_gaze_arrays(points)
    return ivdt_stream(arrays, velocity_groups(arrays, params.velocity_threshold), params, merge_mode)


def ivdt_stream(arrays: GazeArrays, candidates: Sequence[CandidateGroup], params: ClassifierParams,
                merge_mode: str = "auto", correct: bool = False) -> LabeledStream:
    """由缓存的候选组生成 IVDT（correct=False）或 m-IVDT（correct=True）标注流"""
    mode = resolve_merge_mode("mivdt" if correct else "ivdt", merge_mode)
    merged = resolve_groups(candidates, arrays, params.dispersion_threshold,
                            params.min_fixation_duration, mode)
    if correct:
        fixations = [build_corrected_fixation(segments, arrays, params.z_outlier_threshold)
                     for segments in merged]
        algorithm = "mivdt"
    else:
        fixations = [build_fixation(segments, arrays) for segments in merged]
        algorithm = "ivdt"
    return stream_from_fixations(len(arrays), fixations, algorithm, params)


def correct_samples(group_points: Sequence[Sequence[float]],
                    origins: Sequence[Sequence[float]],
                    reference_fixation: Sequence[float],
                    z_threshold: float) -> List[Vec3]:
    """
    把深度离群样本投影到参考注视所在的平面

    平面经过 reference_fixation，法向量为瞳孔指向参考注视的方向；
    z ≥ z_threshold 的样本沿瞳孔→样本射线与该平面求交后替换。

    Args:
        group_points: 组内注视点
        origins: 对应的世界坐标瞳孔位置
        reference_fixation: 参考注视（非离群成员的质心）
        z_threshold: 离群深度阈值（米）

    Returns:
        List[Vec3]: 校正后的注视点，非离群点原样返回
    """
    corrected: List[Vec3] = []
    for point, origin in zip(group_points, origins):
        point = Vec3.of(point)
        if point.z < z_threshold:
            corrected.append(point)
            continue
        to_reference = sub(reference_fixation, origin)
        if norm(to_reference) == 0.0:
            logger.warning(f"⚠️ 参考注视 {tuple(reference_fixation)} 与瞳孔位置重合，跳过校正")
            corrected.append(point)
            continue
        try:
            plane = Plane(point=Vec3.of(reference_fixation), normal=normalize(to_reference))
            ray = Ray.through(origin, point)
        except InvalidArgumentError:
            corrected.append(point)
            continue
        hit = ray_plane_intersection(ray, plane)
        corrected.append(hit if hit is not None else point)
    return corrected


def build_corrected_fixation(segments: Sequence[Segment], arrays: GazeArrays, z_threshold: float) -> Fixation:
    """m-IVDT 的注视输出：没有离群成员时与 IVDT 完全相同"""
    members = segment_members(segments)
    points = [arrays.positions[i] for i in members]
    outliers = [p[2] >= z_threshold for p in points]
    if not any(outliers):
        return build_fixation(segments, arrays)

    first, last = segments[0][0], segments[-1][1]
    t_start = arrays.timestamps[first]
    duration = arrays.timestamps[last] - t_start
    if all(outliers):
        logger.warning(f"⚠️ 样本 {first}-{last} 的注视组全部是深度离群点，保留未校正的质心")
        c = centroid(points)
        return Fixation(x_f=c.x, y_f=c.y, z_f=c.z, t_start=t_start, duration=duration,
                        first_index=first, last_index=last, segments=tuple(segments), uncorrectable=True)

    reference = centroid(p for p, outlier in zip(points, outliers) if not outlier)
    corrected = correct_samples(points, [arrays.origins[i] for i in members], reference, z_threshold)
    c = centroid(corrected)
    return Fixation(x_f=c.x, y_f=c.y, z_f=c.z, t_start=t_start, duration=duration,
                    first_index=first, last_index=last, segments=tuple(segments), corrected=True)


def classify_mivdt(points, params: ClassifierParams, merge_mode: str = "auto") -> LabeledStream:
    """
    m-IVDT 分类：分组、存活与合并同 IVDT，输出时校正深度离群样本

    Args:
        points: 预处理后的会话或注视点序列（带速度）
        params: 三个阈值 + z_outlier_threshold
        merge_mode: 相邻组合并判据（auto 取 boundary）

    Returns:
        LabeledStream: 标注与注视
    """
    params.require("velocity_threshold", "dispersion_threshold", "min_fixation_duration")
    resolve_merge_mode("mivdt", merge_mode)
    arrays = as_gaze_arrays(points)
    candidates = velocity_groups(arrays, params.velocity_threshold)
    return ivdt_stream(arrays, candidates, params, merge_mode, correct=True)
