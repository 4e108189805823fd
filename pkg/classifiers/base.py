"""
分类器公共模块
Classifier Base Module

参数、注视与标注流类型，以及 IDT/IVDT 共用的候选组合并流程
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from geometry import Vec3, angle_at_origin, centroid
from utils.config import MERGE_MODES
from utils.errors import ContractError, EmptySessionError, InvalidConfigurationError

logger = logging.getLogger(__name__)

SACCADE = 0
FIXATION = 1
LABEL_NAMES = {SACCADE: "saccade", FIXATION: "fixation"}

DEFAULT_Z_OUTLIER_THRESHOLD = 4.9

# auto 下各算法的合并判据；IDT 候选组随样本增长，边界点相邻，按质心比较
AUTO_MERGE_MODES = {"idt": "centroid", "ivdt": "boundary", "mivdt": "boundary"}

Segment = Tuple[int, int]


@dataclass(frozen=True)
class ClassifierParams:
    """分类阈值；未使用的维度为 None"""

    velocity_threshold: Optional[float] = None
    dispersion_threshold: Optional[float] = None
    min_fixation_duration: Optional[float] = None
    z_outlier_threshold: float = DEFAULT_Z_OUTLIER_THRESHOLD

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if value is not None and not (math.isfinite(value) and value > 0):
                raise InvalidConfigurationError(f"参数 {name} 必须是正数，当前值: {value}")

    def as_dict(self) -> Dict[str, Optional[float]]:
        return {
            "velocity_threshold": self.velocity_threshold,
            "dispersion_threshold": self.dispersion_threshold,
            "min_fixation_duration": self.min_fixation_duration,
            "z_outlier_threshold": self.z_outlier_threshold,
        }

    def require(self, *names: str) -> None:
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise ContractError(f"缺少分类参数: {', '.join(missing)}")


@dataclass(frozen=True)
class Fixation:
    x_f: float
    y_f: float
    z_f: float
    t_start: float
    duration: float
    first_index: int
    last_index: int
    segments: Tuple[Segment, ...] = ()
    corrected: bool = False
    uncorrectable: bool = False

    @property
    def position(self) -> Vec3:
        return Vec3(self.x_f, self.y_f, self.z_f)

    @property
    def t_end(self) -> float:
        return self.t_start + self.duration

    def member_indices(self) -> List[int]:
        segments = self.segments or ((self.first_index, self.last_index),)
        return [i for first, last in segments for i in range(first, last + 1)]


@dataclass
class LabeledStream:
    """逐样本标注 + 注视元组"""

    labels: np.ndarray
    fixations: List[Fixation] = field(default_factory=list)
    algorithm: str = ""
    params: Optional[ClassifierParams] = None

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def fixation_mask(self) -> np.ndarray:
        return self.labels == FIXATION

    def saccade_runs(self) -> List[Segment]:
        """所有极大的扫视样本段 (首, 尾)"""
        return label_runs(self.labels, SACCADE)

    def fixation_index_per_sample(self) -> np.ndarray:
        """每个样本所属注视的下标，不属于任何注视时为 -1"""
        owner = np.full(len(self.labels), -1, dtype=int)
        for index, fixation in enumerate(self.fixations):
            owner[fixation.first_index:fixation.last_index + 1] = index
        return owner


class GazeArrays(NamedTuple):
    """分类器逐样本循环使用的 Python 列表视图"""

    timestamps: List[float]
    positions: List[List[float]]
    origins: List[List[float]]
    velocities: List[float]

    def __len__(self) -> int:
        return len(self.timestamps)


class CandidateGroup(NamedTuple):
    first: int
    last: int
    break_index: int


def as_gaze_arrays(source) -> GazeArrays:
    """
    把会话、注视点列表或 GazeArrays 统一为 GazeArrays

    Args:
        source: 预处理后的 Session、GazePoint 序列或 GazeArrays

    Returns:
        GazeArrays: 列表视图
    """
    if isinstance(source, GazeArrays):
        arrays = source
    elif getattr(source, "positions", None) is not None and isinstance(source.positions, np.ndarray):
        velocities = source.velocities if source.velocities is not None else np.zeros(len(source.timestamps))
        arrays = GazeArrays(np.asarray(source.timestamps, dtype=float).tolist(),
                            np.asarray(source.positions, dtype=float).tolist(),
                            np.asarray(source.origins, dtype=float).tolist(),
                            np.asarray(velocities, dtype=float).tolist())
    else:
        points = list(source)
        arrays = GazeArrays([float(p.timestamp) for p in points],
                            [list(p.position) for p in points],
                            [list(p.origin) for p in points],
                            [float(p.velocity) if p.velocity is not None else 0.0 for p in points])
    if len(arrays) == 0:
        raise EmptySessionError("没有可分类的注视点")
    return arrays


def label_runs(labels: np.ndarray, value: int) -> List[Segment]:
    """labels 中取值为 value 的极大连续段"""
    mask = np.concatenate(([False], np.asarray(labels) == value, [False]))
    edges = np.flatnonzero(np.diff(mask.astype(np.int8)))
    return [(int(start), int(stop) - 1) for start, stop in zip(edges[::2], edges[1::2])]


def segments_duration(segments: Sequence[Segment], timestamps: Sequence[float]) -> float:
    return timestamps[segments[-1][1]] - timestamps[segments[0][0]]


def segment_members(segments: Sequence[Segment]) -> List[int]:
    return [i for first, last in segments for i in range(first, last + 1)]


def _mergeable(previous: List[Segment], group: CandidateGroup, arrays: GazeArrays,
               dispersion: float, merge_mode: str) -> bool:
    origin = arrays.origins[group.break_index]
    if merge_mode == "centroid":
        left = centroid(arrays.positions[i] for i in segment_members(previous))
        right = centroid(arrays.positions[i] for i in range(group.first, group.last + 1))
    else:
        left = arrays.positions[previous[-1][1]]
        right = arrays.positions[group.first]
    return angle_at_origin(origin, left, right) < dispersion


def resolve_groups(candidates: Sequence[CandidateGroup],
                   arrays: GazeArrays,
                   dispersion: float,
                   min_duration: float,
                   merge_mode: str = "boundary") -> List[List[Segment]]:
    """
    候选组的时长过滤与相邻合并

    上一组初始为第 0 个样本；候选组时长不超过 min_duration 时丢弃，
    否则与上一组的视角小于 dispersion 时合并，不满足时输出上一组（若其时长达标）
    并以候选组替换。流结束时对上一组做同样的时长判断。

    Args:
        candidates: 按时间排列的候选组，最后一个的 break_index 为 n-1
        arrays: 注视数据
        dispersion: 合并阈值（度）
        min_duration: 最短注视时长（毫秒）
        merge_mode: boundary 比较边界点，centroid 比较两组质心

    Returns:
        List[List[Segment]]: 每个注视由若干成员段组成
    """
    timestamps = arrays.timestamps
    previous: List[Segment] = [(0, 0)]
    merged: List[List[Segment]] = []
    for group in candidates:
        if not timestamps[group.last] - timestamps[group.first] > min_duration:
            continue
        if _mergeable(previous, group, arrays, dispersion, merge_mode):
            previous.append((group.first, group.last))
            continue
        if segments_duration(previous, timestamps) > min_duration:
            merged.append(previous)
        previous = [(group.first, group.last)]
    if segments_duration(previous, timestamps) > min_duration:
        merged.append(previous)
    return merged


def build_fixation(segments: Sequence[Segment], arrays: GazeArrays) -> Fixation:
    members = segment_members(segments)
    c = centroid(arrays.positions[i] for i in members)
    first, last = segments[0][0], segments[-1][1]
    return Fixation(x_f=c.x, y_f=c.y, z_f=c.z,
                    t_start=arrays.timestamps[first],
                    duration=arrays.timestamps[last] - arrays.timestamps[first],
                    first_index=first, last_index=last, segments=tuple(segments))


def stream_from_fixations(n: int, fixations: List[Fixation], algorithm: str,
                          params: Optional[ClassifierParams]) -> LabeledStream:
    """注视首尾范围内的样本标为注视，其余为扫视"""
    labels = np.full(n, SACCADE, dtype=np.int8)
    for fixation in fixations:
        labels[fixation.first_index:fixation.last_index + 1] = FIXATION
    return LabeledStream(labels=labels, fixations=fixations, algorithm=algorithm, params=params)


def resolve_merge_mode(algorithm: str, merge_mode: str) -> str:
    """auto 按算法取合并判据：IDT 比较质心，IVDT / m-IVDT 比较边界点"""
    if merge_mode not in MERGE_MODES:
        raise InvalidConfigurationError(f"未知的合并模式: {merge_mode}（可选 {', '.join(MERGE_MODES)}）")
    if merge_mode == "auto":
        return AUTO_MERGE_MODES.get(algorithm, "boundary")
    return merge_mode
