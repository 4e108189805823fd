"""
会话读取模块
Session Reader Module

解析眼动仪导出的会话CSV，定义样本、注视点与会话类型
"""

import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, TextIO, Union

import numpy as np
import pandas as pd

from geometry import SceneGeometry, Vec3
from protocol import StimulusProtocol, TaskKind
from utils.errors import SessionFormatError

logger = logging.getLogger(__name__)

SESSION_COLUMNS = [
    "timestamp_ms",
    "gaze_origin_x", "gaze_origin_y", "gaze_origin_z",
    "gaze_dir_x", "gaze_dir_y", "gaze_dir_z",
    "headset_x", "headset_y", "headset_z",
    "pupil_left_mm", "pupil_right_mm",
    "openness_left", "openness_right",
]

ORIGIN_COLUMNS = SESSION_COLUMNS[1:4]
DIRECTION_COLUMNS = SESSION_COLUMNS[4:7]
HEADSET_COLUMNS = SESSION_COLUMNS[7:10]
OPTIONAL_COLUMNS = SESSION_COLUMNS[10:]

# 表头占第 1 行
FIRST_DATA_LINE = 2


@dataclass(frozen=True)
class GazeSample:
    """一行原始眼动数据；缺失的向量组为 None"""

    timestamp: float
    gaze_origin: Optional[Vec3]
    gaze_direction: Optional[Vec3]
    headset_position: Optional[Vec3]
    pupil_diameter_left: Optional[float] = None
    pupil_diameter_right: Optional[float] = None
    eye_openness_left: Optional[float] = None
    eye_openness_right: Optional[float] = None

    @property
    def valid(self) -> bool:
        return (self.gaze_origin is not None
                and self.gaze_direction is not None
                and self.headset_position is not None)


@dataclass(frozen=True)
class GazePoint:
    """射线与场景的交点"""

    position: Vec3
    timestamp: float
    origin: Vec3
    direction: Vec3
    velocity: Optional[float] = None


@dataclass
class Session:
    """
    一次实验会话

    预处理后 points 与 samples 一一对应，并缓存分类器使用的 numpy 数组。
    """

    samples: List[GazeSample]
    scene: SceneGeometry = field(default_factory=SceneGeometry)
    session_id: str = ""
    protocol: Optional[StimulusProtocol] = None
    points: List[GazePoint] = field(default_factory=list)
    filled_count: int = 0
    dropped_count: int = 0
    timestamps: Optional[np.ndarray] = None
    positions: Optional[np.ndarray] = None
    origins: Optional[np.ndarray] = None
    directions: Optional[np.ndarray] = None
    velocities: Optional[np.ndarray] = None

    @property
    def protocol_id(self) -> str:
        return self.protocol.protocol_id if self.protocol else ""

    @property
    def task_kind(self) -> Optional[TaskKind]:
        return self.protocol.task_kind if self.protocol else None

    @property
    def preprocessed(self) -> bool:
        return self.velocities is not None

    def __len__(self) -> int:
        return len(self.points) if self.points else len(self.samples)


def _numeric_column(frame: pd.DataFrame, column: str) -> np.ndarray:
    """把文本列转为浮点数组；空单元格为 NaN，非数值单元格报告行号"""
    text = frame[column].str.strip()
    empty = text == ""
    values = pd.to_numeric(text.where(~empty, None), errors="coerce").to_numpy(dtype=float)
    bad = ~empty.to_numpy() & ~np.isfinite(values)
    if np.any(bad):
        row = int(np.flatnonzero(bad)[0])
        line_number = row + FIRST_DATA_LINE
        raise SessionFormatError(
            f"第 {line_number} 行 {column} 列不是有效数值: {frame[column].iloc[row]!r}",
            line_number=line_number, column=column)
    return values


def _vector_or_none(row: np.ndarray) -> Optional[Vec3]:
    if np.any(np.isnan(row)):
        return None
    return Vec3(float(row[0]), float(row[1]), float(row[2]))


def _optional(value: float) -> Optional[float]:
    return None if np.isnan(value) else float(value)


def parse_session(source: Union[str, Path, TextIO],
                  scene: Optional[SceneGeometry] = None,
                  protocol: Optional[StimulusProtocol] = None,
                  session_id: Optional[str] = None) -> Session:
    """
    解析会话CSV

    Args:
        source: 文件路径或文本流
        scene: 场景几何，缺省时取协议的场景或空房间
        protocol: 会话对应的刺激协议
        session_id: 会话标识，缺省时取文件名

    Returns:
        Session: 未预处理的会话（只含 samples）
    """
    if isinstance(source, (str, Path)):
        session_id = session_id or Path(source).stem
    try:
        frame = pd.read_csv(source, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise SessionFormatError("会话文件为空，缺少表头")
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise SessionFormatError(f"会话文件无法解析: {e}")

    frame.columns = [str(c).strip() for c in frame.columns]
    for column in SESSION_COLUMNS:
        if column not in frame.columns:
            raise SessionFormatError(f"会话文件缺少列: {column}", column=column)
    unexpected = [c for c in frame.columns if c not in SESSION_COLUMNS]
    if unexpected:
        raise SessionFormatError(f"会话文件包含未知列: {unexpected[0]}", column=unexpected[0])

    columns = {column: _numeric_column(frame, column) for column in SESSION_COLUMNS}
    timestamps = columns["timestamp_ms"]
    missing_time = np.isnan(timestamps)
    if np.any(missing_time):
        row = int(np.flatnonzero(missing_time)[0])
        raise SessionFormatError(f"第 {row + FIRST_DATA_LINE} 行缺少 timestamp_ms",
                                 line_number=row + FIRST_DATA_LINE, column="timestamp_ms")
    backwards = np.flatnonzero(np.diff(timestamps) < 0)
    if backwards.size:
        row = int(backwards[0]) + 1
        raise SessionFormatError(f"第 {row + FIRST_DATA_LINE} 行的 timestamp_ms 小于上一行",
                                 line_number=row + FIRST_DATA_LINE, column="timestamp_ms")

    origins = np.column_stack([columns[c] for c in ORIGIN_COLUMNS])
    directions = np.column_stack([columns[c] for c in DIRECTION_COLUMNS])
    # 眼动仪以零向量表示无效方向
    zero_direction = np.all(directions == 0.0, axis=1)
    directions[zero_direction] = np.nan
    headsets = np.column_stack([columns[c] for c in HEADSET_COLUMNS])

    samples = [
        GazeSample(
            timestamp=float(timestamps[i]),
            gaze_origin=_vector_or_none(origins[i]),
            gaze_direction=_vector_or_none(directions[i]),
            headset_position=_vector_or_none(headsets[i]),
            pupil_diameter_left=_optional(columns["pupil_left_mm"][i]),
            pupil_diameter_right=_optional(columns["pupil_right_mm"][i]),
            eye_openness_left=_optional(columns["openness_left"][i]),
            eye_openness_right=_optional(columns["openness_right"][i]),
        )
        for i in range(len(frame))
    ]
    invalid = sum(1 for s in samples if not s.valid)
    logger.debug(f"会话 {session_id}: 读取 {len(samples)} 行，其中 {invalid} 行缺少注视数据")

    if scene is None:
        scene = protocol.scene if protocol else SceneGeometry()
    return Session(samples=samples, scene=scene, session_id=session_id or "", protocol=protocol)


def parse_session_text(text: str, **kwargs) -> Session:
    """从字符串解析会话（测试与管道拼接用）"""
    return parse_session(io.StringIO(text), **kwargs)


def _nan_if_none(value: Optional[float]) -> float:
    return np.nan if value is None else value


def samples_to_frame(samples: Sequence[GazeSample]) -> pd.DataFrame:
    """把样本写回会话CSV的列布局，缺失值为空单元格"""
    rows = []
    for s in samples:
        row = {"timestamp_ms": s.timestamp}
        for columns, vector in ((ORIGIN_COLUMNS, s.gaze_origin),
                                (DIRECTION_COLUMNS, s.gaze_direction),
                                (HEADSET_COLUMNS, s.headset_position)):
            for column, value in zip(columns, vector if vector is not None else (np.nan, np.nan, np.nan)):
                row[column] = value
        row["pupil_left_mm"] = _nan_if_none(s.pupil_diameter_left)
        row["pupil_right_mm"] = _nan_if_none(s.pupil_diameter_right)
        row["openness_left"] = _nan_if_none(s.eye_openness_left)
        row["openness_right"] = _nan_if_none(s.eye_openness_right)
        rows.append(row)
    return pd.DataFrame(rows, columns=SESSION_COLUMNS)
