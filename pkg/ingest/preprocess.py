"""
会话预处理模块
Session Preprocessing Module

缺失数据填充 → 左右手坐标系转换 → 眼睛位置偏移 → 射线求交 → 角速度
"""

import logging
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from geometry import SceneGeometry, Vec3, add, intersect_scene
from protocol import StimulusProtocol, load_protocol
from utils.config import PRECISE_VELOCITY_CONSTANT
from utils.errors import ContractError, DegenerateTimestepError, EmptySessionError
from .session_reader import GazePoint, GazeSample, Session, parse_session

logger = logging.getLogger(__name__)

PROTOCOL_SUFFIX = ".protocol.json"


def fill_missing(samples: Sequence[GazeSample]) -> Tuple[List[GazeSample], int]:
    """
    用最近一个有效值填充缺失的注视数据

    Args:
        samples: 原始样本

    Returns:
        Tuple[List[GazeSample], int]: (填充后的样本, 被填充的样本数)；
        第一个完整有效样本之前的样本被丢弃
    """
    first_valid = next((i for i, s in enumerate(samples) if s.valid), None)
    if first_valid is None:
        raise EmptySessionError(f"会话中 {len(samples)} 个样本全部缺少注视数据")

    last_origin = samples[first_valid].gaze_origin
    last_direction = samples[first_valid].gaze_direction
    last_headset = samples[first_valid].headset_position
    filled: List[GazeSample] = []
    count = 0
    for sample in samples[first_valid:]:
        if sample.valid:
            last_origin = sample.gaze_origin
            last_direction = sample.gaze_direction
            last_headset = sample.headset_position
            filled.append(sample)
            continue
        count += 1
        filled.append(replace(
            sample,
            gaze_origin=sample.gaze_origin if sample.gaze_origin is not None else last_origin,
            gaze_direction=sample.gaze_direction if sample.gaze_direction is not None else last_direction,
            headset_position=sample.headset_position if sample.headset_position is not None else last_headset,
        ))
        # 只有完整有效的字段才会成为后续的填充来源
        if sample.gaze_origin is not None:
            last_origin = sample.gaze_origin
        if sample.gaze_direction is not None:
            last_direction = sample.gaze_direction
        if sample.headset_position is not None:
            last_headset = sample.headset_position

    if first_valid:
        logger.warning(f"⚠️ 丢弃开头 {first_valid} 个无效样本")
    return filled, count


def _negate_x(vector: Optional[Vec3]) -> Optional[Vec3]:
    if vector is None:
        return None
    return Vec3(-vector.x, vector.y, vector.z)


def convert_handedness(samples: Sequence[GazeSample]) -> List[GazeSample]:
    """右手系（眼动仪）→ 左手系（场景）：注视原点与方向的 X 分量取反"""
    return [
        replace(s, gaze_origin=_negate_x(s.gaze_origin), gaze_direction=_negate_x(s.gaze_direction))
        for s in samples
    ]


def offset_origin(samples: Sequence[GazeSample]) -> List[GazeSample]:
    """眼睛局部原点加上头显位置得到世界坐标"""
    return [
        replace(s, gaze_origin=add(s.gaze_origin, s.headset_position))
        if s.gaze_origin is not None and s.headset_position is not None else s
        for s in samples
    ]


def raycast_points(samples: Sequence[GazeSample], scene: SceneGeometry,
                   sphere_hit: str = "surface") -> List[GazePoint]:
    """每个样本的注视射线与场景求交，得到一一对应的注视点（sphere_hit 见 intersect_scene）"""
    if not samples:
        return []
    origins = np.asarray([s.gaze_origin for s in samples], dtype=float)
    directions = np.asarray([s.gaze_direction for s in samples], dtype=float)
    directions = directions / np.linalg.norm(directions, axis=1)[:, None]
    hits = intersect_scene(origins, directions, scene, sphere_hit=sphere_hit)
    return [
        GazePoint(position=Vec3.of(hits[i]), timestamp=s.timestamp,
                  origin=Vec3.of(origins[i]), direction=Vec3.of(directions[i]))
        for i, s in enumerate(samples)
    ]


def velocity_series(timestamps: np.ndarray,
                    directions: np.ndarray,
                    velocity_constant: float = PRECISE_VELOCITY_CONSTANT) -> np.ndarray:
    """
    相邻方向之间的角速度（度/秒）

    Args:
        timestamps: (N,) 毫秒时间戳
        directions: (N, 3) 注视方向
        velocity_constant: rad/ms → deg/s 的换算常数

    Returns:
        np.ndarray: (N,) 角速度；最后一个值复制倒数第二个
    """
    timestamps = np.asarray(timestamps, dtype=float)
    directions = np.asarray(directions, dtype=float)
    if len(timestamps) < 2:
        raise ContractError(f"计算速度至少需要 2 个样本，当前 {len(timestamps)} 个")
    if len(directions) != len(timestamps):
        raise ContractError(f"时间戳数量 {len(timestamps)} 与方向数量 {len(directions)} 不一致")

    steps = np.abs(np.diff(timestamps))
    duplicates = np.flatnonzero(steps == 0)
    if duplicates.size:
        index = int(duplicates[0])
        raise DegenerateTimestepError(f"样本 {index} 与 {index + 1} 的时间戳相同: {timestamps[index]}", index)

    lengths = np.linalg.norm(directions, axis=1)
    cosines = np.einsum("ij,ij->i", directions[:-1], directions[1:]) / (lengths[:-1] * lengths[1:])
    angles = np.arccos(np.clip(cosines, -1.0, 1.0))
    velocities = np.empty(len(timestamps), dtype=float)
    velocities[:-1] = angles / steps * velocity_constant
    velocities[-1] = velocities[-2]
    return velocities


def compute_velocities(points: Sequence[GazePoint],
                       directions: Optional[Sequence[Sequence[float]]] = None,
                       velocity_constant: float = PRECISE_VELOCITY_CONSTANT) -> List[GazePoint]:
    """为注视点附加角速度；directions 缺省时使用注视点自带的方向"""
    if directions is None:
        directions = [p.direction for p in points]
    velocities = velocity_series(np.asarray([p.timestamp for p in points]),
                                 np.asarray(directions, dtype=float),
                                 velocity_constant)
    return [replace(p, velocity=float(v)) for p, v in zip(points, velocities)]


def preprocess_session(session: Session,
                       velocity_constant: float = PRECISE_VELOCITY_CONSTANT) -> Session:
    """
    完整预处理流程，返回新的会话对象（输入不被修改）

    Args:
        session: parse_session 得到的原始会话
        velocity_constant: 速度换算常数

    Returns:
        Session: 带 points 与 numpy 缓存数组的会话
    """
    filled, count = fill_missing(session.samples)
    dropped = len(session.samples) - len(filled)
    if count:
        logger.warning(f"⚠️ 会话 {session.session_id}: 填充了 {count} 个缺失样本")

    converted = offset_origin(convert_handedness(filled))
    # 命中球体取注视焦点，注视位置与球体半径无关
    points = raycast_points(converted, session.scene, sphere_hit="focus")
    points = compute_velocities(points, velocity_constant=velocity_constant)

    return Session(
        samples=converted,
        scene=session.scene,
        session_id=session.session_id,
        protocol=session.protocol,
        points=points,
        filled_count=count,
        dropped_count=dropped,
        timestamps=np.asarray([p.timestamp for p in points], dtype=float),
        positions=np.asarray([p.position for p in points], dtype=float),
        origins=np.asarray([p.origin for p in points], dtype=float),
        directions=np.asarray([p.direction for p in points], dtype=float),
        velocities=np.asarray([p.velocity for p in points], dtype=float),
    )


def protocol_path_for(session_path: Union[str, Path]) -> Path:
    path = Path(session_path)
    return path.with_name(path.stem + PROTOCOL_SUFFIX)


def load_session(path: Union[str, Path],
                 protocol: Optional[StimulusProtocol] = None,
                 velocity_constant: float = PRECISE_VELOCITY_CONSTANT) -> Session:
    """
    读取并预处理会话文件；协议缺省时读取同目录的 <stem>.protocol.json

    Args:
        path: 会话CSV路径
        protocol: 已加载的协议（可选）
        velocity_constant: 速度换算常数

    Returns:
        Session: 预处理后的会话
    """
    path = Path(path)
    if protocol is None:
        sidecar = protocol_path_for(path)
        if sidecar.exists():
            protocol = load_protocol(sidecar)
        else:
            logger.warning(f"⚠️ 未找到会话 {path.stem} 的协议文件 {sidecar.name}，使用空房间场景")
    raw = parse_session(path, protocol=protocol)
    return preprocess_session(raw, velocity_constant=velocity_constant)
