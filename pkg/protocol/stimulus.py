"""
刺激协议模块
Stimulus Protocol Module

单目标与多目标两种刺激任务：目标位置、出现时刻、停留时长以及场景几何，
是指标计算与仿真器共用的真值
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from geometry import Room, SceneGeometry, Sphere, Vec3, angle_at_origin, sphere_angular_radius
from utils.errors import InvalidConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_CUBE_CENTER = Vec3(0.0, 1.2, 2.2)
DEFAULT_CUBE_SIDE = 1.6
DEFAULT_DWELL_MS = 1500.0
DEFAULT_N_TARGETS = 20
DEFAULT_SPHERE_RADIUS = 0.05
DEFAULT_VIEWER_ORIGIN = Vec3(0.0, 1.2, 0.0)

ONSET_TOLERANCE_MS = 1e-6

# 单目标任务：相邻目标的最小视角，以及任意两球视锥之间的余量
MIN_TARGET_SEPARATION_DEG = 10.0
SIGHT_LINE_MARGIN_DEG = 0.5
MAX_DRAW_ATTEMPTS = 10000

# 主序列模型与扫视潜伏期，指标与仿真器共用
SACCADIC_LATENCY_MS = 200.0
SACCADE_DURATION_SLOPE = 2.2
SACCADE_DURATION_INTERCEPT = 21.0


class TaskKind(str, Enum):
    SINGLE_TARGET = "single-target"
    MULTI_TARGET = "multi-target"

    @classmethod
    def parse(cls, value: Union[str, "TaskKind"]) -> "TaskKind":
        if isinstance(value, TaskKind):
            return value
        aliases = {"single": cls.SINGLE_TARGET, "multi": cls.MULTI_TARGET}
        key = str(value).strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise InvalidConfigurationError(f"未知的任务类型: {value!r}（可选 single / multi）")


@dataclass(frozen=True)
class StimulusTarget:
    position: Vec3
    onset: float
    dwell: float

    @property
    def offset(self) -> float:
        return self.onset + self.dwell


@dataclass(frozen=True)
class StimulusSaccade:
    from_index: int
    to_index: int
    amplitude: float

    @property
    def degenerate(self) -> bool:
        return self.amplitude <= 0.0


@dataclass(frozen=True)
class StimulusProtocol:
    """刺激协议：有序目标 + 场景几何 + 名义观察点"""

    targets: Tuple[StimulusTarget, ...]
    scene: SceneGeometry
    task_kind: TaskKind
    viewer_origin: Vec3 = DEFAULT_VIEWER_ORIGIN
    protocol_id: str = ""

    def __post_init__(self):
        if not self.targets:
            raise InvalidConfigurationError("协议至少需要一个目标")
        for index, target in enumerate(self.targets):
            if not target.dwell > 0:
                raise InvalidConfigurationError(f"目标 {index} 的停留时长必须为正: {target.dwell}")
            if not self.scene.room.contains(target.position):
                raise InvalidConfigurationError(f"目标 {index} 的位置 {target.position} 不在房间内")
            if index > 0:
                previous = self.targets[index - 1]
                if abs(target.onset - previous.offset) > ONSET_TOLERANCE_MS:
                    raise InvalidConfigurationError(
                        f"目标 {index} 的出现时刻 {target.onset} 与上一目标结束时刻 {previous.offset} 不衔接")

    @property
    def n_targets(self) -> int:
        return len(self.targets)

    @property
    def start_ms(self) -> float:
        return self.targets[0].onset

    @property
    def end_ms(self) -> float:
        return self.targets[-1].offset

    @property
    def total_dwell(self) -> float:
        return sum(target.dwell for target in self.targets)

    def target_index_at(self, t: float) -> int:
        """时刻 t 所在停留窗口的目标下标（越界时取首/末目标）"""
        for index, target in enumerate(self.targets):
            if t < target.offset:
                return index
        return len(self.targets) - 1


def saccade_duration(amplitude: float) -> float:
    """主序列模型：幅度（度）→ 扫视时长（毫秒）"""
    return SACCADE_DURATION_SLOPE * amplitude + SACCADE_DURATION_INTERCEPT


def _cube_bounds(center: Sequence[float], side: float) -> Tuple[np.ndarray, np.ndarray]:
    half = side / 2.0
    center = np.asarray(center, dtype=float)
    return center - half, center + half


def _clear_line_of_sight(candidate: Vec3, placed: Sequence[Vec3], viewer: Vec3, radius: float) -> bool:
    """candidate 与已放置的球体从 viewer 看去互不遮挡"""
    own = sphere_angular_radius(Sphere(candidate, radius), viewer)
    for other in placed:
        limit = own + sphere_angular_radius(Sphere(other, radius), viewer) + SIGHT_LINE_MARGIN_DEG
        if angle_at_origin(viewer, candidate, other) <= limit:
            return False
    return True


def _draw_single_moves(rng: np.random.Generator, low: np.ndarray, high: np.ndarray, start: Vec3,
                       n_moves: int, viewer: Vec3, radius: float) -> List[Vec3]:
    """
    逐个抽取单目标任务的移动位置

    每个新位置与上一目标的视角不小于 MIN_TARGET_SEPARATION_DEG，且不与任何已放置的球体互相遮挡。
    """
    positions = [start]
    for move in range(n_moves):
        for _ in range(MAX_DRAW_ATTEMPTS):
            candidate = Vec3.of(rng.uniform(low, high))
            if angle_at_origin(viewer, positions[-1], candidate) < MIN_TARGET_SEPARATION_DEG:
                continue
            if _clear_line_of_sight(candidate, positions, viewer, radius):
                break
        else:
            raise InvalidConfigurationError(
                f"第 {move + 1} 次移动在 {MAX_DRAW_ATTEMPTS} 次抽样内找不到满足间隔与遮挡条件的位置，"
                f"请增大立方体或减少目标数")
        positions.append(candidate)
    return positions


def generate_protocol(task_kind: Union[str, TaskKind],
                      seed: int,
                      n_targets: int = DEFAULT_N_TARGETS,
                      dwell: float = DEFAULT_DWELL_MS,
                      cube_center: Sequence[float] = DEFAULT_CUBE_CENTER,
                      cube_side: float = DEFAULT_CUBE_SIDE,
                      sphere_radius: float = DEFAULT_SPHERE_RADIUS,
                      room: Optional[Room] = None,
                      viewer_origin: Sequence[float] = DEFAULT_VIEWER_ORIGIN,
                      protocol_id: Optional[str] = None) -> StimulusProtocol:
    """
    按种子生成刺激协议

    Args:
        task_kind: single / multi
        seed: 随机种子，相同种子生成相同协议
        n_targets: 单目标任务为中心之后的移动次数（相邻目标至少相隔 MIN_TARGET_SEPARATION_DEG，
            球体互不遮挡）；多目标任务为球体总数
        dwell: 每个目标的停留时长（毫秒）
        cube_center: 目标立方体中心
        cube_side: 立方体边长
        sphere_radius: 球体半径（米）
        room: 房间，默认远墙 z = 4.9
        viewer_origin: 名义眼睛位置
        protocol_id: 协议标识，默认由任务类型和种子组成

    Returns:
        StimulusProtocol: 生成的协议
    """
    kind = TaskKind.parse(task_kind)
    if n_targets < 2:
        raise InvalidConfigurationError(f"n_targets 必须 ≥ 2，当前值: {n_targets}")
    if not dwell > 0:
        raise InvalidConfigurationError(f"dwell 必须为正，当前值: {dwell}")

    room = room or Room()
    low, high = _cube_bounds(cube_center, cube_side)
    if not (room.contains(low) and room.contains(high)):
        raise InvalidConfigurationError(f"目标立方体 [{low.tolist()}, {high.tolist()}] 超出房间范围")

    rng = np.random.default_rng(seed)
    center = Vec3.of(cube_center)

    if kind is TaskKind.SINGLE_TARGET:
        positions = _draw_single_moves(rng, low, high, center, n_targets, Vec3.of(viewer_origin), float(sphere_radius))
        sphere_positions = positions
    else:
        others = rng.uniform(low, high, size=(n_targets - 1, 3))
        sphere_positions = [center] + [Vec3.of(row) for row in others]
        order = [0] + [int(i) + 1 for i in rng.permutation(n_targets - 1)]
        positions = [sphere_positions[i] for i in order]

    targets = tuple(
        StimulusTarget(position=position, onset=index * float(dwell), dwell=float(dwell))
        for index, position in enumerate(positions)
    )
    scene = SceneGeometry(room=room,
                          spheres=tuple(Sphere(center=p, radius=float(sphere_radius)) for p in sphere_positions))
    identifier = protocol_id or f"{kind.value}-seed{seed}"
    logger.debug(f"生成协议 {identifier}: {len(targets)} 个目标")
    return StimulusProtocol(targets=targets, scene=scene, task_kind=kind,
                            viewer_origin=Vec3.of(viewer_origin), protocol_id=identifier)


def stimulus_saccades(protocol: StimulusProtocol) -> List[StimulusSaccade]:
    """相邻目标之间的刺激扫视及其幅度（以 viewer_origin 为顶点）"""
    saccades = []
    for index in range(1, protocol.n_targets):
        before = protocol.targets[index - 1].position
        after = protocol.targets[index].position
        amplitude = angle_at_origin(protocol.viewer_origin, before, after)
        saccade = StimulusSaccade(from_index=index - 1, to_index=index, amplitude=amplitude)
        if saccade.degenerate:
            logger.warning(f"⚠️ 协议 {protocol.protocol_id} 的目标 {index - 1} 与 {index} 重合，扫视幅度为 0")
        saccades.append(saccade)
    return saccades
