"""
场景与射线求交模块
Scene and Ray Intersection Module

房间盒子 + 球体的场景几何，射线与平面/场景的求交
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from utils.errors import InvalidArgumentError
from .vectors import Vec3, add, dot, norm, normalize, scale, sub

UNIT_TOLERANCE = 1e-6
PARALLEL_EPSILON = 1e-9
# 起点在球面上时排除 t≈0 的自交
HIT_EPSILON = 1e-9

DEFAULT_ROOM_MIN = Vec3(-5.0, -3.0, -4.9)
DEFAULT_ROOM_MAX = Vec3(5.0, 5.4, 4.9)

# surface：球面入射点；focus：射线上离球心最近的点（注视焦点，与半径无关）
SPHERE_HIT_MODES = ("surface", "focus")


def _require_unit(vector: Vec3, name: str) -> None:
    if abs(norm(vector) - 1.0) > UNIT_TOLERANCE:
        raise InvalidArgumentError(f"{name} 必须是单位向量，当前模长 {norm(vector)}")


@dataclass(frozen=True)
class Ray:
    origin: Vec3
    direction: Vec3

    def __post_init__(self):
        _require_unit(self.direction, "射线方向")

    @classmethod
    def through(cls, origin: Sequence[float], point: Sequence[float]) -> "Ray":
        """从 origin 指向 point 的射线"""
        return cls(Vec3.of(origin), normalize(sub(point, origin)))

    def at(self, t: float) -> Vec3:
        return add(self.origin, scale(self.direction, t))


@dataclass(frozen=True)
class Plane:
    point: Vec3
    normal: Vec3

    def __post_init__(self):
        _require_unit(self.normal, "平面法向量")


@dataclass(frozen=True)
class Sphere:
    center: Vec3
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidArgumentError(f"球体半径必须为正: {self.radius}")


@dataclass(frozen=True)
class Room:
    """轴对齐的封闭房间"""

    minimum: Vec3 = DEFAULT_ROOM_MIN
    maximum: Vec3 = DEFAULT_ROOM_MAX

    def __post_init__(self):
        if not all(lo < hi for lo, hi in zip(self.minimum, self.maximum)):
            raise InvalidArgumentError(f"房间边界非法: min={self.minimum}, max={self.maximum}")

    def contains(self, point: Sequence[float]) -> bool:
        return all(lo <= c <= hi for lo, c, hi in zip(self.minimum, point, self.maximum))

    @property
    def far_wall_z(self) -> float:
        return self.maximum.z


@dataclass(frozen=True)
class SceneGeometry:
    room: Room = field(default_factory=Room)
    spheres: Tuple[Sphere, ...] = ()


def ray_plane_intersection(ray: Ray, plane: Plane) -> Optional[Vec3]:
    """
    射线与平面求交

    Returns:
        Optional[Vec3]: 交点；射线与平面平行或交点在起点之后时返回 None
    """
    denominator = dot(plane.normal, ray.direction)
    if abs(denominator) < PARALLEL_EPSILON:
        return None
    t = dot(plane.normal, sub(plane.point, ray.origin)) / denominator
    if t < 0:
        return None
    return ray.at(t)


def intersect_scene(origins: np.ndarray, directions: np.ndarray, scene: SceneGeometry,
                    sphere_hit: str = "surface") -> np.ndarray:
    """
    批量射线与场景求交

    Args:
        origins: (N, 3) 射线起点，必须都在房间内
        directions: (N, 3) 射线方向（内部会单位化）
        scene: 场景几何
        sphere_hit: 命中球体时报告的点，surface 或 focus；遮挡顺序总按球面入射点判断

    Returns:
        np.ndarray: (N, 3) 最近交点；命中墙面时对应坐标精确等于墙面值
    """
    if sphere_hit not in SPHERE_HIT_MODES:
        raise InvalidArgumentError(f"未知的球体命中点: {sphere_hit}（可选 {', '.join(SPHERE_HIT_MODES)}）")
    origins = np.asarray(origins, dtype=float).reshape(-1, 3)
    directions = np.asarray(directions, dtype=float).reshape(-1, 3)
    lengths = np.linalg.norm(directions, axis=1)
    if np.any(lengths == 0) or not np.all(np.isfinite(lengths)):
        raise InvalidArgumentError("射线方向中存在零向量或非有限值")
    directions = directions / lengths[:, None]

    room_min = np.asarray(scene.room.minimum, dtype=float)
    room_max = np.asarray(scene.room.maximum, dtype=float)
    inside = np.all((origins >= room_min) & (origins <= room_max), axis=1)
    if not np.all(inside):
        first = int(np.flatnonzero(~inside)[0])
        raise InvalidArgumentError(f"射线起点 {tuple(origins[first])} 在房间外（样本 {first}）")

    with np.errstate(divide="ignore", invalid="ignore"):
        bound = np.where(directions > 0, room_max, room_min)
        t_axis = np.where(directions != 0, (bound - origins) / directions, np.inf)
    exit_axis = np.argmin(t_axis, axis=1)
    rows = np.arange(len(origins))
    t_best = t_axis[rows, exit_axis]
    points = origins + t_best[:, None] * directions
    points[rows, exit_axis] = bound[rows, exit_axis]

    for sphere in scene.spheres:
        center = np.asarray(sphere.center, dtype=float)
        offset = origins - center
        b = np.einsum("ij,ij->i", offset, directions)
        c = np.einsum("ij,ij->i", offset, offset) - sphere.radius ** 2
        discriminant = b * b - c
        hit = discriminant >= 0
        root = np.sqrt(np.where(hit, discriminant, 0.0))
        near = -b - root
        far = -b + root
        t_sphere = np.where(near > HIT_EPSILON, near, np.where(far > HIT_EPSILON, far, np.inf))
        t_sphere = np.where(hit, t_sphere, np.inf)
        closer = t_sphere < t_best
        if np.any(closer):
            t_best = np.where(closer, t_sphere, t_best)
            t_report = np.where(-b > HIT_EPSILON, -b, t_sphere) if sphere_hit == "focus" else t_sphere
            points[closer] = origins[closer] + t_report[closer, None] * directions[closer]
    return points


def ray_scene_intersection(ray: Ray, scene: SceneGeometry) -> Vec3:
    """单条射线与场景的最近交点（房间封闭，总有交点）"""
    hit = intersect_scene(np.asarray([ray.origin]), np.asarray([ray.direction]), scene)[0]
    return Vec3(float(hit[0]), float(hit[1]), float(hit[2]))


def sphere_angular_radius(sphere: Sphere, eye: Sequence[float]) -> float:
    """球体在 eye 处的角半径（度）"""
    distance = norm(sub(sphere.center, eye))
    if distance <= sphere.radius:
        return 90.0
    return math.degrees(math.asin(sphere.radius / distance))
