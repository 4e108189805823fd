"""
三维向量与视角模块
3D Vector and Visual Angle Module

所有模块共享的向量代数、视角计算与质心
"""

import math
from typing import Iterable, NamedTuple, Sequence

from utils.errors import InvalidArgumentError


class Vec3(NamedTuple):
    """三维向量：位置（米）或方向（无量纲）"""

    x: float
    y: float
    z: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "Vec3":
        return cls(float(values[0]), float(values[1]), float(values[2]))


def add(a: Sequence[float], b: Sequence[float]) -> Vec3:
    return Vec3(a[0] + b[0], a[1] + b[1], a[2] + b[2])


def sub(a: Sequence[float], b: Sequence[float]) -> Vec3:
    return Vec3(a[0] - b[0], a[1] - b[1], a[2] - b[2])


def scale(a: Sequence[float], factor: float) -> Vec3:
    return Vec3(a[0] * factor, a[1] * factor, a[2] * factor)


def dot(a: Sequence[float], b: Sequence[float]) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def norm(a: Sequence[float]) -> float:
    return math.sqrt(dot(a, a))


def is_finite(a: Sequence[float]) -> bool:
    return math.isfinite(a[0]) and math.isfinite(a[1]) and math.isfinite(a[2])


def normalize(a: Sequence[float]) -> Vec3:
    """单位化；零向量或非有限向量抛出 InvalidArgumentError"""
    n = norm(a)
    if not math.isfinite(n) or n == 0.0:
        raise InvalidArgumentError(f"无法单位化向量 {tuple(a)}")
    return Vec3(a[0] / n, a[1] / n, a[2] / n)


def visual_angle(a: Sequence[float], b: Sequence[float]) -> float:
    """
    两个方向之间的视角

    Args:
        a: 方向向量（不必是单位向量，但不能为零）
        b: 方向向量

    Returns:
        float: 夹角，单位为度，范围 [0, 180]
    """
    if not (is_finite(a) and is_finite(b)):
        raise InvalidArgumentError(f"视角计算的输入必须是有限值: {tuple(a)}, {tuple(b)}")
    na = norm(a)
    nb = norm(b)
    if na == 0.0 or nb == 0.0:
        raise InvalidArgumentError(f"视角计算的输入不能是零向量: {tuple(a)}, {tuple(b)}")
    cosine = dot(a, b) / (na * nb)
    # 舍入可能使点积略超出 [-1, 1]
    cosine = min(1.0, max(-1.0, cosine))
    return math.degrees(math.acos(cosine))


def angle_at_origin(origin: Sequence[float], p: Sequence[float], q: Sequence[float]) -> float:
    """以 origin 为顶点，p 与 q 之间的视角（度）"""
    dp = sub(p, origin)
    dq = sub(q, origin)
    if dp == (0.0, 0.0, 0.0) or dq == (0.0, 0.0, 0.0):
        raise InvalidArgumentError(f"点与视角顶点重合: origin={tuple(origin)}, p={tuple(p)}, q={tuple(q)}")
    return visual_angle(dp, dq)


def centroid(points: Iterable[Sequence[float]]) -> Vec3:
    """
    点集质心

    各分量用 math.fsum 求和（结果为精确和的正确舍入），
    因此与输入顺序无关。
    """
    xs, ys, zs = [], [], []
    for p in points:
        xs.append(p[0])
        ys.append(p[1])
        zs.append(p[2])
    if not xs:
        raise InvalidArgumentError("不能对空点集计算质心")
    count = len(xs)
    return Vec3(math.fsum(xs) / count, math.fsum(ys) / count, math.fsum(zs) / count)


def chord_length(range_m: float, angle_deg: float) -> float:
    """距离 range_m 处张角 angle_deg 对应的弦长"""
    return 2.0 * range_m * math.sin(math.radians(angle_deg) / 2.0)
