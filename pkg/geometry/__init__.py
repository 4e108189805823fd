"""
几何模块
Geometry Module
"""

from .vectors import (
    Vec3,
    add,
    sub,
    scale,
    dot,
    norm,
    normalize,
    visual_angle,
    angle_at_origin,
    centroid,
    chord_length,
)
from .scene import (
    Ray,
    Plane,
    Sphere,
    Room,
    SceneGeometry,
    ray_plane_intersection,
    ray_scene_intersection,
    intersect_scene,
    sphere_angular_radius,
    SPHERE_HIT_MODES,
)

__all__ = [
    'Vec3',
    'add',
    'sub',
    'scale',
    'dot',
    'norm',
    'normalize',
    'visual_angle',
    'angle_at_origin',
    'centroid',
    'chord_length',
    'Ray',
    'Plane',
    'Sphere',
    'Room',
    'SceneGeometry',
    'ray_plane_intersection',
    'ray_scene_intersection',
    'intersect_scene',
    'sphere_angular_radius',
    'SPHERE_HIT_MODES',
]
