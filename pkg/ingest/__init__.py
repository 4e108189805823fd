"""
数据读取与预处理模块
Session Ingest Module
"""

from .session_reader import (
    SESSION_COLUMNS,
    GazeSample,
    GazePoint,
    Session,
    parse_session,
    parse_session_text,
    samples_to_frame,
)
from .preprocess import (
    fill_missing,
    convert_handedness,
    offset_origin,
    raycast_points,
    velocity_series,
    compute_velocities,
    preprocess_session,
    protocol_path_for,
    load_session,
)

__all__ = [
    'SESSION_COLUMNS',
    'GazeSample',
    'GazePoint',
    'Session',
    'parse_session',
    'parse_session_text',
    'samples_to_frame',
    'fill_missing',
    'convert_handedness',
    'offset_origin',
    'raycast_points',
    'velocity_series',
    'compute_velocities',
    'preprocess_session',
    'protocol_path_for',
    'load_session',
]
