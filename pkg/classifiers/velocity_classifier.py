"""
速度阈值分类器（IVT）
Velocity-Threshold Classifier
"""

import logging
from typing import List

import numpy as np

from .base import (
    FIXATION,
    SACCADE,
    ClassifierParams,
    LabeledStream,
    as_gaze_arrays,
    build_fixation,
    label_runs,
)

logger = logging.getLogger(__name__)


def velocity_mask(velocities, velocity_threshold: float) -> np.ndarray:
    """v_i < Vel 的样本；恰好等于阈值时为扫视"""
    return np.asarray(velocities, dtype=float) < velocity_threshold


def classify_ivt(points, params: ClassifierParams) -> LabeledStream:
    """
    IVT：速度低于阈值的极大连续段各成为一个注视，不做时长过滤

    单样本段的时长为 0，同样输出。

    Args:
        points: 预处理后的会话或注视点序列（带速度）
        params: 需要 velocity_threshold

    Returns:
        LabeledStream: 标注与注视
    """
    params.require("velocity_threshold")
    arrays = as_gaze_arrays(points)
    mask = velocity_mask(arrays.velocities, params.velocity_threshold)
    labels = np.where(mask, FIXATION, SACCADE).astype(np.int8)
    fixations = [build_fixation([run], arrays) for run in label_runs(labels, FIXATION)]
    logger.debug(f"IVT: {len(fixations)} 个注视 (Vel={params.velocity_threshold})")
    return LabeledStream(labels=labels, fixations=fixations, algorithm="ivt", params=params)
