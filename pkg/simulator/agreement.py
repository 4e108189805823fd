"""
标注一致性模块
Label Agreement Module
"""

from typing import Tuple

import numpy as np

from classifiers import FIXATION, LabeledStream
from utils.errors import ContractError
from .gaze_simulator import BLINK, GroundTruth

MIN_RECALL_OVERLAP = 0.5


def label_agreement(ground_truth: GroundTruth, stream: LabeledStream,
                    timestamps=None) -> Tuple[float, float]:
    """
    分类结果与真值的一致性

    Args:
        ground_truth: 与 stream 等长（已对齐）的真值
        stream: 分类结果
        timestamps: 样本时间戳；缺省时按样本数计算重叠

    Returns:
        Tuple[float, float]: (样本准确率（不计眨眼样本）, 注视召回率)
    """
    if len(ground_truth) != len(stream):
        raise ContractError(f"真值长度 {len(ground_truth)} 与标注长度 {len(stream)} 不一致")
    times = np.arange(len(stream), dtype=float) if timestamps is None else np.asarray(timestamps, dtype=float)

    counted = ground_truth.labels != BLINK
    if np.any(counted):
        truth_fixation = ground_truth.labels[counted] == FIXATION
        detected_fixation = stream.labels[counted] == FIXATION
        accuracy = float(np.mean(truth_fixation == detected_fixation))
    else:
        accuracy = 1.0

    if not ground_truth.fixations:
        return accuracy, 1.0
    recalled = 0
    for true in ground_truth.fixations:
        start, end = times[true.first_index], times[true.last_index]
        length = end - start
        for detected in stream.fixations:
            overlap = min(end, times[detected.last_index]) - max(start, times[detected.first_index])
            if length > 0 and overlap >= MIN_RECALL_OVERLAP * length:
                recalled += 1
                break
            if length == 0 and detected.first_index <= true.first_index <= detected.last_index:
                recalled += 1
                break
    return accuracy, recalled / len(ground_truth.fixations)
