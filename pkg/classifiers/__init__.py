"""
注视/扫视分类模块
Fixation and Saccade Classifiers
"""

from .base import (
    SACCADE,
    FIXATION,
    LABEL_NAMES,
    ClassifierParams,
    Fixation,
    LabeledStream,
    GazeArrays,
    CandidateGroup,
    as_gaze_arrays,
    label_runs,
    resolve_groups,
    resolve_merge_mode,
    AUTO_MERGE_MODES,
)
from .velocity_classifier import classify_ivt, velocity_mask
from .dispersion_classifier import classify_idt, dispersion_groups, idt_stream
from .hybrid_classifier import (
    classify_ivdt,
    classify_mivdt,
    correct_samples,
    velocity_groups,
    ivdt_stream,
)
from .registry import (
    CLASSIFIERS,
    ALGORITHM_NAMES,
    PAPER_OPTIMAL_PRESETS,
    ClassifierInfo,
    create_classifier,
    classify,
    build_params,
    write_fixations_csv,
    write_labels_csv,
    read_classification,
)

__all__ = [
    'SACCADE',
    'FIXATION',
    'LABEL_NAMES',
    'ClassifierParams',
    'Fixation',
    'LabeledStream',
    'GazeArrays',
    'CandidateGroup',
    'as_gaze_arrays',
    'label_runs',
    'resolve_groups',
    'resolve_merge_mode',
    'AUTO_MERGE_MODES',
    'classify_ivt',
    'velocity_mask',
    'classify_idt',
    'dispersion_groups',
    'idt_stream',
    'classify_ivdt',
    'classify_mivdt',
    'correct_samples',
    'velocity_groups',
    'ivdt_stream',
    'CLASSIFIERS',
    'ALGORITHM_NAMES',
    'PAPER_OPTIMAL_PRESETS',
    'ClassifierInfo',
    'create_classifier',
    'classify',
    'build_params',
    'write_fixations_csv',
    'write_labels_csv',
    'read_classification',
]
