"""
刺激协议模块
Stimulus Protocol Module
"""

from .stimulus import (
    TaskKind,
    StimulusTarget,
    StimulusSaccade,
    StimulusProtocol,
    generate_protocol,
    stimulus_saccades,
    saccade_duration,
    DEFAULT_VIEWER_ORIGIN,
    SACCADIC_LATENCY_MS,
    SACCADE_DURATION_SLOPE,
    SACCADE_DURATION_INTERCEPT,
)
from .protocol_io import protocol_to_dict, protocol_from_dict, save_protocol, load_protocol

__all__ = [
    'TaskKind',
    'StimulusTarget',
    'StimulusSaccade',
    'StimulusProtocol',
    'generate_protocol',
    'stimulus_saccades',
    'saccade_duration',
    'DEFAULT_VIEWER_ORIGIN',
    'SACCADIC_LATENCY_MS',
    'SACCADE_DURATION_SLOPE',
    'SACCADE_DURATION_INTERCEPT',
    'protocol_to_dict',
    'protocol_from_dict',
    'save_protocol',
    'load_protocol',
]
