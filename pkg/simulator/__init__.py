"""
眼动仿真模块
Gaze Simulator Module
"""

from .gaze_simulator import (
    BLINK,
    SimulationConfig,
    TrueFixation,
    GroundTruth,
    simulate_session,
    oracle_stream,
    true_fixations,
    write_ground_truth,
    read_ground_truth,
    sample_times,
    check_feasibility,
)
from .agreement import label_agreement
from .corpus import TASK_CHOICES, SessionPlan, plan_corpus, simulate_planned, materialize_session

__all__ = [
    'BLINK',
    'SimulationConfig',
    'TrueFixation',
    'GroundTruth',
    'simulate_session',
    'oracle_stream',
    'true_fixations',
    'write_ground_truth',
    'read_ground_truth',
    'sample_times',
    'check_feasibility',
    'label_agreement',
    'TASK_CHOICES',
    'SessionPlan',
    'plan_corpus',
    'simulate_planned',
    'materialize_session',
]
