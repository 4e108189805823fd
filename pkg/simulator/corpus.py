"""
仿真语料模块
Simulated Corpus Module

按总种子派生每个会话的协议种子与噪声种子，生成单目标/多目标会话语料
"""

import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ingest import Session, parse_session_text, preprocess_session
from protocol import StimulusProtocol, TaskKind, generate_protocol
from utils.config import PRECISE_VELOCITY_CONSTANT
from utils.errors import InvalidConfigurationError
from .gaze_simulator import GroundTruth, SimulationConfig, simulate_session

logger = logging.getLogger(__name__)

TASK_CHOICES = ("single", "multi", "both")


@dataclass(frozen=True)
class SessionPlan:
    session_id: str
    task_kind: TaskKind
    protocol_seed: int
    noise_seed: int


def plan_corpus(task: str, sessions: int, seed: int) -> List[SessionPlan]:
    """
    语料计划：每个会话一个独立的子种子

    Args:
        task: single / multi / both（both 时前一半单目标、后一半多目标）
        sessions: 会话数
        seed: 总种子

    Returns:
        List[SessionPlan]: 会话计划
    """
    if task not in TASK_CHOICES:
        raise InvalidConfigurationError(f"未知的任务类型: {task}（可选 {', '.join(TASK_CHOICES)}）")
    if sessions < 1:
        raise InvalidConfigurationError(f"会话数必须 ≥ 1: {sessions}")
    children = np.random.SeedSequence(seed).spawn(sessions)
    plans = []
    for index, child in enumerate(children):
        if task == "both":
            kind = TaskKind.SINGLE_TARGET if index < (sessions + 1) // 2 else TaskKind.MULTI_TARGET
        else:
            kind = TaskKind.parse(task)
        protocol_seed, noise_seed = (int(v) for v in child.generate_state(2))
        prefix = "single" if kind is TaskKind.SINGLE_TARGET else "multi"
        plans.append(SessionPlan(f"{prefix}_{index + 1:03d}", kind, protocol_seed, noise_seed))
    return plans


def simulate_planned(plan: SessionPlan, config: SimulationConfig,
                     protocol_options: Optional[Dict[str, Any]] = None
                     ) -> Tuple[StimulusProtocol, pd.DataFrame, GroundTruth]:
    """按计划生成协议与会话"""
    protocol = generate_protocol(plan.task_kind, plan.protocol_seed, protocol_id=plan.session_id,
                                 **(protocol_options or {}))
    frame, truth = simulate_session(protocol, replace(config, seed=plan.noise_seed))
    return protocol, frame, truth


def materialize_session(protocol: StimulusProtocol, frame: pd.DataFrame, session_id: str = "",
                        velocity_constant: float = PRECISE_VELOCITY_CONSTANT) -> Session:
    """不落盘地把仿真会话表走一遍 CSV 解析与预处理"""
    text = frame.to_csv(index=False, lineterminator="\n", float_format="%.17g")
    raw = parse_session_text(text, protocol=protocol, session_id=session_id or protocol.protocol_id)
    return preprocess_session(raw, velocity_constant=velocity_constant)
