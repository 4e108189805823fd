"""
眼动数据仿真模块
Synthetic Gaze Simulator Module

根据刺激协议生成带真值标注的会话：潜伏期后按主序列时长做平滑扫视，
注视期间叠加时间相关的角度噪声，可选眨眼与远墙偏离
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from classifiers import FIXATION, SACCADE, Fixation, LabeledStream
from geometry import Sphere, norm, sphere_angular_radius, sub
from ingest import SESSION_COLUMNS, Session
from protocol import SACCADIC_LATENCY_MS, StimulusProtocol, saccade_duration, stimulus_saccades
from utils.errors import ContractError, InfeasibleProtocolError, InvalidConfigurationError, SessionFormatError
from utils.io_utils import write_frame

logger = logging.getLogger(__name__)

BLINK = 2
TRUTH_LABEL_NAMES = {SACCADE: "saccade", FIXATION: "fixation", BLINK: "blink"}
TRUTH_COLUMNS = ["index", "label", "target_index"]

# 远墙偏离：3 个渐入样本 + 6 个平台样本 + 3 个渐出样本
MISS_RAMP_SAMPLES = 3
MISS_PLATEAU_SAMPLES = 6
MISS_MARGIN_DEG = 0.5
MISS_RADIUS_FACTOR = 1.5

DEFAULT_PUPIL_MM = 3.5
DEFAULT_SPHERE_RADIUS = 0.05


@dataclass(frozen=True)
class SimulationConfig:
    sample_rate: float = 120.0
    rate_jitter: float = 0.1
    angular_noise_sigma: float = 0.5
    noise_correlation_ms: float = 50.0
    saccadic_latency: float = SACCADIC_LATENCY_MS
    blink_rate: float = 0.0
    blink_duration: float = 150.0
    far_miss_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise InvalidConfigurationError(f"sample_rate 必须为正: {self.sample_rate}")
        if not 0 <= self.rate_jitter < 1:
            raise InvalidConfigurationError(f"rate_jitter 必须在 [0, 1) 内: {self.rate_jitter}")
        if self.angular_noise_sigma < 0:
            raise InvalidConfigurationError(f"angular_noise_sigma 不能为负: {self.angular_noise_sigma}")
        if not self.noise_correlation_ms > 0:
            raise InvalidConfigurationError(f"noise_correlation_ms 必须为正: {self.noise_correlation_ms}")
        if self.saccadic_latency < 0:
            raise InvalidConfigurationError(f"saccadic_latency 不能为负: {self.saccadic_latency}")
        if self.blink_rate < 0 or not self.blink_duration > 0:
            raise InvalidConfigurationError(f"眨眼参数非法: rate={self.blink_rate}, duration={self.blink_duration}")
        if not 0 <= self.far_miss_rate < 1:
            raise InvalidConfigurationError(f"far_miss_rate 必须在 [0, 1) 内: {self.far_miss_rate}")

    @property
    def period_ms(self) -> float:
        return 1000.0 / self.sample_rate


@dataclass(frozen=True)
class TrueFixation:
    target_index: int
    first_index: int
    last_index: int


@dataclass
class GroundTruth:
    """逐样本真值：标签、目标下标与真实注视"""

    labels: np.ndarray
    target_index: np.ndarray
    fixations: List[TrueFixation] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_saccades(self) -> int:
        """真实扫视数：相邻真实注视之间各有一次"""
        return max(0, len(self.fixations) - 1)

    def aligned(self, session: Session) -> "GroundTruth":
        """去掉预处理时丢弃的开头样本，使下标与会话的注视点对齐"""
        dropped = session.dropped_count
        if not dropped:
            return self
        fixations = [
            TrueFixation(f.target_index, max(f.first_index, dropped) - dropped, f.last_index - dropped)
            for f in self.fixations if f.last_index >= dropped
        ]
        return GroundTruth(self.labels[dropped:], self.target_index[dropped:], fixations)


def smoothstep(u: np.ndarray) -> np.ndarray:
    return u * u * (3.0 - 2.0 * u)


def _unit_rows(vectors: np.ndarray) -> np.ndarray:
    return vectors / np.linalg.norm(vectors, axis=1)[:, None]


def _slerp(start: np.ndarray, end: np.ndarray, fraction: np.ndarray) -> np.ndarray:
    """按比例在两组单位向量之间做球面插值"""
    cosine = np.clip(np.einsum("ij,ij->i", start, end), -1.0, 1.0)
    theta = np.arccos(cosine)
    result = np.array(start, dtype=float)
    moving = theta > 1e-12
    if np.any(moving):
        th = theta[moving][:, None]
        f = fraction[moving][:, None]
        result[moving] = (np.sin((1.0 - f) * th) * start[moving] + np.sin(f * th) * end[moving]) / np.sin(th)
    return _unit_rows(result)


def _tangent_basis(directions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    helper = np.tile([0.0, 1.0, 0.0], (len(directions), 1))
    near_vertical = np.abs(directions[:, 1]) > 0.9
    helper[near_vertical] = [1.0, 0.0, 0.0]
    u = _unit_rows(np.cross(helper, directions))
    v = np.cross(directions, u)
    return u, v


def _rotate(directions: np.ndarray, offsets_deg: np.ndarray) -> np.ndarray:
    """按切平面上的 (x, y) 角度偏移旋转方向"""
    u, v = _tangent_basis(directions)
    tangents = np.tan(np.radians(offsets_deg))
    return _unit_rows(directions + tangents[:, :1] * u + tangents[:, 1:2] * v)


def check_feasibility(protocol: StimulusProtocol, config: SimulationConfig) -> List[float]:
    """
    每个目标的停留时长必须容纳潜伏期与扫视

    Returns:
        List[float]: 各次刺激扫视的时长（毫秒）
    """
    durations = []
    for saccade in stimulus_saccades(protocol):
        duration = saccade_duration(saccade.amplitude)
        dwell = protocol.targets[saccade.to_index].dwell
        if not dwell > config.saccadic_latency + duration:
            raise InfeasibleProtocolError(
                f"目标 {saccade.to_index} 的停留时长 {dwell} ms 不足以容纳潜伏期 "
                f"{config.saccadic_latency} ms 与扫视 {duration:.1f} ms")
        durations.append(duration)
    return durations


def sample_times(end_ms: float, config: SimulationConfig, rng: np.random.Generator) -> np.ndarray:
    """从 0 开始、间隔在 1/sample_rate 附近抖动的采样时刻，全部小于 end_ms"""
    period = config.period_ms
    count = int(math.ceil(end_ms / (period * (1.0 - config.rate_jitter)))) + 2
    jitter = rng.uniform(-1.0, 1.0, size=count) * config.rate_jitter
    times = np.concatenate(([0.0], np.cumsum(period * (1.0 + jitter))))
    return times[times < end_ms]


def _ar1_noise(times: np.ndarray, config: SimulationConfig, rng: np.random.Generator) -> np.ndarray:
    """二维一阶自回归角度噪声，平稳标准差为 angular_noise_sigma"""
    sigma = config.angular_noise_sigma
    innovations = rng.standard_normal(size=(len(times), 2))
    noise = np.zeros((len(times), 2))
    if sigma == 0 or len(times) == 0:
        return noise
    noise[0] = sigma * innovations[0]
    rho = np.exp(-np.diff(times) / config.noise_correlation_ms)
    scale = sigma * np.sqrt(1.0 - rho * rho)
    for k in range(1, len(times)):
        noise[k] = rho[k - 1] * noise[k - 1] + scale[k - 1] * innovations[k]
    return noise


def _miss_profile() -> np.ndarray:
    ramp = np.arange(1, MISS_RAMP_SAMPLES + 1) / (MISS_RAMP_SAMPLES + 1)
    return np.concatenate((ramp, np.ones(MISS_PLATEAU_SAMPLES), ramp[::-1]))


def _runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    padded = np.concatenate(([False], mask, [False]))
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    return [(int(a), int(b) - 1) for a, b in zip(edges[::2], edges[1::2])]


def _far_miss_offsets(labels: np.ndarray, targets: np.ndarray, miss_angles: Sequence[float],
                      config: SimulationConfig, rng: np.random.Generator) -> np.ndarray:
    """在注视段内放置偏离脉冲，平台样本占注视样本的期望比例为 far_miss_rate"""
    offsets = np.zeros((len(labels), 2))
    if config.far_miss_rate == 0:
        return offsets
    profile = _miss_profile()
    for first, last in _runs(labels == FIXATION):
        length = last - first + 1
        if length < len(profile):
            continue
        bursts = rng.poisson(config.far_miss_rate * length / MISS_PLATEAU_SAMPLES)
        for _ in range(bursts):
            start = first + int(rng.integers(0, length - len(profile) + 1))
            angle = rng.uniform(0.0, 2.0 * math.pi)
            delta = miss_angles[targets[start]]
            span = slice(start, start + len(profile))
            offsets[span, 0] = delta * profile * math.cos(angle)
            offsets[span, 1] = delta * profile * math.sin(angle)
    return offsets


def _blink_mask(times: np.ndarray, config: SimulationConfig, rng: np.random.Generator) -> np.ndarray:
    mask = np.zeros(len(times), dtype=bool)
    if config.blink_rate == 0 or len(times) == 0:
        return mask
    minutes = (times[-1] - times[0]) / 60000.0
    for start in rng.uniform(times[0], times[-1], size=rng.poisson(config.blink_rate * minutes)):
        mask |= (times >= start) & (times < start + config.blink_duration)
    return mask


def _sphere_radius(protocol: StimulusProtocol) -> float:
    return protocol.scene.spheres[0].radius if protocol.scene.spheres else DEFAULT_SPHERE_RADIUS


def simulate_session(protocol: StimulusProtocol, config: SimulationConfig) -> Tuple[pd.DataFrame, GroundTruth]:
    """
    生成一个会话

    Args:
        protocol: 刺激协议（时钟从 0 开始）
        config: 仿真配置

    Returns:
        Tuple[pd.DataFrame, GroundTruth]: 眼动仪格式的会话表（右手系，X 取反）与真值
    """
    durations = check_feasibility(protocol, config)
    rng = np.random.default_rng(config.seed)
    eye = np.asarray(protocol.viewer_origin, dtype=float)
    target_positions = np.asarray([t.position for t in protocol.targets], dtype=float)
    target_directions = _unit_rows(target_positions - eye)
    onsets = np.asarray([t.onset for t in protocol.targets], dtype=float)

    times = sample_times(protocol.end_ms, config, rng)
    n = len(times)
    saccade_starts = onsets[1:] + config.saccadic_latency
    saccade_ends = saccade_starts + np.asarray(durations)

    # k = 已开始的扫视数；扫视 k 把视线从目标 k-1 移到目标 k
    started = np.searchsorted(saccade_starts, times, side="right")
    in_flight = np.zeros(n, dtype=bool)
    progress = np.zeros(n)
    has_saccade = started > 0
    index = np.maximum(started - 1, 0)
    if len(saccade_starts):
        progress = np.where(has_saccade, (times - saccade_starts[index]) / np.asarray(durations)[index], 1.0)
        in_flight = has_saccade & (progress > 0.0) & (progress < 1.0)
    targets = np.where(has_saccade & (progress <= 0.0), started - 1, started)
    labels = np.where(in_flight, SACCADE, FIXATION).astype(np.int8)

    directions = target_directions[targets].copy()
    if np.any(in_flight):
        directions[in_flight] = _slerp(target_directions[started[in_flight] - 1],
                                       target_directions[started[in_flight]],
                                       smoothstep(progress[in_flight]))

    radius = _sphere_radius(protocol)
    miss_angles = [MISS_RADIUS_FACTOR * sphere_angular_radius(Sphere(tuple(p), radius), eye) + MISS_MARGIN_DEG
                   for p in target_positions]
    offsets = _ar1_noise(times, config, rng) + _far_miss_offsets(labels, targets, miss_angles, config, rng)
    if np.any(offsets):
        directions = _rotate(directions, offsets)

    blinks = _blink_mask(times, config, rng)
    pupils = DEFAULT_PUPIL_MM + 0.1 * rng.standard_normal(size=(n, 2))

    gaze_columns = np.column_stack((np.zeros((n, 3)), directions))
    gaze_columns[blinks] = np.nan
    # 眼动仪为右手系：X 分量取反；0.0 - x 避免写出 -0
    gaze_columns[:, 0] = 0.0 - gaze_columns[:, 0]
    gaze_columns[:, 3] = 0.0 - gaze_columns[:, 3]
    openness = np.where(blinks, 0.0, 1.0)

    frame = pd.DataFrame({
        "timestamp_ms": times,
        "gaze_origin_x": gaze_columns[:, 0], "gaze_origin_y": gaze_columns[:, 1], "gaze_origin_z": gaze_columns[:, 2],
        "gaze_dir_x": gaze_columns[:, 3], "gaze_dir_y": gaze_columns[:, 4], "gaze_dir_z": gaze_columns[:, 5],
        "headset_x": np.full(n, eye[0]), "headset_y": np.full(n, eye[1]), "headset_z": np.full(n, eye[2]),
        "pupil_left_mm": pupils[:, 0], "pupil_right_mm": pupils[:, 1],
        "openness_left": openness, "openness_right": openness,
    }, columns=SESSION_COLUMNS)

    truth_labels = np.where(blinks, BLINK, labels).astype(np.int8)
    fixations = true_fixations(truth_labels, targets)
    logger.debug(f"仿真 {protocol.protocol_id}: {n} 个样本, {len(fixations)} 个真实注视, "
                 f"{int(blinks.sum())} 个眨眼样本")
    return frame, GroundTruth(labels=truth_labels, target_index=targets.astype(int), fixations=fixations)


def true_fixations(labels: np.ndarray, targets: np.ndarray) -> List[TrueFixation]:
    """非扫视样本中目标下标相同的极大连续段"""
    fixations = []
    for first, last in _runs(labels != SACCADE):
        start = first
        for i in range(first + 1, last + 2):
            if i == last + 1 or targets[i] != targets[start]:
                fixations.append(TrueFixation(int(targets[start]), start, i - 1))
                start = i
    return fixations


def oracle_stream(ground_truth: GroundTruth, session: Session) -> LabeledStream:
    """
    以真值构造的完美分类：注视位置取真实目标位置

    Args:
        ground_truth: 仿真真值（未对齐，内部按会话丢弃的样本对齐）
        session: 预处理后的会话（需要协议与时间戳）

    Returns:
        LabeledStream: algorithm 为 oracle
    """
    truth = ground_truth.aligned(session)
    if len(truth) != len(session.timestamps):
        raise ContractError(f"真值长度 {len(truth)} 与会话 {session.session_id} 的样本数 {len(session.timestamps)} 不一致")
    if session.protocol is None:
        raise ContractError(f"会话 {session.session_id} 没有对应的刺激协议")
    labels = np.full(len(truth), SACCADE, dtype=np.int8)
    fixations = []
    for true in truth.fixations:
        position = session.protocol.targets[true.target_index].position
        t_start = float(session.timestamps[true.first_index])
        fixations.append(Fixation(x_f=position.x, y_f=position.y, z_f=position.z, t_start=t_start,
                                  duration=float(session.timestamps[true.last_index]) - t_start,
                                  first_index=true.first_index, last_index=true.last_index,
                                  segments=((true.first_index, true.last_index),)))
        labels[true.first_index:true.last_index + 1] = FIXATION
    return LabeledStream(labels=labels, fixations=fixations, algorithm="oracle")


def write_ground_truth(path: Union[str, Path], ground_truth: GroundTruth) -> None:
    frame = pd.DataFrame({
        "index": np.arange(len(ground_truth)),
        "label": [TRUTH_LABEL_NAMES[int(v)] for v in ground_truth.labels],
        "target_index": ground_truth.target_index,
    }, columns=TRUTH_COLUMNS)
    write_frame(path, frame)


def read_ground_truth(path: Union[str, Path]) -> GroundTruth:
    frame = pd.read_csv(path, dtype={"label": str}, keep_default_na=False)
    for column in TRUTH_COLUMNS:
        if column not in frame.columns:
            raise SessionFormatError(f"真值文件 {Path(path).name} 缺少列: {column}", column=column)
    codes = {name: code for code, name in TRUTH_LABEL_NAMES.items()}
    unknown = ~frame["label"].isin(list(codes))
    if unknown.any():
        row = int(np.flatnonzero(unknown.to_numpy())[0])
        raise SessionFormatError(f"真值文件第 {row + 2} 行的标签无效: {frame['label'].iloc[row]!r}",
                                 line_number=row + 2, column="label")
    labels = frame["label"].map(codes).to_numpy(dtype=np.int8)
    targets = frame["target_index"].to_numpy(dtype=int)
    return GroundTruth(labels=labels, target_index=targets, fixations=true_fixations(labels, targets))
