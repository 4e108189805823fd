"""
参数网格模块
Parameter Grid Module
"""

import itertools
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

from classifiers import ClassifierParams, create_classifier
from classifiers.base import DEFAULT_Z_OUTLIER_THRESHOLD
from utils.errors import ContractError
from utils.io_utils import read_json

# 网格维度 → ClassifierParams 字段
DIMENSIONS = {
    "velocity": "velocity_threshold",
    "duration": "min_fixation_duration",
    "dispersion": "dispersion_threshold",
}

APPLICABLE_DIMENSIONS = {
    "ivt": ("velocity",),
    "idt": ("duration", "dispersion"),
    "ivdt": ("velocity", "duration", "dispersion"),
    "mivdt": ("velocity", "duration", "dispersion"),
}

VALUE_DIGITS = 10


@dataclass(frozen=True)
class RangeSpec:
    """闭区间等步长取值"""

    start: float
    stop: float
    step: float

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.stop) and math.isfinite(self.step)):
            raise ContractError(f"范围参数必须是有限值: {self}")
        if not self.step > 0:
            raise ContractError(f"步长必须为正: {self.step}")
        if self.stop < self.start:
            raise ContractError(f"范围为空: start={self.start} > stop={self.stop}")

    def values(self) -> List[float]:
        # 容差避免 (stop - start) / step 的舍入丢掉终点
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [round(self.start + i * self.step, VALUE_DIGITS) for i in range(count)]

    def __len__(self) -> int:
        return len(self.values())

    def to_dict(self) -> Dict[str, float]:
        return {"start": self.start, "stop": self.stop, "step": self.step}


@dataclass(frozen=True)
class ParamGrid:
    velocity: RangeSpec = field(default_factory=lambda: RangeSpec(30.0, 150.0, 10.0))
    duration: RangeSpec = field(default_factory=lambda: RangeSpec(50.0, 150.0, 10.0))
    dispersion: RangeSpec = field(default_factory=lambda: RangeSpec(1.0, 6.0, 0.25))

    @classmethod
    def twenty_level(cls) -> "ParamGrid":
        """离散度从 1.25° 开始的 20 档变体"""
        return cls(dispersion=RangeSpec(1.25, 6.0, 0.25))

    def to_dict(self) -> Dict[str, Dict[str, float]]:
        return {name: getattr(self, name).to_dict() for name in DIMENSIONS}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "ParamGrid":
        unknown = set(payload) - set(DIMENSIONS)
        if unknown:
            raise ContractError(f"网格文件包含未知维度: {sorted(unknown)}")
        grid = cls()
        for name, spec in payload.items():
            try:
                grid = replace(grid, **{name: RangeSpec(float(spec["start"]), float(spec["stop"]), float(spec["step"]))})
            except (KeyError, TypeError, ValueError) as e:
                raise ContractError(f"网格维度 {name} 格式错误: {e}")
        return grid


def load_grid(source: Union[str, Path, None]) -> ParamGrid:
    """default → 默认网格，default20 → 20 档离散度变体，否则读取 JSON 文件"""
    if source is None or source == "default":
        return ParamGrid()
    if source == "default20":
        return ParamGrid.twenty_level()
    return ParamGrid.from_dict(read_json(source))


def enumerate_grid(grid: ParamGrid, algorithm: str,
                   z_threshold: float = DEFAULT_Z_OUTLIER_THRESHOLD) -> List[ClassifierParams]:
    """
    枚举算法适用维度的笛卡尔积

    Args:
        grid: 参数网格
        algorithm: 算法名
        z_threshold: m-IVDT 的离群深度阈值

    Returns:
        List[ClassifierParams]: 按 (速度, 时长, 离散度) 字典序排列
    """
    name = create_classifier(algorithm).name
    dimensions = APPLICABLE_DIMENSIONS.get(name, ())
    if not dimensions:
        raise ContractError(f"算法 {algorithm} 没有可调的参数维度")
    axes: List[Tuple[str, List[float]]] = [(d, getattr(grid, d).values()) for d in DIMENSIONS if d in dimensions]
    combos = []
    for values in itertools.product(*(v for _, v in axes)):
        fields = {DIMENSIONS[d]: value for (d, _), value in zip(axes, values)}
        combos.append(ClassifierParams(z_outlier_threshold=z_threshold, **fields))
    return combos
