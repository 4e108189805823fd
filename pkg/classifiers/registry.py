"""
分类器注册表
Classifier Registry

按名称创建分类器、论文最优预设参数，以及分类结果的CSV读写
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd

from utils.errors import SessionFormatError, UsageError
from utils.io_utils import write_frame
from .base import FIXATION, LABEL_NAMES, SACCADE, ClassifierParams, Fixation, LabeledStream
from .dispersion_classifier import classify_idt
from .hybrid_classifier import classify_ivdt, classify_mivdt
from .velocity_classifier import classify_ivt

logger = logging.getLogger(__name__)

FIXATION_COLUMNS = ["x_f", "y_f", "z_f", "t_start_ms", "duration_ms", "first_index", "last_index", "corrected"]
LABEL_COLUMNS = ["index", "label"]


@dataclass(frozen=True)
class ClassifierInfo:
    name: str
    display_name: str
    function: Callable[..., LabeledStream]
    applicable: Tuple[str, ...]

    def classify(self, points, params: ClassifierParams, merge_mode: str = "auto") -> LabeledStream:
        params.require(*(name for name in self.applicable if name != "z_outlier_threshold"))
        if self.name == "ivt":
            return self.function(points, params)
        return self.function(points, params, merge_mode=merge_mode)


CLASSIFIERS: Dict[str, ClassifierInfo] = {
    "ivt": ClassifierInfo("ivt", "IVT", classify_ivt, ("velocity_threshold",)),
    "idt": ClassifierInfo("idt", "IDT", classify_idt, ("dispersion_threshold", "min_fixation_duration")),
    "ivdt": ClassifierInfo("ivdt", "IVDT", classify_ivdt,
                           ("velocity_threshold", "dispersion_threshold", "min_fixation_duration")),
    "mivdt": ClassifierInfo("mivdt", "m-IVDT", classify_mivdt,
                            ("velocity_threshold", "dispersion_threshold", "min_fixation_duration",
                             "z_outlier_threshold")),
}

ALGORITHM_NAMES = tuple(CLASSIFIERS)

PAPER_OPTIMAL_PRESETS: Dict[str, ClassifierParams] = {
    "ivt": ClassifierParams(velocity_threshold=150.0),
    "idt": ClassifierParams(dispersion_threshold=5.75, min_fixation_duration=150.0),
    "ivdt": ClassifierParams(velocity_threshold=140.0, dispersion_threshold=5.75, min_fixation_duration=110.0),
    "mivdt": ClassifierParams(velocity_threshold=140.0, dispersion_threshold=5.75, min_fixation_duration=130.0),
}


def create_classifier(name: str) -> ClassifierInfo:
    """
    按名称获取分类器

    Args:
        name: ivt / idt / ivdt / mivdt

    Returns:
        ClassifierInfo: 分类器描述
    """
    key = name.strip().lower().replace("-", "")
    if key not in CLASSIFIERS:
        raise UsageError(f"未知的分类算法: {name}（可选 {', '.join(ALGORITHM_NAMES)}）")
    return CLASSIFIERS[key]


def classify(name: str, points, params: ClassifierParams, merge_mode: str = "auto") -> LabeledStream:
    return create_classifier(name).classify(points, params, merge_mode=merge_mode)


def build_params(name: str,
                 velocity: Optional[float] = None,
                 duration: Optional[float] = None,
                 dispersion: Optional[float] = None,
                 z_threshold: Optional[float] = None,
                 preset: Optional[str] = None) -> ClassifierParams:
    """
    由命令行数值构建参数，检查参数与算法是否匹配

    Args:
        name: 算法名
        velocity / duration / dispersion / z_threshold: 命令行给出的阈值
        preset: paper-optimal 时以预设为基础，命令行数值覆盖预设

    Returns:
        ClassifierParams: 完整参数
    """
    info = create_classifier(name)
    given = {
        "velocity_threshold": velocity,
        "min_fixation_duration": duration,
        "dispersion_threshold": dispersion,
        "z_outlier_threshold": z_threshold,
    }
    flags = {
        "velocity_threshold": "--velocity",
        "min_fixation_duration": "--duration",
        "dispersion_threshold": "--dispersion",
        "z_outlier_threshold": "--z-threshold",
    }
    for field_name, value in given.items():
        if value is not None and field_name not in info.applicable:
            raise UsageError(f"参数 {flags[field_name]} 不适用于算法 {info.display_name}")

    if preset is not None:
        if preset != "paper-optimal":
            raise UsageError(f"未知的预设: {preset}（只支持 paper-optimal）")
        values = PAPER_OPTIMAL_PRESETS[info.name].as_dict()
    else:
        values = ClassifierParams().as_dict()
    values.update({k: v for k, v in given.items() if v is not None})

    missing = [flags[k] for k in info.applicable if values.get(k) is None]
    if missing:
        raise UsageError(f"算法 {info.display_name} 缺少参数: {', '.join(missing)}")
    return ClassifierParams(**{k: v for k, v in values.items() if k in info.applicable or k == "z_outlier_threshold"})


def fixations_frame(stream: LabeledStream) -> pd.DataFrame:
    rows = [
        {
            "x_f": f.x_f, "y_f": f.y_f, "z_f": f.z_f,
            "t_start_ms": f.t_start, "duration_ms": f.duration,
            "first_index": f.first_index, "last_index": f.last_index,
            "corrected": int(f.corrected),
        }
        for f in stream.fixations
    ]
    return pd.DataFrame(rows, columns=FIXATION_COLUMNS)


def write_fixations_csv(path: Union[str, Path], stream: LabeledStream) -> None:
    write_frame(path, fixations_frame(stream))


def write_labels_csv(path: Union[str, Path], stream: LabeledStream) -> None:
    frame = pd.DataFrame({
        "index": np.arange(len(stream.labels)),
        "label": [LABEL_NAMES[int(v)] for v in stream.labels],
    })
    write_frame(path, frame)


def read_classification(fixations_path: Union[str, Path], labels_path: Union[str, Path],
                        algorithm: str = "") -> LabeledStream:
    """
    读回分类结果

    Args:
        fixations_path: 注视CSV
        labels_path: 逐样本标注CSV
        algorithm: 记录到流上的算法名

    Returns:
        LabeledStream: 注视的成员段取 first_index..last_index
    """
    fixations_frame_ = pd.read_csv(fixations_path, float_precision="round_trip")
    labels_frame = pd.read_csv(labels_path, dtype={"label": str}, keep_default_na=False)
    for column in FIXATION_COLUMNS:
        if column not in fixations_frame_.columns:
            raise SessionFormatError(f"注视文件 {Path(fixations_path).name} 缺少列: {column}", column=column)
    for column in LABEL_COLUMNS:
        if column not in labels_frame.columns:
            raise SessionFormatError(f"标注文件 {Path(labels_path).name} 缺少列: {column}", column=column)

    codes = {"fixation": FIXATION, "saccade": SACCADE}
    unknown = ~labels_frame["label"].isin(list(codes))
    if unknown.any():
        row = int(np.flatnonzero(unknown.to_numpy())[0])
        raise SessionFormatError(f"标注文件第 {row + 2} 行的标签无效: {labels_frame['label'].iloc[row]!r}",
                                 line_number=row + 2, column="label")
    labels = labels_frame["label"].map(codes).to_numpy(dtype=np.int8)

    fixations = [
        Fixation(x_f=float(row.x_f), y_f=float(row.y_f), z_f=float(row.z_f),
                 t_start=float(row.t_start_ms), duration=float(row.duration_ms),
                 first_index=int(row.first_index), last_index=int(row.last_index),
                 segments=((int(row.first_index), int(row.last_index)),),
                 corrected=bool(row.corrected))
        for row in fixations_frame_.itertuples(index=False)
    ]
    return LabeledStream(labels=labels, fixations=fixations, algorithm=algorithm)
