"""
配置模块
Configuration Module

加载 .env 环境变量、构建运行设置并配置日志
"""

import os
import sys
import math
import logging
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

TOOL_VERSION = "1.0.0"

# (180/π)×10³：毫秒时间戳下 rad/ms → deg/s
PRECISE_VELOCITY_CONSTANT = 180.0 / math.pi * 1000.0
PAPER_VELOCITY_CONSTANT = 5.73e4

VELOCITY_CONSTANTS = {
    "precise": PRECISE_VELOCITY_CONSTANT,
    "paper": PAPER_VELOCITY_CONSTANT,
}

# auto 按算法选择，见 classifiers.base.AUTO_MERGE_MODES
MERGE_MODES = ("auto", "boundary", "centroid")

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


@dataclass(frozen=True)
class Settings:
    """运行设置（环境变量 + 命令行覆盖）"""

    workers: int = 1
    log_level: str = "INFO"
    log_file: str = "gaze_events.log"
    velocity_constant_name: str = "precise"
    merge_mode: str = "auto"
    fqns_clip: bool = True

    @property
    def velocity_constant(self) -> float:
        return VELOCITY_CONSTANTS[self.velocity_constant_name]


def load_environment() -> bool:
    """
    加载环境变量

    Returns:
        bool: 是否找到 .env 文件（找不到时使用默认值）
    """
    found = load_dotenv()
    if not found:
        logger.debug("未找到.env配置文件，使用默认设置")
    return found


def _read_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigurationError(f"环境变量 {name} 必须是整数，当前值: {raw!r}")
    if value < 1:
        raise ConfigurationError(f"环境变量 {name} 必须 ≥ 1，当前值: {value}")
    return value


def _read_choice(name: str, default: str, choices) -> str:
    value = os.getenv(name, default).strip().lower() or default
    if value not in choices:
        raise ConfigurationError(f"环境变量 {name} 取值必须是 {list(choices)} 之一，当前值: {value!r}")
    return value


def load_settings(workers: Optional[int] = None,
                  velocity_constant_name: Optional[str] = None,
                  merge_mode: Optional[str] = None,
                  fqns_clip: Optional[bool] = None) -> Settings:
    """
    从环境变量构建设置，命令行参数优先

    Args:
        workers: 命令行 --workers
        velocity_constant_name: 命令行指定的速度换算常数
        merge_mode: 命令行指定的合并模式
        fqns_clip: 命令行指定的FQnS重叠裁剪开关

    Returns:
        Settings: 冻结的设置对象
    """
    env_workers = _read_int("GAZE_EVENTS_WORKERS", 1)
    if workers is not None and workers < 1:
        raise ConfigurationError(f"--workers 必须 ≥ 1，当前值: {workers}")

    clip_raw = os.getenv("GAZE_EVENTS_FQNS_CLIP", "1").strip()
    if clip_raw not in ("0", "1", ""):
        raise ConfigurationError(f"环境变量 GAZE_EVENTS_FQNS_CLIP 只能是 0 或 1，当前值: {clip_raw!r}")

    return Settings(
        workers=workers if workers is not None else env_workers,
        log_level=os.getenv("GAZE_EVENTS_LOG_LEVEL", "INFO").upper(),
        log_file=os.getenv("GAZE_EVENTS_LOG_FILE", "gaze_events.log"),
        velocity_constant_name=velocity_constant_name or _read_choice(
            "GAZE_EVENTS_VELOCITY_CONSTANT", "precise", VELOCITY_CONSTANTS),
        merge_mode=merge_mode or _read_choice("GAZE_EVENTS_MERGE_MODE", "auto", MERGE_MODES),
        fqns_clip=fqns_clip if fqns_clip is not None else clip_raw != "0",
    )


def setup_logging(settings: Settings) -> None:
    """配置根日志器：标准输出 + 可选的日志文件"""
    handlers = [logging.StreamHandler(sys.stdout)]
    if settings.log_file:
        handlers.append(logging.FileHandler(settings.log_file, encoding='utf-8'))

    level = getattr(logging, settings.log_level, None)
    if not isinstance(level, int):
        raise ConfigurationError(f"未知的日志级别: {settings.log_level}")

    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)
