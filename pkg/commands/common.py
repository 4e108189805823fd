"""
命令公共模块
Command Helpers Module

会话文件发现、语料加载与运行清单
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

from ingest import Session, load_session
from utils.config import TOOL_VERSION, Settings
from utils.errors import SessionFormatError, UsageError
from utils.io_utils import config_hash, manifest_entry, write_json
from utils.parallel_utils import ProgressReporter, run_ordered

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
SIDECAR_SUFFIXES = (".truth.csv", ".fixations.csv", ".labels.csv")


def discover_sessions(directory: Union[str, Path]) -> List[Path]:
    """目录下的会话CSV（排除真值与分类结果文件），按文件名排序"""
    directory = Path(directory)
    if not directory.is_dir():
        raise UsageError(f"输入目录不存在: {directory}")
    sessions = sorted(p for p in directory.glob("*.csv") if not p.name.endswith(SIDECAR_SUFFIXES))
    if not sessions:
        raise SessionFormatError(f"目录 {directory} 中没有会话文件")
    return sessions


def _load_one(task: Tuple[str, float]) -> Session:
    path, velocity_constant = task
    return load_session(path, velocity_constant=velocity_constant)


def load_corpus(paths: Sequence[Path], settings: Settings) -> List[Session]:
    """并行读取并预处理会话，顺序与 paths 一致"""
    tasks = [(str(p), settings.velocity_constant) for p in paths]
    return run_ordered(_load_one, tasks, workers=settings.workers,
                       progress=ProgressReporter(len(tasks), "读取会话"))


def run_config(args: Any, exclude: Sequence[str] = ("workers", "func", "output")) -> Dict[str, Any]:
    """命令参数中影响结果的部分"""
    return {k: v for k, v in sorted(vars(args).items()) if k not in exclude}


def write_manifest(root: Path, command: str, config: Dict[str, Any], settings: Settings) -> None:
    """
    写运行清单：工具版本、种子、配置哈希与每个输出文件的 SHA-256

    Args:
        root: 输出目录（暂存目录）
        command: 命令名
        config: 命令配置
        settings: 运行设置（只记录影响结果的项）
    """
    effective = dict(config)
    effective.update(velocity_constant=settings.velocity_constant_name,
                     merge_mode=settings.merge_mode,
                     fqns_clip=settings.fqns_clip)
    files = sorted(p for p in root.rglob("*") if p.is_file() and p.name != MANIFEST_NAME)
    write_json(root / MANIFEST_NAME, {
        "tool_version": TOOL_VERSION,
        "command": command,
        "seed": effective.get("seed"),
        "config": effective,
        "config_hash": config_hash(effective),
        "files": [manifest_entry(p, root) for p in files],
    })
    logger.info(f"运行清单记录了 {len(files)} 个文件")
