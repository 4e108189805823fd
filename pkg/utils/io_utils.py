"""
文件输出工具模块
File Output Utilities Module

原子化输出目录、确定性的CSV/JSON写入以及文件哈希
"""

import os
import json
import shutil
import hashlib
import logging
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Union

import pandas as pd

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def config_hash(config: Dict[str, Any]) -> str:
    """对配置字典做规范化JSON后取SHA-256"""
    canonical = json.dumps(config, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def file_sha256(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_json(path: PathLike, payload: Any) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")


def read_json(path: PathLike) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_frame(path: PathLike, frame: pd.DataFrame) -> None:
    """写CSV；浮点数使用 repr 精度，重复运行字节一致"""
    frame.to_csv(path, index=False, lineterminator="\n", float_format="%.17g")


def ensure_writable_parent(path: PathLike) -> Path:
    """
    在开始任何工作前检查输出位置可写

    Args:
        path: 目标输出目录

    Returns:
        Path: 目标目录的父目录
    """
    target = Path(path)
    parent = target.resolve().parent
    parent.mkdir(parents=True, exist_ok=True)
    if not os.access(parent, os.W_OK):
        raise PermissionError(f"输出目录不可写: {parent}")
    return parent


@contextmanager
def atomic_output_dir(path: PathLike) -> Iterator[Path]:
    """
    在同级临时目录中写入，成功后整体替换为目标目录

    失败时临时目录被删除，目标目录保持原样。
    """
    target = Path(path)
    parent = ensure_writable_parent(target)
    staging = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=parent))
    try:
        yield staging
        if target.exists():
            shutil.rmtree(target)
        os.replace(staging, target)
        logger.info(f"输出已写入: {target}")
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise


def manifest_entry(path: Path, root: Path) -> Dict[str, str]:
    return {"file": path.relative_to(root).as_posix(), "sha256": file_sha256(path)}
