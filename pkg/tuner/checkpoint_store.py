"""
调参检查点模块
Tuning Checkpoint Store

每个参数组合一个 JSON 文件，文件名为组合的哈希；中断后重跑时跳过已完成的组合
"""

import os
import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

from classifiers import ClassifierParams
from metrics import MetricReport
from utils.io_utils import config_hash, read_json, write_json

logger = logging.getLogger(__name__)


class CheckpointStore:
    """调参检查点管理器"""

    def __init__(self, directory: Union[str, Path], run_key: str = ""):
        """
        初始化检查点目录

        Args:
            directory: 检查点目录
            run_key: 语料与设置的哈希，不同运行的检查点互不混用
        """
        self.directory = Path(directory)
        self.run_key = run_key
        self.ensure_directory()

    def ensure_directory(self) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)

    def key(self, algorithm: str, params: ClassifierParams) -> str:
        return config_hash({"run": self.run_key, "algorithm": algorithm, "params": params.as_dict()})[:24]

    def path(self, algorithm: str, params: ClassifierParams) -> Path:
        return self.directory / f"{self.key(algorithm, params)}.json"

    def has(self, algorithm: str, params: ClassifierParams) -> bool:
        return self.path(algorithm, params).exists()

    def save(self, algorithm: str, params: ClassifierParams, reports: Optional[List[MetricReport]],
             error: Optional[str] = None) -> None:
        """先写临时文件再替换，中断时不会留下半个检查点"""
        target = self.path(algorithm, params)
        staging = target.with_suffix(".tmp")
        write_json(staging, {
            "algorithm": algorithm,
            "params": params.as_dict(),
            "reports": [r.to_dict() for r in reports] if reports is not None else None,
            "error": error,
        })
        os.replace(staging, target)

    def load(self, algorithm: str, params: ClassifierParams) -> Tuple[Optional[List[MetricReport]], Optional[str]]:
        """
        读取检查点

        Returns:
            Tuple: (未归一化的报告列表, 错误信息)；组合失败时报告为 None
        """
        payload = read_json(self.path(algorithm, params))
        reports = payload.get("reports")
        if reports is None:
            return None, payload.get("error")
        return [MetricReport.from_dict(r) for r in reports], payload.get("error")

    def count(self) -> int:
        return sum(1 for _ in self.directory.glob("*.json"))
