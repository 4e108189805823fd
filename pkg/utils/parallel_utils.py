"""
并行执行工具模块
Parallel Execution Utilities Module

有界进程池、按输入顺序归并结果以及进度日志
"""

import time
import logging
import concurrent.futures
from typing import Any, Callable, List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)


class ProgressReporter:
    """按完成比例节流的进度日志"""

    def __init__(self, total: int, label: str, step_fraction: float = 0.05):
        self.total = max(total, 1)
        self.label = label
        self.step = max(1, int(self.total * step_fraction))
        self.done = 0
        self.started = time.time()

    def advance(self, count: int = 1) -> None:
        before = self.done // self.step
        self.done += count
        if self.done // self.step != before or self.done == self.total:
            elapsed = time.time() - self.started
            logger.info(f"{self.label}: {self.done}/{self.total} ({100.0 * self.done / self.total:.0f}%), 已用时 {elapsed:.1f}秒")


def run_ordered(func: Callable[[Any], Any],
                items: Sequence[Any],
                workers: int = 1,
                initializer: Optional[Callable[..., None]] = None,
                initargs: Tuple = (),
                progress: Optional[ProgressReporter] = None,
                on_result: Optional[Callable[[int, Any], None]] = None) -> List[Any]:
    """
    对 items 逐个执行 func，结果顺序与输入顺序一致

    Args:
        func: 可被 pickle 的顶层函数
        items: 任务参数列表
        workers: 进程数，1 表示在当前进程串行执行
        initializer: 每个工作进程启动时调用（串行时在当前进程调用一次）
        initargs: initializer 的参数
        progress: 可选的进度报告器
        on_result: 每个结果完成时在主进程中以 (下标, 结果) 调用，用于写检查点

    Returns:
        List: 与 items 一一对应的结果
    """
    results: List[Any] = [None] * len(items)

    if workers <= 1 or len(items) <= 1:
        if initializer is not None:
            initializer(*initargs)
        for index, item in enumerate(items):
            results[index] = func(item)
            if on_result:
                on_result(index, results[index])
            if progress:
                progress.advance()
        return results

    with concurrent.futures.ProcessPoolExecutor(max_workers=workers,
                                                initializer=initializer,
                                                initargs=initargs) as executor:
        futures = {executor.submit(func, item): index for index, item in enumerate(items)}
        for future in concurrent.futures.as_completed(futures):
            # 结果按下标写回，合并顺序与完成顺序无关
            index = futures[future]
            results[index] = future.result()
            if on_result:
                on_result(index, results[index])
            if progress:
                progress.advance()
    return results
