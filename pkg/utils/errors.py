"""
错误类型模块
Error Types Module

工具包内所有可预期错误的统一层级，命令行根据 exit_code 决定退出码
"""

from typing import Optional


class GazeToolkitError(Exception):
    """工具包错误基类"""

    exit_code = 2

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class UsageError(GazeToolkitError):
    """命令行参数使用错误"""

    exit_code = 1


class ConfigurationError(GazeToolkitError):
    """环境变量或设置错误"""

    exit_code = 1


class InvalidArgumentError(GazeToolkitError, ValueError):
    """几何运算参数非法（零向量、重合点等）"""


class SessionFormatError(GazeToolkitError):
    """会话CSV格式错误"""

    def __init__(self, message: str, line_number: Optional[int] = None, column: Optional[str] = None):
        super().__init__(message)
        self.line_number = line_number
        self.column = column


class EmptySessionError(GazeToolkitError):
    """会话中没有可用样本"""


class DegenerateTimestepError(GazeToolkitError):
    """相邻样本时间戳重复"""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class ContractError(GazeToolkitError):
    """调用约定被破坏（长度不一致、参数个数错误等）"""


class AlignmentError(GazeToolkitError):
    """会话与刺激协议在时间上无法对齐"""

    def __init__(self, message: str, session_id: str = ""):
        super().__init__(message)
        self.session_id = session_id


class UndefinedMetricError(GazeToolkitError):
    """指标在当前输入下没有定义"""


class InvalidConfigurationError(GazeToolkitError):
    """协议或仿真配置非法"""


class InfeasibleProtocolError(GazeToolkitError):
    """协议时长容纳不下潜伏期与扫视"""
