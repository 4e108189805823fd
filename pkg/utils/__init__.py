"""
工具模块
Utilities Module
"""

from .errors import (
    GazeToolkitError,
    UsageError,
    ConfigurationError,
    InvalidArgumentError,
    SessionFormatError,
    EmptySessionError,
    DegenerateTimestepError,
    ContractError,
    AlignmentError,
    UndefinedMetricError,
    InvalidConfigurationError,
    InfeasibleProtocolError,
)
from .config import (
    TOOL_VERSION,
    PRECISE_VELOCITY_CONSTANT,
    PAPER_VELOCITY_CONSTANT,
    Settings,
    load_environment,
    load_settings,
    setup_logging,
)
from .parallel_utils import ProgressReporter, run_ordered

__all__ = [
    'GazeToolkitError',
    'UsageError',
    'ConfigurationError',
    'InvalidArgumentError',
    'SessionFormatError',
    'EmptySessionError',
    'DegenerateTimestepError',
    'ContractError',
    'AlignmentError',
    'UndefinedMetricError',
    'InvalidConfigurationError',
    'InfeasibleProtocolError',
    'TOOL_VERSION',
    'PRECISE_VELOCITY_CONSTANT',
    'PAPER_VELOCITY_CONSTANT',
    'Settings',
    'load_environment',
    'load_settings',
    'setup_logging',
    'ProgressReporter',
    'run_ordered',
]
