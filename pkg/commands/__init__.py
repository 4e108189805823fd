"""
命令模块
Commands Module
"""

from .common import MANIFEST_NAME, discover_sessions, load_corpus, write_manifest
from .pipeline_commands import cmd_simulate, cmd_classify, cmd_evaluate
from .analysis_commands import cmd_tune, cmd_compare, cmd_report, render_tune_report, markdown_table

__all__ = [
    'MANIFEST_NAME',
    'discover_sessions',
    'load_corpus',
    'write_manifest',
    'cmd_simulate',
    'cmd_classify',
    'cmd_evaluate',
    'cmd_tune',
    'cmd_compare',
    'cmd_report',
    'render_tune_report',
    'markdown_table',
]
