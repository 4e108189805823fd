"""
参数调优模块
Threshold Tuning Module
"""

from .grid import RangeSpec, ParamGrid, APPLICABLE_DIMENSIONS, enumerate_grid, load_grid
from .checkpoint_store import CheckpointStore
from .grid_search import (
    CorpusEntry,
    TuneResult,
    TABLE_COLUMNS,
    select_best,
    corpus_key,
    run_grid,
    compare_algorithms,
)

__all__ = [
    'RangeSpec',
    'ParamGrid',
    'APPLICABLE_DIMENSIONS',
    'enumerate_grid',
    'load_grid',
    'CheckpointStore',
    'CorpusEntry',
    'TuneResult',
    'TABLE_COLUMNS',
    'select_best',
    'corpus_key',
    'run_grid',
    'compare_algorithms',
]
