"""
评价指标模块
Evaluation Metrics Module
"""

from .scores import (
    BasicMetrics,
    basic_metrics,
    detected_saccade_amplitudes,
    concurrent_target,
    proximity_radii,
    saccade_duration,
    fqns,
    ideal_fqns,
    fqls,
    sqns,
    SACCADIC_LATENCY_MS,
    ALIGNMENT_TOLERANCE_MS,
)
from .report import (
    METRIC_NAMES,
    IdealValues,
    MetricReport,
    normalize_deviations,
    overall_score,
    evaluate_session,
    normalize_reports,
)
from .aggregate import reports_frame, aggregate_reports, format_mean_std, long_format_series

__all__ = [
    'BasicMetrics',
    'basic_metrics',
    'detected_saccade_amplitudes',
    'concurrent_target',
    'proximity_radii',
    'saccade_duration',
    'fqns',
    'ideal_fqns',
    'fqls',
    'sqns',
    'SACCADIC_LATENCY_MS',
    'ALIGNMENT_TOLERANCE_MS',
    'METRIC_NAMES',
    'IdealValues',
    'MetricReport',
    'normalize_deviations',
    'overall_score',
    'evaluate_session',
    'normalize_reports',
    'reports_frame',
    'aggregate_reports',
    'format_mean_std',
    'long_format_series',
]
