"""
指标汇总模块
Metric Aggregation Module

均值 ± 标准差表格与可直接绘图的长格式序列
"""

from typing import List, Sequence

import pandas as pd

from .report import METRIC_NAMES, MetricReport

PARAM_COLUMNS = {
    "velocity": "velocity_threshold",
    "duration": "min_fixation_duration",
    "dispersion": "dispersion_threshold",
}


def reports_frame(reports: Sequence[MetricReport]) -> pd.DataFrame:
    """每个报告一行：参数、原始值、归一化值与 Overall"""
    rows = []
    for report in reports:
        row = {
            "algorithm": report.algorithm,
            "task": report.task_kind,
            "session_id": report.session_id,
        }
        for column, key in PARAM_COLUMNS.items():
            row[column] = report.params.get(key)
        for name in METRIC_NAMES:
            row[name] = report.values[name]
        for name in METRIC_NAMES:
            row[f"{name}_normalized"] = report.normalized[name] if report.normalized else None
        row["overall"] = report.overall
        rows.append(row)
    columns = (["algorithm", "task", "session_id"] + list(PARAM_COLUMNS) + list(METRIC_NAMES)
               + [f"{name}_normalized" for name in METRIC_NAMES] + ["overall"])
    return pd.DataFrame(rows, columns=columns)


def aggregate_reports(reports: Sequence[MetricReport], by: Sequence[str] = ("algorithm",),
                      normalized: bool = True) -> pd.DataFrame:
    """
    按算法和/或任务汇总均值与标准差

    Args:
        reports: 报告列表
        by: 分组列，取 algorithm、task 的组合
        normalized: True 时汇总归一化偏差与 Overall，否则汇总原始值

    Returns:
        pd.DataFrame: 每组一行，列为 <指标>_mean、<指标>_std；单个样本的组标准差为 0
    """
    frame = reports_frame(reports)
    if normalized:
        value_columns = [f"{name}_normalized" for name in METRIC_NAMES] + ["overall"]
    else:
        value_columns = list(METRIC_NAMES)
    frame[value_columns] = frame[value_columns].astype(float)
    grouped = frame.groupby(list(by), sort=True)[value_columns]
    means = grouped.mean().add_suffix("_mean")
    stds = grouped.std(ddof=1).fillna(0.0).add_suffix("_std")
    table = pd.concat([means, stds], axis=1)
    ordered: List[str] = []
    for column in value_columns:
        ordered += [f"{column}_mean", f"{column}_std"]
    return table[ordered].reset_index()


def format_mean_std(table: pd.DataFrame, digits: int = 3) -> pd.DataFrame:
    """把 <列>_mean / <列>_std 合成 "均值±标准差" 文本列"""
    key_columns = [c for c in table.columns if not c.endswith("_mean") and not c.endswith("_std")]
    result = table[key_columns].copy()
    for column in table.columns:
        if column.endswith("_mean"):
            base = column[:-len("_mean")]
            result[base] = [f"{m:.{digits}f}±{s:.{digits}f}"
                            for m, s in zip(table[column], table[f"{base}_std"])]
    return result


def long_format_series(reports: Sequence[MetricReport]) -> pd.DataFrame:
    """长格式：metric, algorithm, task, session, value（原始值、归一化值与 Overall）"""
    rows = []
    for report in reports:
        base = {"algorithm": report.algorithm, "task": report.task_kind, "session": report.session_id}
        for name in METRIC_NAMES:
            rows.append({"metric": name, **base, "value": report.values[name]})
        if report.normalized is not None:
            for name in METRIC_NAMES:
                rows.append({"metric": f"{name}_normalized", **base, "value": report.normalized[name]})
            rows.append({"metric": "overall", **base, "value": report.overall})
    return pd.DataFrame(rows, columns=["metric", "algorithm", "task", "session", "value"])
