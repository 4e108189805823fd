#!/usr/bin/env python3
"""
评价指标测试脚本
Evaluation Metrics Test Script
"""

import sys
import math
import logging
import random
from types import SimpleNamespace

import numpy as np
import pytest

from classifiers import FIXATION, SACCADE, ClassifierParams, Fixation, LabeledStream
from geometry import SceneGeometry, Vec3, centroid, chord_length
from metrics import (
    METRIC_NAMES,
    IdealValues,
    MetricReport,
    aggregate_reports,
    basic_metrics,
    concurrent_target,
    evaluate_session,
    format_mean_std,
    fqls,
    fqns,
    ideal_fqns,
    long_format_series,
    normalize_deviations,
    normalize_reports,
    overall_score,
    proximity_radii,
    reports_frame,
    saccade_duration,
    sqns,
)
from protocol import StimulusProtocol, StimulusTarget, TaskKind
from utils.errors import AlignmentError, ContractError, UndefinedMetricError

logging.basicConfig(level=logging.INFO, format='%(levelname)s: %(message)s')
logger = logging.getLogger(__name__)

VIEWER = Vec3(0.0, 1.2, 0.0)
RANGE_M = 2.0


def _at(angle_deg: float) -> Vec3:
    """观察点前方 2 m、水平偏转 angle_deg 的位置"""
    theta = math.radians(angle_deg)
    return Vec3(RANGE_M * math.sin(theta), 1.2, RANGE_M * math.cos(theta))


def _protocol(angles, dwell=1500.0) -> StimulusProtocol:
    targets = tuple(StimulusTarget(_at(a), onset=i * dwell, dwell=dwell) for i, a in enumerate(angles))
    return StimulusProtocol(targets=targets, scene=SceneGeometry(), task_kind=TaskKind.SINGLE_TARGET,
                            viewer_origin=VIEWER, protocol_id="hand")


def _fixation(position, t_start, duration, first=0, last=0) -> Fixation:
    return Fixation(x_f=position[0], y_f=position[1], z_f=position[2], t_start=t_start, duration=duration,
                    first_index=first, last_index=last)


def _two_dwell_session():
    """
    两目标（相距 10°）各停留 1500 ms，每 100 ms 一个样本：
    0..13 注视 a，14..15 扫视，16..29 注视 b
    """
    protocol = _protocol([0.0, 10.0])
    a, b = protocol.targets[0].position, protocol.targets[1].position
    middle = _at(5.0)
    positions = np.asarray([a] * 14 + [middle] * 2 + [b] * 14, dtype=float)
    origins = np.tile(np.asarray(VIEWER, dtype=float), (30, 1))
    timestamps = np.arange(30) * 100.0
    labels = np.asarray([FIXATION] * 14 + [SACCADE] * 2 + [FIXATION] * 14, dtype=np.int8)
    fixations = []
    for first, last in ((0, 13), (16, 29)):
        c = centroid(positions[first:last + 1])
        fixations.append(_fixation(c, timestamps[first], timestamps[last] - timestamps[first], first, last))
    stream = LabeledStream(labels=labels, fixations=fixations, algorithm="ivdt",
                           params=ClassifierParams(velocity_threshold=140.0, dispersion_threshold=5.75,
                                                   min_fixation_duration=110.0))
    session = SimpleNamespace(session_id="hand_001", positions=positions, origins=origins,
                              timestamps=timestamps, protocol=protocol)
    return session, stream, protocol


def test_saccade_duration_model():
    assert saccade_duration(10.0) == pytest.approx(43.0)
    assert saccade_duration(0.0) == 21.0


def test_simulator_shares_saccade_model():
    import metrics.scores
    import protocol
    import simulator.gaze_simulator
    # 理想值与仿真器必须使用同一主序列模型与潜伏期
    assert metrics.scores.saccade_duration is protocol.saccade_duration
    assert simulator.gaze_simulator.saccade_duration is protocol.saccade_duration
    assert simulator.gaze_simulator.SimulationConfig().saccadic_latency == protocol.SACCADIC_LATENCY_MS
    assert metrics.scores.SACCADIC_LATENCY_MS == protocol.SACCADIC_LATENCY_MS


def test_ideal_fqns_examples():
    protocol = _protocol([0.0 if i % 2 == 0 else 10.0 for i in range(21)])
    assert ideal_fqns(protocol) == pytest.approx(100 * (1 - (20 * 200 + 20 * 43) / 31500), abs=0.01)
    assert ideal_fqns(protocol) == pytest.approx(84.57, abs=0.01)
    same = _protocol([0.0] * 5)
    assert ideal_fqns(same) == pytest.approx(100 * (1 - (4 * 200 + 4 * 21) / 7500))
    with pytest.raises(ContractError):
        ideal_fqns(_protocol([0.0]))


def test_ideal_values_for_protocol():
    protocol = _protocol([0.0 if i % 2 == 0 else 10.0 for i in range(21)])
    derived = IdealValues.for_protocol(protocol)
    assert (derived.ideal_afn, derived.ideal_afd, derived.ideal_ans) == (21.0, 1500.0, 20.0)
    assert derived.ideal_asa == pytest.approx(10.0)
    assert 0 < derived.ideal_fqns < 100
    fixed = IdealValues.for_protocol(_protocol([0.0, 10.0, 0.0]), derive_counts=False)
    assert (fixed.ideal_afn, fixed.ideal_afd, fixed.ideal_ans) == (21.0, 1500.0, 20.0)
    assert fixed.ideal_fqls == 0.5 and fixed.ideal_sqns == 100.0


def test_basic_metrics_examples():
    labels = np.full(16, FIXATION, dtype=np.int8)
    stream = LabeledStream(labels=labels, fixations=[_fixation(_at(0), 0.0, 1500.0, 0, 15)])
    positions = np.tile(np.asarray(_at(0)), (16, 1))
    origins = np.tile(np.asarray(VIEWER), (16, 1))
    basic = basic_metrics(stream, positions, origins)
    assert (basic.fn_count, basic.afd, basic.sn_count, basic.asa) == (1.0, 1500.0, 0.0, 0.0)
    assert "no_saccades" in basic.flags

    two = LabeledStream(labels=labels, fixations=[_fixation(_at(0), 0.0, 1000.0, 0, 7),
                                                  _fixation(_at(0), 1000.0, 2000.0, 8, 15)])
    assert basic_metrics(two, positions, origins).afd == 1500.0

    empty = LabeledStream(labels=np.full(16, SACCADE, dtype=np.int8))
    flagged = basic_metrics(empty, positions, origins)
    assert flagged.afd == 0.0 and "no_fixations" in flagged.flags
    # 覆盖首尾的扫视段两侧没有样本，不计幅度
    assert flagged.sn_count == 1.0 and flagged.asa == 0.0

    with pytest.raises(ContractError):
        basic_metrics(stream, positions[:3], origins)


def test_basic_metrics_on_hand_session():
    session, stream, _ = _two_dwell_session()
    basic = basic_metrics(stream, session.positions, session.origins)
    assert basic.fn_count == 2.0 and basic.sn_count == 1.0
    assert basic.afd == pytest.approx(1300.0)
    assert basic.asa == pytest.approx(10.0, abs=1e-9)
    assert basic.flags == []


def test_proximity_radii():
    protocol = _protocol([0.0, 10.0, 40.0])
    radii = proximity_radii(protocol)
    expected_first = chord_length(RANGE_M, 10.0 / 3.0)
    assert radii[0] == pytest.approx(expected_first)
    assert radii[1] == pytest.approx(expected_first)
    assert radii[2] == pytest.approx(chord_length(RANGE_M, 30.0 / 3.0))


def test_concurrent_target():
    protocol = _protocol([0.0, 10.0])
    assert concurrent_target(_fixation(_at(0), 100.0, 500.0), protocol) == 0
    assert concurrent_target(_fixation(_at(0), 1200.0, 1000.0), protocol) == 1
    # 重叠相同取较早的目标
    assert concurrent_target(_fixation(_at(0), 1000.0, 1000.0), protocol) == 0
    assert concurrent_target(_fixation(_at(0), 1700.0, 0.0), protocol) == 1


def test_fqns_examples():
    session, stream, protocol = _two_dwell_session()
    assert fqns(stream, protocol) == pytest.approx(100.0 * 2600.0 / 3000.0)

    far = LabeledStream(labels=stream.labels, fixations=[_fixation(_at(60.0), 0.0, 1300.0, 0, 13)])
    assert fqns(far, protocol) == 0.0

    half = [_fixation(_at(0), 0.0, 500.0), _fixation(_at(10), 1500.0, 500.0)]
    full = [_fixation(_at(0), 0.0, 1000.0), _fixation(_at(10), 1500.0, 1000.0)]
    single = fqns(LabeledStream(labels=stream.labels, fixations=half), protocol)
    double = fqns(LabeledStream(labels=stream.labels, fixations=full), protocol)
    assert double == pytest.approx(2 * single)


def test_fqns_proximity_and_clip():
    protocol = _protocol([0.0, 10.0])
    radius = proximity_radii(protocol)[0]
    a = protocol.targets[0].position
    near = Vec3(a.x + 0.5 * radius, a.y, a.z)
    outside = Vec3(a.x + 1.5 * radius, a.y, a.z)
    labels = np.full(30, FIXATION, dtype=np.int8)
    assert fqns(LabeledStream(labels, [_fixation(near, 0.0, 900.0)]), protocol) == pytest.approx(30.0)
    assert fqns(LabeledStream(labels, [_fixation(outside, 0.0, 900.0)]), protocol) == 0.0

    spanning = LabeledStream(labels, [_fixation(a, 1000.0, 1000.0)])
    assert fqns(spanning, protocol, clip=False) == pytest.approx(100.0 * 1000.0 / 3000.0)
    assert fqns(spanning, protocol) == pytest.approx(100.0 * 500.0 / 3000.0)


def test_fqns_bounded_by_fixation_time():
    rng = random.Random(4)
    protocol = _protocol([0.0, 10.0, 20.0, 5.0])
    labels = np.full(10, FIXATION, dtype=np.int8)
    for _ in range(100):
        fixations = []
        t = 0.0
        while t < 5800.0:
            duration = rng.uniform(50.0, 600.0)
            fixations.append(_fixation(_at(rng.uniform(-5, 25)), t, duration))
            t += duration + rng.uniform(20.0, 200.0)
        total = math.fsum(f.duration for f in fixations)
        assert fqns(LabeledStream(labels, fixations), protocol) <= 100.0 * total / protocol.total_dwell + 1e-9


def test_fqns_alignment_error():
    _, stream, protocol = _two_dwell_session()
    late = LabeledStream(stream.labels, [_fixation(_at(0), 10_000.0, 100.0)])
    with pytest.raises(AlignmentError):
        fqns(late, protocol, session_id="late")
    with pytest.raises(AlignmentError):
        fqls(late, protocol, session_id="late")


def test_fqls_examples():
    _, stream, protocol = _two_dwell_session()
    value, undefined = fqls(stream, protocol)
    assert value == pytest.approx(0.0, abs=1e-12) and not undefined

    a = protocol.targets[0].position
    shifted = LabeledStream(np.asarray([FIXATION] * 14 + [SACCADE] * 16, dtype=np.int8),
                            [_fixation(Vec3(a.x + 0.1, a.y, a.z), 0.0, 1300.0, 0, 13)])
    assert fqls(shifted, protocol)[0] == pytest.approx(0.1)

    nothing = LabeledStream(np.full(30, SACCADE, dtype=np.int8))
    assert fqls(nothing, protocol) == (0.0, True)


def test_fqls_weights_by_samples():
    protocol = _protocol([0.0, 10.0])
    a, b = protocol.targets[0].position, protocol.targets[1].position
    labels = np.asarray([FIXATION] * 3 + [SACCADE] + [FIXATION], dtype=np.int8)
    stream = LabeledStream(labels, [_fixation(Vec3(a.x + 0.2, a.y, a.z), 0.0, 300.0, 0, 2),
                                    _fixation(Vec3(b.x, b.y + 0.4, b.z), 1600.0, 0.0, 4, 4)])
    assert fqls(stream, protocol)[0] == pytest.approx((3 * 0.2 + 0.4) / 4)


def test_fqls_translation_invariant():
    rng = random.Random(6)
    for _ in range(20):
        shift = np.asarray([rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)])
        angles = [rng.uniform(-20, 20) for _ in range(4)]
        protocol = _protocol(angles)
        moved = StimulusProtocol(
            targets=tuple(StimulusTarget(Vec3.of(np.asarray(t.position) + shift), t.onset, t.dwell)
                          for t in protocol.targets),
            scene=protocol.scene, task_kind=protocol.task_kind, viewer_origin=Vec3.of(np.asarray(VIEWER) + shift))
        labels = np.full(8, FIXATION, dtype=np.int8)
        fixations = [_fixation(_at(a + rng.gauss(0, 2)), i * 1500.0 + 200.0, 1000.0, 2 * i, 2 * i + 1)
                     for i, a in enumerate(angles)]
        moved_fixations = [_fixation(np.asarray(f.position) + shift, f.t_start, f.duration, f.first_index,
                                     f.last_index) for f in fixations]
        original = fqls(LabeledStream(labels, fixations), protocol)[0]
        translated = fqls(LabeledStream(labels, moved_fixations), moved)[0]
        assert translated == pytest.approx(original, abs=1e-12)


def test_sqns_examples():
    session, stream, protocol = _two_dwell_session()
    assert sqns(stream, protocol, session.positions, session.origins) == pytest.approx(100.0, abs=1e-9)

    no_saccades = LabeledStream(np.full(30, FIXATION, dtype=np.int8))
    assert sqns(no_saccades, protocol, session.positions, session.origins) == 0.0

    doubled = session.positions.copy()
    doubled[16:] = np.asarray(_at(20.0))
    assert sqns(stream, protocol, doubled, session.origins) == pytest.approx(200.0, abs=1e-9)

    with pytest.raises(UndefinedMetricError):
        sqns(stream, _protocol([0.0, 0.0]), session.positions, session.origins)


def test_normalize_deviations_examples():
    normalized, constant = normalize_deviations([1.0, 3.0, 2.0])
    assert normalized == [0.0, 1.0, 0.5] and not constant
    assert normalize_deviations([4.0, 4.0, 4.0]) == ([0.0, 0.0, 0.0], True)
    assert normalize_deviations([]) == ([], False)

    rng = random.Random(9)
    values = [rng.uniform(0, 50) for _ in range(100)]
    normalized, _ = normalize_deviations(values)
    order = sorted(range(100), key=lambda i: values[i])
    assert all(normalized[i] <= normalized[j] for i, j in zip(order, order[1:]))
    assert all(0.0 <= v <= 1.0 for v in normalized)


def test_overall_score_examples():
    assert overall_score([0.0] * 7) == 0.0
    assert overall_score([1.0] * 7) == 1.0
    assert overall_score([0, 0, 0, 0, 0, 0, 0.7]) == pytest.approx(0.1)
    with pytest.raises(ContractError):
        overall_score([0.5] * 6)
    rng = random.Random(10)
    values = [rng.random() for _ in range(7)]
    shuffled = values[:]
    rng.shuffle(shuffled)
    assert overall_score(values) == overall_score(shuffled)
    bumped = values[:]
    bumped[3] = min(1.0, bumped[3] + 0.1)
    assert overall_score(bumped) >= overall_score(values)


def test_evaluate_session_report():
    session, stream, protocol = _two_dwell_session()
    report = evaluate_session(session, stream)
    assert report.session_id == "hand_001" and report.algorithm == "ivdt"
    assert report.task_kind == "single-target"
    assert report.values["fn"] == 2.0 and report.values["sn"] == 1.0
    assert report.ideals.ideal_afn == 2.0 and report.ideals.ideal_ans == 1.0
    assert report.deviations["fn"] == 0.0
    assert report.deviations["afd"] == pytest.approx(200.0)
    assert report.params["velocity_threshold"] == 140.0
    assert report.normalized is None and report.overall is None

    with pytest.raises(ContractError):
        evaluate_session(SimpleNamespace(session_id="x", positions=session.positions[:5],
                                         origins=session.origins[:5], protocol=protocol), stream)
    with pytest.raises(ContractError):
        evaluate_session(SimpleNamespace(session_id="x", positions=session.positions,
                                         origins=session.origins, protocol=None), stream)


def _report(session_id, algorithm, fn, overall_seed=0.0, task="single-target"):
    values = {name: 0.0 for name in METRIC_NAMES}
    values.update({"fn": fn, "afd": 1500.0 + overall_seed, "fqls": 0.5})
    return MetricReport(session_id=session_id, algorithm=algorithm, task_kind=task, values=values,
                        ideals=IdealValues(), params={"velocity_threshold": 100.0})


def test_normalize_reports():
    reports = [_report("s1", "ivt", 21.0), _report("s2", "ivt", 25.0, 100.0), _report("s3", "idt", 31.0, 50.0)]
    normalized = normalize_reports(reports, run_id="abc")
    assert [r.normalized["fn"] for r in normalized] == [0.0, 0.4, 1.0]
    assert [r.normalized["afd"] for r in normalized] == [0.0, 1.0, 0.5]
    assert normalized[0].overall == 0.0
    assert normalized[1].overall == pytest.approx((0.4 + 1.0) / 7)
    for report in normalized:
        assert 0.0 <= report.overall <= 1.0
        assert report.overall == pytest.approx(math.fsum(report.normalized.values()) / 7)
        assert report.provenance["run_id"] == "abc"
        assert "fqls" in report.provenance["constant_metrics"]
    assert normalized[0].provenance["normalization_max"][METRIC_NAMES.index("fn")] == 10.0
    assert reports[0].normalized is None
    assert normalize_reports([]) == []


def test_report_dict_round_trip():
    report = normalize_reports([_report("s1", "ivt", 21.0), _report("s2", "ivt", 22.0)])[1]
    payload = report.to_dict()
    assert set(payload) >= {"values", "ideals", "deviations", "normalized", "overall", "provenance"}
    again = MetricReport.from_dict(payload)
    assert again.values == report.values and again.overall == report.overall
    assert again.ideals == report.ideals


def test_aggregate_tables():
    reports = normalize_reports([_report("s1", "ivt", 21.0), _report("s2", "ivt", 25.0, 100.0),
                                 _report("s3", "idt", 31.0, 50.0, task="multi-target")])
    frame = reports_frame(reports)
    assert list(frame["velocity"]) == [100.0] * 3
    assert list(frame["dispersion"].isna()) == [True] * 3

    table = aggregate_reports(reports)
    assert list(table["algorithm"]) == ["idt", "ivt"]
    ivt = table[table["algorithm"] == "ivt"].iloc[0]
    assert ivt["fn_normalized_mean"] == pytest.approx(0.2)
    assert ivt["fn_normalized_std"] == pytest.approx(math.sqrt(0.08))
    assert table[table["algorithm"] == "idt"].iloc[0]["overall_std"] == 0.0

    raw = aggregate_reports(reports, by=("algorithm", "task"), normalized=False)
    assert "fn_mean" in raw.columns and "overall_mean" not in raw.columns

    text = format_mean_std(table)
    assert text[text["algorithm"] == "idt"].iloc[0]["fn_normalized"] == "1.000±0.000"

    series = long_format_series(reports)
    assert list(series.columns) == ["metric", "algorithm", "task", "session", "value"]
    assert len(series) == 3 * (2 * len(METRIC_NAMES) + 1)


def run_all_tests():
    """运行所有指标测试"""
    logger.info("🚀 开始评价指标测试...")
    tests = [
        ("扫视时长模型", test_saccade_duration_model),
        ("仿真器共用扫视模型", test_simulator_shares_saccade_model),
        ("理想 FQnS", test_ideal_fqns_examples),
        ("理想值", test_ideal_values_for_protocol),
        ("基础指标示例", test_basic_metrics_examples),
        ("手工会话基础指标", test_basic_metrics_on_hand_session),
        ("邻近半径", test_proximity_radii),
        ("同期目标", test_concurrent_target),
        ("FQnS 示例", test_fqns_examples),
        ("FQnS 邻近与裁剪", test_fqns_proximity_and_clip),
        ("FQnS 上界", test_fqns_bounded_by_fixation_time),
        ("时间对齐", test_fqns_alignment_error),
        ("FQlS 示例", test_fqls_examples),
        ("FQlS 样本加权", test_fqls_weights_by_samples),
        ("FQlS 平移不变", test_fqls_translation_invariant),
        ("SQnS 示例", test_sqns_examples),
        ("归一化", test_normalize_deviations_examples),
        ("Overall", test_overall_score_examples),
        ("会话报告", test_evaluate_session_report),
        ("报告归一化", test_normalize_reports),
        ("报告字典", test_report_dict_round_trip),
        ("汇总表", test_aggregate_tables),
    ]
    passed = 0
    for name, func in tests:
        try:
            func()
            passed += 1
            logger.info(f"✅ {name}")
        except Exception as e:
            logger.error(f"❌ {name} 测试失败: {e}")
    logger.info(f"📊 测试结果: {passed}/{len(tests)} 通过")
    return passed == len(tests)


if __name__ == "__main__":
    success = run_all_tests()
    sys.exit(0 if success else 1)
