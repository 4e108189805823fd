#!/usr/bin/env python3
"""
验收测试脚本
Acceptance Test Script

在仿真语料上检查噪声为零时的恢复、理想 FQnS、m-IVDT 的排序优势、
m-IVDT 与 IVDT 的等价、IVT 单调性、归一化性质与端到端确定性
"""

import os
import sys
import math
import json
import logging
from pathlib import Path

import numpy as np
import pytest

from classifiers import FIXATION, PAPER_OPTIMAL_PRESETS, ClassifierParams, classify
from geometry import Room, SceneGeometry, Vec3
from main import run
from metrics import METRIC_NAMES, basic_metrics, fqls, fqns, ideal_fqns, sqns
from protocol import StimulusProtocol, StimulusTarget, TaskKind, generate_protocol
from simulator import SimulationConfig, materialize_session, simulate_session
from tuner import compare_algorithms, select_best
from utils.io_utils import file_sha256

os.environ.setdefault("GAZE_EVENTS_LOG_FILE", "")

logging.basicConfig(level=logging.INFO, format='%(levelname)s: %(message)s')
logger = logging.getLogger(__name__)

VIEWER = Vec3(0.0, 1.2, 0.0)
WALL_Z = 2.0
NOISE_FREE = SimulationConfig(angular_noise_sigma=0.0, rate_jitter=0.0, seed=1)
VELOCITY_LEVELS = [30.0 + 10.0 * i for i in range(13)]

_CACHE = {}


def wall_protocol(amplitude: float, n_targets: int = 21, dwell: float = 1500.0) -> StimulusProtocol:
    """
    目标在 z = 2 m 的显示墙上左右交替，相邻目标相距 amplitude 度

    远墙就是显示墙，噪声为零时射线落在目标中心。
    """
    offset = WALL_Z * math.tan(math.radians(amplitude))
    targets = tuple(
        StimulusTarget(Vec3(0.0 if i % 2 == 0 else offset, 1.2, WALL_Z), onset=i * dwell, dwell=dwell)
        for i in range(n_targets)
    )
    room = Room(minimum=Vec3(-5.0, -3.0, -4.9), maximum=Vec3(5.0, 5.4, WALL_Z))
    return StimulusProtocol(targets=targets, scene=SceneGeometry(room=room), task_kind=TaskKind.SINGLE_TARGET,
                            viewer_origin=VIEWER, protocol_id=f"wall_{amplitude:g}")


def simulated(protocol: StimulusProtocol, config: SimulationConfig):
    frame, truth = simulate_session(protocol, config)
    return materialize_session(protocol, frame), truth


def far_miss_corpus():
    """100 个默认规模（21 目标）的会话，15% 的注视样本偏离到远墙"""
    if "far_miss" not in _CACHE:
        corpus = []
        for i in range(100):
            protocol = generate_protocol("single", seed=1000 + i, protocol_id=f"single_{i + 1:03d}")
            session, _ = simulated(protocol, SimulationConfig(seed=i, far_miss_rate=0.15))
            corpus.append(session)
        _CACHE["far_miss"] = corpus
    return _CACHE["far_miss"]


def far_miss_reports():
    if "reports" not in _CACHE:
        _CACHE["reports"] = compare_algorithms(far_miss_corpus(), PAPER_OPTIMAL_PRESETS)
    return _CACHE["reports"]


def test_noise_free_recovery_under_optimal_presets():
    for seed in (1, 2, 3):
        protocol = generate_protocol("single", seed=seed)
        session, _ = simulated(protocol, SimulationConfig(angular_noise_sigma=0.0, seed=seed))
        assert protocol.n_targets == 21 and protocol.targets[0].dwell == 1500.0
        for algorithm in ("ivt", "ivdt", "mivdt"):
            stream = classify(algorithm, session, PAPER_OPTIMAL_PRESETS[algorithm])
            basic = basic_metrics(stream, session.positions, session.origins)
            assert abs(basic.fn_count - 21) <= 1, (seed, algorithm)
            assert abs(basic.sn_count - 20) <= 1, (seed, algorithm)
            assert 90.0 <= sqns(stream, protocol, session.positions, session.origins) <= 110.0, (seed, algorithm)
            value, undefined = fqls(stream, protocol, session.session_id)
            assert not undefined and value < 0.02, (seed, algorithm)

        # IDT 的组随样本增长，扫视两侧的样本并入相邻注视，只要求注视数量
        idt = classify("idt", session, PAPER_OPTIMAL_PRESETS["idt"])
        assert abs(basic_metrics(idt, session.positions, session.origins).fn_count - 21) <= 1, seed


def test_ideal_fqns_and_measured_fqns():
    protocol = wall_protocol(10.0)
    assert ideal_fqns(protocol) == pytest.approx(84.57, abs=0.01)

    session, _ = simulated(protocol, NOISE_FREE)
    stream = classify("ivdt", session, PAPER_OPTIMAL_PRESETS["ivdt"])
    measured = fqns(stream, protocol, session_id=session.session_id)
    assert abs(measured - ideal_fqns(protocol)) <= 3.0
    # 全时长计分把潜伏期内停留在上一目标的时间也记入
    assert fqns(stream, protocol, clip=False, session_id=session.session_id) > measured + 10.0


def test_mivdt_ordering_on_far_miss_corpus():
    reports = far_miss_reports()
    by_algorithm = {}
    for report in reports:
        by_algorithm.setdefault(report.algorithm, []).append(report)
    assert [r.session_id for r in by_algorithm["mivdt"]] == [r.session_id for r in by_algorithm["ivdt"]]

    fqls_of = {name: np.array([r.values["fqls"] for r in rows]) for name, rows in by_algorithm.items()}
    consistent = int(np.sum(fqls_of["mivdt"] < fqls_of["ivdt"]))
    assert consistent >= 95
    assert fqls_of["mivdt"].mean() < fqls_of["ivdt"].mean() < fqls_of["idt"].mean()

    mean_overall = {name: float(np.mean([r.overall for r in rows])) for name, rows in by_algorithm.items()}
    assert min(mean_overall, key=mean_overall.get) == "mivdt"


def test_mivdt_equals_ivdt_without_far_points():
    room = Room(minimum=Vec3(-5.0, -3.0, -4.9), maximum=Vec3(5.0, 5.4, 4.5))
    params = PAPER_OPTIMAL_PRESETS["mivdt"]
    for i in range(100):
        protocol = generate_protocol("single" if i % 2 == 0 else "multi", seed=2000 + i,
                                     n_targets=6, room=room)
        session, _ = simulated(protocol, SimulationConfig(seed=i))
        assert float(np.max(session.positions[:, 2])) < 4.9
        ivdt = classify("ivdt", session, params)
        mivdt = classify("mivdt", session, params)
        assert np.array_equal(ivdt.labels, mivdt.labels)
        assert ivdt.fixations == mivdt.fixations


def test_ivt_fixation_count_monotone_in_threshold():
    for seed in range(50):
        protocol = generate_protocol("single", seed=seed, n_targets=3)
        session, _ = simulated(protocol, SimulationConfig(seed=seed, blink_rate=20.0))
        counts = [int(np.sum(classify("ivt", session, ClassifierParams(velocity_threshold=v)).labels == FIXATION))
                  for v in VELOCITY_LEVELS]
        assert counts == sorted(counts), seed


def test_normalization_and_overall_properties():
    reports = far_miss_reports()
    for report in reports:
        normalized = [report.normalized[name] for name in METRIC_NAMES]
        assert all(0.0 <= value <= 1.0 for value in normalized)
        assert report.overall == pytest.approx(math.fsum(normalized) / len(normalized), abs=1e-12)
    for name in METRIC_NAMES:
        column = [r.normalized[name] for r in reports]
        assert min(column) == 0.0
        assert max(column) in (0.0, 1.0)

    # 每个算法当作一个“组合”，argmin 不随单调变换改变
    names = ["ivt", "idt", "ivdt", "mivdt"]
    params = [PAPER_OPTIMAL_PRESETS[name] for name in names]
    means = [float(np.mean([r.overall for r in reports if r.algorithm == name])) for name in names]
    best = select_best(params, means)
    assert select_best(params, [math.exp(3.0 * m) + 7.0 for m in means]) == best
    assert select_best(params, [m ** 3 for m in means]) == best


def test_end_to_end_rerun_is_byte_identical(tmp_path):
    grid = {"velocity": {"start": 120, "stop": 140, "step": 20},
            "duration": {"start": 100, "stop": 120, "step": 20},
            "dispersion": {"start": 5.5, "stop": 5.75, "step": 0.25}}
    pipeline = [
        ["simulate", "corpus", "--task", "both", "--sessions", "4", "--seed", "3", "--n-targets", "4",
         "--blink-rate", "10", "--far-miss-rate", "0.1"],
        ["classify", "corpus", "classified", "--algo", "mivdt", "--preset", "paper-optimal"],
        ["evaluate", "corpus", "eval", "--classified", "classified", "--oracle"],
        ["tune", "corpus", "tune", "--algo", "ivdt", "--grid", "grid.json", "--workers", "2"],
    ]
    cwd = os.getcwd()
    trees = []
    try:
        for name in ("first", "second"):
            folder = tmp_path / name
            folder.mkdir()
            (folder / "grid.json").write_text(json.dumps(grid), encoding="utf-8")
            os.chdir(folder)
            for argv in pipeline:
                assert run(argv) == 0, argv
            trees.append({p.relative_to(folder).as_posix(): file_sha256(p)
                          for p in sorted(folder.rglob("*")) if p.is_file()})
    finally:
        os.chdir(cwd)
    assert trees[0] == trees[1]
    assert {"tune/table.csv", "tune/best.json", "eval/reports.csv", "corpus/manifest.json"} <= set(trees[0])


def run_all_tests():
    """运行所有测试"""
    import tempfile

    logger.info("🧪 开始验收测试...")
    tests = [
        ("噪声为零时的恢复", test_noise_free_recovery_under_optimal_presets),
        ("理想与实测 FQnS", test_ideal_fqns_and_measured_fqns),
        ("m-IVDT 排序优势", test_mivdt_ordering_on_far_miss_corpus),
        ("m-IVDT 与 IVDT 等价", test_mivdt_equals_ivdt_without_far_points),
        ("IVT 单调性", test_ivt_fixation_count_monotone_in_threshold),
        ("归一化与 Overall", test_normalization_and_overall_properties),
    ]
    passed = 0
    for name, func in tests:
        try:
            func()
            passed += 1
            logger.info(f"✅ {name}")
        except Exception as e:
            logger.error(f"❌ {name} 测试失败: {e}")
    try:
        with tempfile.TemporaryDirectory() as folder:
            test_end_to_end_rerun_is_byte_identical(Path(folder))
        passed += 1
        logger.info("✅ 端到端确定性")
    except Exception as e:
        logger.error(f"❌ 端到端确定性 测试失败: {e}")
    total = len(tests) + 1
    logger.info(f"📊 测试结果: {passed}/{total} 通过")
    return passed == total


if __name__ == "__main__":
    success = run_all_tests()
    sys.exit(0 if success else 1)
