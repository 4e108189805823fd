#!/usr/bin/env python3
"""
参数调优测试脚本
Threshold Tuning Test Script
"""

import sys
import json
import logging
from dataclasses import replace

import numpy as np
import pytest

from classifiers import PAPER_OPTIMAL_PRESETS, ClassifierParams, GazeArrays
from metrics import METRIC_NAMES
from protocol import generate_protocol
from simulator import SimulationConfig, materialize_session, simulate_session
from tuner import (
    TABLE_COLUMNS,
    CheckpointStore,
    CorpusEntry,
    ParamGrid,
    RangeSpec,
    compare_algorithms,
    corpus_key,
    enumerate_grid,
    load_grid,
    run_grid,
    select_best,
)
from utils.errors import ContractError, UsageError

logging.basicConfig(level=logging.INFO, format='%(levelname)s: %(message)s')
logger = logging.getLogger(__name__)

SMALL_IVDT_GRID = ParamGrid(velocity=RangeSpec(100.0, 140.0, 20.0),
                            duration=RangeSpec(90.0, 110.0, 20.0),
                            dispersion=RangeSpec(5.5, 5.75, 0.25))

_CORPUS_CACHE = {}


def small_corpus(sessions: int = 2, far_miss_rate: float = 0.0):
    """若干个 5 目标的仿真会话（模块内缓存）"""
    key = (sessions, far_miss_rate)
    if key not in _CORPUS_CACHE:
        corpus = []
        for seed in range(sessions):
            protocol = generate_protocol("single", seed=40 + seed, n_targets=4, protocol_id=f"single_{seed + 1:03d}")
            frame, _ = simulate_session(protocol, SimulationConfig(seed=seed, far_miss_rate=far_miss_rate))
            corpus.append(materialize_session(protocol, frame))
        _CORPUS_CACHE[key] = corpus
    return _CORPUS_CACHE[key]


def test_range_spec_inclusive():
    assert len(RangeSpec(30.0, 150.0, 10.0)) == 13
    assert len(RangeSpec(50.0, 150.0, 10.0)) == 11
    assert len(RangeSpec(1.0, 6.0, 0.25)) == 21
    assert len(RangeSpec(1.25, 6.0, 0.25)) == 20
    values = RangeSpec(1.0, 6.0, 0.25).values()
    assert values[0] == 1.0 and values[-1] == 6.0 and values[3] == 1.75
    assert RangeSpec(5.0, 5.0, 1.0).values() == [5.0]
    for bad in ((1.0, 2.0, 0.0), (3.0, 2.0, 1.0), (1.0, float("inf"), 1.0)):
        with pytest.raises(ContractError):
            RangeSpec(*bad)


def test_grid_cardinalities():
    grid = ParamGrid()
    twenty = ParamGrid.twenty_level()
    assert len(enumerate_grid(grid, "ivt")) == 13
    assert len(enumerate_grid(grid, "idt")) == 231
    assert len(enumerate_grid(twenty, "idt")) == 220
    assert len(enumerate_grid(twenty, "ivdt")) == 2860
    assert len(enumerate_grid(twenty, "m-IVDT")) == 2860
    assert len(enumerate_grid(grid, "ivdt")) == 13 * 11 * 21


def test_grid_order_and_fields():
    combos = enumerate_grid(SMALL_IVDT_GRID, "ivdt")
    keys = [(c.velocity_threshold, c.min_fixation_duration, c.dispersion_threshold) for c in combos]
    assert keys == sorted(keys)
    assert keys[0] == (100.0, 90.0, 5.5) and keys[1] == (100.0, 90.0, 5.75)

    ivt = enumerate_grid(ParamGrid(), "ivt")
    assert ivt[0] == ClassifierParams(velocity_threshold=30.0)
    assert all(c.dispersion_threshold is None and c.min_fixation_duration is None for c in ivt)

    mivdt = enumerate_grid(SMALL_IVDT_GRID, "mivdt", z_threshold=4.5)
    assert all(c.z_outlier_threshold == 4.5 for c in mivdt)
    with pytest.raises(UsageError):
        enumerate_grid(ParamGrid(), "kmeans")


def test_load_grid(tmp_path):
    assert load_grid(None) == ParamGrid()
    assert load_grid("default") == ParamGrid()
    assert len(load_grid("default20").dispersion) == 20

    path = tmp_path / "grid.json"
    path.write_text(json.dumps({"velocity": {"start": 100, "stop": 120, "step": 10}}), encoding="utf-8")
    grid = load_grid(path)
    assert grid.velocity.values() == [100.0, 110.0, 120.0]
    assert grid.duration == ParamGrid().duration
    assert ParamGrid.from_dict(grid.to_dict()) == grid

    path.write_text(json.dumps({"pupil": {"start": 1, "stop": 2, "step": 1}}), encoding="utf-8")
    with pytest.raises(ContractError):
        load_grid(path)
    path.write_text(json.dumps({"velocity": {"start": 1}}), encoding="utf-8")
    with pytest.raises(ContractError):
        load_grid(path)


def test_select_best_ties_and_failures():
    params = [
        ClassifierParams(velocity_threshold=120.0, dispersion_threshold=5.0, min_fixation_duration=100.0),
        ClassifierParams(velocity_threshold=100.0, dispersion_threshold=5.5, min_fixation_duration=100.0),
        ClassifierParams(velocity_threshold=100.0, dispersion_threshold=5.0, min_fixation_duration=90.0),
        ClassifierParams(velocity_threshold=100.0, dispersion_threshold=5.0, min_fixation_duration=110.0),
        ClassifierParams(velocity_threshold=30.0, dispersion_threshold=1.0, min_fixation_duration=50.0),
    ]
    assert select_best(params, [0.2, 0.2, 0.2, 0.2, None]) == 3
    assert select_best(params, [0.1, 0.2, 0.2, 0.2, None]) == 0
    assert select_best(params, [None] * 5) == -1


def test_select_best_invariant_under_monotone_rescaling():
    rng = np.random.default_rng(1)
    params = enumerate_grid(ParamGrid(), "ivt")
    for _ in range(20):
        overall = [float(v) for v in rng.uniform(0, 1, len(params))]
        best = select_best(params, overall)
        assert select_best(params, [3.0 * v + 1.0 for v in overall]) == best
        assert select_best(params, [float(np.exp(v)) for v in overall]) == best


def test_run_grid_ivt_table_and_summary():
    corpus = small_corpus()
    result = run_grid(corpus, "ivt", ParamGrid(), run_id="ivt-run")
    assert len(result.params) == 13
    table = result.table()
    assert list(table.columns) == TABLE_COLUMNS
    assert len(table) == 13 * len(corpus)
    assert table["overall"].between(0.0, 1.0).all()

    summary = result.summary_frame()
    assert len(summary) == 13
    assert summary["error"].eq("").all()
    for name in METRIC_NAMES:
        assert summary[name].between(0.0, 1.0).all()

    best = result.best_index
    assert result.mean_overall[best] == min(result.mean_overall)
    payload = result.summary()
    assert payload["combos"] == 13 and payload["failed_combos"] == 0
    assert payload["best"]["velocity"] == result.best_params.velocity_threshold
    assert payload["best"]["z_threshold"] is None
    assert payload["normalization"]["run_id"] == "ivt-run"

    for reports in result.reports:
        for report in reports:
            assert report.overall == pytest.approx(sum(report.normalized.values()) / 7, abs=1e-12)


def test_run_grid_identical_sessions_identical_reports():
    session = small_corpus()[0]
    twin = replace(session, session_id="twin")
    result = run_grid([session, twin], "ivdt", SMALL_IVDT_GRID)
    for reports in result.reports:
        first, second = reports
        assert first.values == second.values
        assert first.overall == second.overall


def test_run_grid_serial_and_parallel_match():
    corpus = small_corpus()
    serial = run_grid(corpus, "ivdt", SMALL_IVDT_GRID, workers=1)
    parallel = run_grid(corpus, "ivdt", SMALL_IVDT_GRID, workers=2)
    assert serial.table().equals(parallel.table())
    assert serial.best_index == parallel.best_index


def test_run_grid_idt_and_mivdt():
    corpus = small_corpus(far_miss_rate=0.1)
    idt_grid = ParamGrid(duration=RangeSpec(100.0, 150.0, 50.0), dispersion=RangeSpec(5.0, 6.0, 0.5))
    idt = run_grid(corpus, "idt", idt_grid)
    assert len(idt.params) == 6 and idt.best_index >= 0
    mivdt = run_grid(corpus, "m-ivdt", SMALL_IVDT_GRID, z_threshold=4.9)
    assert mivdt.algorithm == "mivdt"
    assert mivdt.summary()["best"]["z_threshold"] == 4.9


def test_run_grid_records_failures():
    session = small_corpus()[0]
    shifted = GazeArrays([t + 1e6 for t in session.timestamps.tolist()], session.positions.tolist(),
                         session.origins.tolist(), session.velocities.tolist())
    entry = CorpusEntry.from_session(session)
    broken = replace(entry, session_id="shifted", arrays=shifted)
    result = run_grid([broken], "ivt", ParamGrid(velocity=RangeSpec(100.0, 120.0, 10.0)))
    assert result.best_index == -1 and result.best_params is None
    assert len(result.errors) == 3
    assert result.summary()["best"] is None
    assert result.summary_frame()["error"].ne("").all()


def test_run_grid_survives_unexpected_errors():
    """某个组合在分类时抛出普通异常，只有该组合失败"""
    import tuner.grid_search as grid_search

    original = grid_search.classify_ivt

    def flaky(points, params):
        if params.velocity_threshold == 110.0:
            raise ValueError("数值异常")
        return original(points, params)

    with pytest.MonkeyPatch.context() as patch:
        patch.setattr(grid_search, "classify_ivt", flaky)
        result = run_grid(small_corpus(), "ivt", ParamGrid(velocity=RangeSpec(100.0, 120.0, 10.0)))

    assert set(result.errors) == {1}
    assert result.errors[1].startswith("ValueError")
    assert result.reports[1] == [] and result.mean_overall[1] is None
    assert len(result.reports[0]) == len(result.reports[2]) == len(small_corpus())
    assert result.best_index in (0, 2)


def test_run_grid_contracts():
    with pytest.raises(ContractError):
        run_grid([], "ivt", ParamGrid())
    session = replace(small_corpus()[0], protocol=None)
    with pytest.raises(ContractError):
        run_grid([session], "ivt", ParamGrid())


def test_checkpoint_resume_matches_uninterrupted(tmp_path):
    corpus = small_corpus()
    entries = [CorpusEntry.from_session(s) for s in corpus]
    key = corpus_key(entries, "ivdt", "boundary", False)
    store = CheckpointStore(tmp_path / "checkpoints", run_key=key)
    full = run_grid(entries, "ivdt", SMALL_IVDT_GRID, checkpoint=store)
    assert store.count() == 12

    files = sorted(store.directory.glob("*.json"))
    for path in files[:6]:
        path.unlink()
    resumed = run_grid(entries, "ivdt", SMALL_IVDT_GRID, checkpoint=CheckpointStore(store.directory, run_key=key))
    assert resumed.table().equals(full.table())
    assert resumed.summary_frame().equals(full.summary_frame())
    assert store.count() == 12


def test_checkpoint_store_round_trip(tmp_path):
    store = CheckpointStore(tmp_path, run_key="abc")
    params = PAPER_OPTIMAL_PRESETS["ivt"]
    assert not store.has("ivt", params)
    store.save("ivt", params, None, error="会话 x 对齐失败")
    assert store.load("ivt", params) == (None, "会话 x 对齐失败")
    assert store.key("ivt", params) != CheckpointStore(tmp_path, run_key="other").key("ivt", params)
    assert not list(tmp_path.glob("*.tmp"))


def test_corpus_key_tracks_settings():
    entries = [CorpusEntry.from_session(s) for s in small_corpus()]
    base = corpus_key(entries, "ivdt", "boundary", False)
    assert base == corpus_key(entries, "ivdt", "boundary", False)
    assert base != corpus_key(entries, "ivdt", "centroid", False)
    assert base != corpus_key(entries, "ivdt", "boundary", True)
    assert base != corpus_key(entries[:1], "ivdt", "boundary", False)

    # 只改动一个样本的位置，长度、末时间戳与速度都不变
    arrays = entries[0].arrays
    positions = [list(p) for p in arrays.positions]
    positions[3][0] += 1e-9
    edited = replace(entries[0], arrays=GazeArrays(arrays.timestamps, positions, arrays.origins, arrays.velocities))
    assert base != corpus_key([edited, *entries[1:]], "ivdt", "boundary", False)

    origins = [list(o) for o in arrays.origins]
    origins[-2][1] += 1e-9
    edited = replace(entries[0], arrays=GazeArrays(arrays.timestamps, arrays.positions, origins, arrays.velocities))
    assert base != corpus_key([edited, *entries[1:]], "ivdt", "boundary", False)


def test_compare_algorithms_union_normalization():
    corpus = small_corpus()
    reports = compare_algorithms(corpus, dict(PAPER_OPTIMAL_PRESETS), run_id="cmp")
    assert len(reports) == 4 * len(corpus)
    assert [r.algorithm for r in reports] == [a for a in ("ivt", "idt", "ivdt", "mivdt") for _ in corpus]
    assert [r.session_id for r in reports[:len(corpus)]] == [s.session_id for s in corpus]
    provenance = reports[0].provenance
    assert all(r.provenance == provenance for r in reports)
    assert all(0.0 <= r.overall <= 1.0 for r in reports)
    with pytest.raises(ContractError):
        compare_algorithms([], dict(PAPER_OPTIMAL_PRESETS))


def run_all_tests():
    """运行所有调参测试"""
    import tempfile
    from pathlib import Path

    logger.info("🚀 开始参数调优测试...")
    tests = [
        ("闭区间取值", test_range_spec_inclusive),
        ("网格规模", test_grid_cardinalities),
        ("网格顺序", test_grid_order_and_fields),
        ("并列与失败", test_select_best_ties_and_failures),
        ("单调变换不变", test_select_best_invariant_under_monotone_rescaling),
        ("IVT 网格", test_run_grid_ivt_table_and_summary),
        ("相同会话", test_run_grid_identical_sessions_identical_reports),
        ("串行与并行", test_run_grid_serial_and_parallel_match),
        ("IDT 与 m-IVDT", test_run_grid_idt_and_mivdt),
        ("失败记录", test_run_grid_records_failures),
        ("意外错误只作废单个组合", test_run_grid_survives_unexpected_errors),
        ("调参约束", test_run_grid_contracts),
        ("语料指纹", test_corpus_key_tracks_settings),
        ("算法比较", test_compare_algorithms_union_normalization),
    ]
    tmp_tests = [
        ("网格文件", test_load_grid),
        ("断点续跑", test_checkpoint_resume_matches_uninterrupted),
        ("检查点读写", test_checkpoint_store_round_trip),
    ]
    passed = 0
    for name, func in tests:
        try:
            func()
            passed += 1
            logger.info(f"✅ {name}")
        except Exception as e:
            logger.error(f"❌ {name} 测试失败: {e}")
    for name, func in tmp_tests:
        try:
            with tempfile.TemporaryDirectory() as folder:
                func(Path(folder))
            passed += 1
            logger.info(f"✅ {name}")
        except Exception as e:
            logger.error(f"❌ {name} 测试失败: {e}")
    total = len(tests) + len(tmp_tests)
    logger.info(f"📊 测试结果: {passed}/{total} 通过")
    return passed == total


if __name__ == "__main__":
    success = run_all_tests()
    sys.exit(0 if success else 1)
