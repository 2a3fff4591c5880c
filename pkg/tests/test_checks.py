import time

import pytest

from qprobe import checks
from qprobe.checks import CheckConfig, replay, run_all, run_case, run_suite


@pytest.fixture(scope="module")
def default_results():
    return {r.name: r for r in run_all(CheckConfig())}


def test_default_seeds_pass(default_results):
    assert set(default_results) == set(checks.SUITES)
    for r in default_results.values():
        assert r.passed, r.to_json()


def test_case_counts(default_results):
    assert default_results["compatibility"].cases == 1000
    assert default_results["rule_b_born"].cases == 500


def test_cases_are_replayable():
    a = run_case("rule_b_born", 7, 13)
    b = run_case("rule_b_born", 7, 13)
    assert a.deviation == b.deviation and a.inputs == b.inputs


def test_injected_fault_fails_and_replays():
    res = run_suite("rule_b_born", CheckConfig(inject_fault=True))
    assert not res.passed
    case = res.failing
    assert case["suite"] == "rule_b_born" and case["index"] == 0
    again, ok = replay(case)
    assert not ok and again.deviation == case["deviation"]
    # the same case without the fault passes
    _, ok = replay({**case, "inject_fault": False})
    assert ok


def test_trial_count_scales_runtime_linearly():
    def timed(trials):
        t0 = time.perf_counter()
        res = run_suite("frame_function", CheckConfig(frame_trials=trials))
        return time.perf_counter() - t0, res

    t_small, _ = timed(1000)
    t_big, res = timed(10000)
    assert res.passed
    # loose bounds: linear scaling means roughly 10x, far from quadratic 100x
    assert 3 < t_big / t_small < 30
