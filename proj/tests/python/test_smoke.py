import math

import pytest

import frog


def test_expected_accuracy():
    assert frog.expected_accuracy_majority([0.9, 0.8, 0.7]) == pytest.approx(0.902)
    assert frog.expected_accuracy_incremental([0.9, 0.8], 0.7) == pytest.approx(0.902)
    assert frog.expected_accuracy_multichoice_majority([0.6, 0.6, 0.6], 3) == pytest.approx(0.648)
    with pytest.raises(frog.FrogError):
        frog.expected_accuracy_majority([0.9, 0.8])
    assert frog.expected_accuracy_majority([0.9, 0.8], formula_as_written=True) > 0.5


def test_profiling_helpers():
    assert frog.clamp_accuracy(0.3) == (pytest.approx(0.7), True)
    assert frog.predict_response_time([(0, 10), (1, 12)], 2, 2.0) == pytest.approx(14.0)
    recent = [(0, 1)] + [(1, 1)] * 9
    assert frog.update_accuracy(0.8, 10, recent) == pytest.approx(0.85)


def test_scheduling_helpers():
    assert frog.min_worker_set_selection(0.85, [(1, 0.9), (2, 0.8), (3, 0.7)]) == [1]
    assert len(frog.min_worker_set_selection(0.95, [(1, 0.9), (2, 0.9), (3, 0.9)])) == 3
    assert frog.min_worker_set_selection(0.99, [(1, 0.6)]) == []
    score, exponent = frog.delay_score(0.5, 0.8, 10.0, 30.0, 10.0)
    assert exponent == 2
    assert score == pytest.approx(0.16)


def test_notification_helpers():
    assert frog.rule_of_thumb_bandwidth([1.0]) == 3600.0
    kde = frog.AdaptiveKde([1000.0, 5000.0])
    assert all(h >= 300.0 for h in kde.bandwidths)
    mass = sum(kde.density(t) * 60.0 for t in range(0, 604800, 60))
    assert mass == pytest.approx(1.0, abs=0.01)
    fit = frog.em_fit([[0.2, 0.0], [0.3, 0.0], [0.1, 0.0]])
    assert fit["weights"][1] < 1e-5
    assert sum(fit["weights"]) == pytest.approx(1.0)
    quarter = 0.25 / 900.0
    offline = [(i, quarter, 0.8, 5.0) for i in range(6)]
    assert len(frog.worker_notify(offline, 1.0)) == 4


def test_simulation_round_trip():
    config = frog.SimConfig()
    config.m = 100
    config.n = 12
    config.L = 3
    config.policy = frog.Policy.BBS
    again = frog.SimConfig.from_json(config.to_json())
    assert again.m == 100 and again.policy == frog.Policy.BBS
    a = frog.run(config)
    b = frog.run(config)
    assert a.metrics_csv() == b.metrics_csv()
    assert a.completed == 100
    assert 0.0 <= a.avg_accuracy <= 1.0
    assert a.max_latency > 0.0
    assert a.trace_csv().count("\n") == 101


def test_config_errors():
    with pytest.raises(frog.ConfigError, match="foo"):
        frog.SimConfig.from_json('{"foo": 1}')
    with pytest.raises(frog.ConfigError):
        frog.SimConfig.from_json('{"q": [0.9, 0.8]}')


def test_notification_eval():
    rows = frog.notification_eval(seed=7, fractions=[0.1])
    by_method = {r["method"]: r for r in rows}
    assert set(by_method) == {"SKDE", "KDE", "NWP", "Random"}
    assert by_method["SKDE"]["recall"] >= by_method["KDE"]["recall"]
    assert all(0.0 <= r["precision"] <= 1.0 and not math.isnan(r["recall"]) for r in rows)
