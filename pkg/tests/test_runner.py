import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eprblab.core import validate_log
from eprblab.models import SourceConfig, StationConfig
from eprblab.runner import ConfigError, Protocol, RunConfig, run_experiment, schedule_settings


def test_single_trial_direct_evaluation():
    cfg = RunConfig(Protocol.three_setting((1, 0, 0)), 1, source=SourceConfig("fixed", 0.0),
                    seed=0, settings_table={"a": 0.0, "b": 0.0, "c": 1.0})
    log = run_experiment(cfg)
    t = log.trial(0)
    assert t.pair == ("a", "b")
    assert (t.left.outcome, t.right.outcome) == (1, 1)
    assert t.left.time_tick == t.right.time_tick == 1


def test_same_seed_same_log(bell_angles):
    cfg = RunConfig(trials=5000, station=StationConfig("timetag"), seed=77, settings_table=bell_angles)
    assert run_experiment(cfg) == run_experiment(cfg)
    other = RunConfig(trials=5000, station=StationConfig("timetag"), seed=78, settings_table=bell_angles)
    assert run_experiment(cfg) != run_experiment(other)


def test_pair_counts_binomial(bell_angles):
    M = 10**4
    log = run_experiment(RunConfig(trials=M, seed=4, settings_table=bell_angles))
    band = 3 * math.sqrt(M * (1 / 3) * (2 / 3))
    for count in log.pair_counts.values():
        assert abs(count - M / 3) <= band


def test_schedule_degenerate_and_deterministic():
    assert schedule_settings(Protocol.three_setting((1, 0, 0)), 3, 5) == [("a", "b")] * 3
    p = Protocol.four_setting()
    assert schedule_settings(p, 50, 9) == schedule_settings(p, 50, 9)
    assert set(schedule_settings(p, 400, 9)) == {("a", "b"), ("a", "d"), ("c", "b"), ("c", "d")}


def test_schedule_frequencies():
    M = 3 * 10**4
    seq = schedule_settings(Protocol.three_setting(), M, 31)
    for pair in (("a", "b"), ("a", "c"), ("b", "c")):
        assert abs(seq.count(pair) / M - 1 / 3) < 0.02


def test_protocol_validation():
    with pytest.raises(ConfigError):
        Protocol.three_setting((0.5, 0.5))
    with pytest.raises(ConfigError):
        Protocol.three_setting((0.5, 0.6, -0.1))
    with pytest.raises(ConfigError):
        Protocol.three_setting((0.3, 0.3, 0.3))
    with pytest.raises(ConfigError):
        Protocol("five_setting")
    assert Protocol.four_setting().pair_probabilities == (0.25,) * 4


def test_missing_label_rejected():
    with pytest.raises(ConfigError, match="lacks"):
        RunConfig(Protocol.four_setting(), 10, settings_table={"a": 0, "b": 1, "c": 2})
    with pytest.raises(ConfigError):
        RunConfig(trials=0, settings_table={"a": 0, "b": 1, "c": 2})


def test_right_jitter_keeps_clock_discipline(bell_angles):
    log = run_experiment(RunConfig(trials=3000, seed=2, settings_table=bell_angles, right_jitter=4))
    assert validate_log(log) == []
    assert np.all(np.diff(log.t_right) > 0)
    assert not np.array_equal(log.t_right, log.t_left)


def test_tick_to_setting_single_valued(bell_angles):
    log = run_experiment(RunConfig(trials=20_000, seed=8, settings_table=bell_angles))
    for side in ("left", "right"):
        ticks = getattr(log, f"t_{side}")
        settings_ = getattr(log, f"setting_{side}")
        seen = {}
        for t, s in zip(ticks.tolist(), settings_.tolist()):
            assert seen.setdefault(t, s) == s


@pytest.mark.parametrize("kind", ["static", "dynamic", "timetag", "singlet"])
def test_workers_do_not_change_output(kind, chsh_angles):
    cfg = RunConfig(Protocol.four_setting(), 200_003, station=StationConfig(kind, drift_rate=1e-4),
                    seed=12345, settings_table=chsh_angles)
    one = run_experiment(cfg, workers=1)
    for k in (2, 3, 8):
        assert run_experiment(cfg, workers=k) == one


@settings(max_examples=100, deadline=None)
@given(
    kind=st.sampled_from(["static", "dynamic", "timetag", "singlet"]),
    four=st.booleans(),
    M=st.integers(1, 400),
    seed=st.integers(0, 2**64 - 1),
    jitter=st.integers(0, 3),
    angles=st.lists(st.floats(-7, 7, allow_nan=False), min_size=4, max_size=4),
)
def test_every_generated_log_validates(kind, four, M, seed, jitter, angles):
    proto = Protocol.four_setting() if four else Protocol.three_setting()
    cfg = RunConfig(proto, M, station=StationConfig(kind, drift_rate=0.02), seed=seed,
                    settings_table=dict(zip("abcd", angles)), right_jitter=jitter)
    log = run_experiment(cfg)
    assert log.M == M
    assert validate_log(log) == []
