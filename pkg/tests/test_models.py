import inspect
import math

import numpy as np
import pytest

from eprblab import models
from eprblab.core import LABEL_CODE, PairState, Setting
from eprblab.models import (
    SourceConfig,
    StationConfig,
    draw_lambdas,
    draw_pair_state,
    dynamic_station,
    singlet_reference_sample,
    static_station,
    timetag_station,
)
from eprblab.runner import RunConfig, Protocol, run_experiment, simulate
from eprblab.streams import Stream, TrialStream

PI = math.pi


def test_draw_pair_state_fixed_and_deterministic():
    assert draw_pair_state(SourceConfig("fixed", 0.3), 12, 99).lam == 0.3
    cfg = SourceConfig(aux_dimension=2)
    a, b = draw_pair_state(cfg, 5, 7), draw_pair_state(cfg, 5, 7)
    assert a == b and len(a.aux) == 2 and a.emission_tick == 5
    with pytest.raises(ValueError):
        draw_pair_state(cfg, 0, 7)


def test_uniform_lambda_mean_cos():
    lam = draw_lambdas(SourceConfig(), np.arange(1, 100_001), 2024)
    assert abs(np.cos(lam).mean()) < 0.02
    assert lam.min() >= 0 and lam.max() < 2 * PI


def test_static_station_examples():
    assert static_station(Setting("a", 0.0), PairState(0.0), 1) == 1
    assert static_station(Setting("a", 0.0), PairState(PI), 1) == -1
    # cos(2 * pi/2) = -1
    assert static_station(Setting("a", PI / 2), PairState(0.0), 2) == -1


def test_sign_of_zero_is_plus():
    assert int(models.static_outcome(0.0, 0.0, 1)) == 1
    assert int(models._sign(np.float64(0.0))) == 1
    assert int(models._sign(np.float64(-0.0))) == 1


def test_dynamic_station():
    cfg0 = StationConfig("dynamic", drift_rate=0.0)
    rng = np.random.default_rng(0)
    for _ in range(200):
        s = Setting("b", rng.uniform(0, 2 * PI), side=rng.choice(["left", "right"]))
        st = PairState(rng.uniform(0, 2 * PI))
        assert dynamic_station(s, st, int(rng.integers(0, 1000)), cfg0) == static_station(s, st, 1)
    drift = StationConfig("dynamic", drift_rate=PI)
    assert dynamic_station(Setting("b", 0.0, "right"), PairState(0.0), 1, drift) == -1
    assert dynamic_station(Setting("b", 0.0, "left"), PairState(0.0), 1, drift) == 1


def test_dynamic_marginals_stationary_but_correlations_drift():
    angles = {"a": 0.0, "b": PI / 3, "c": PI}
    cfg = RunConfig(Protocol.three_setting(), 120_000, station=StationConfig("dynamic", drift_rate=1e-5),
                    seed=5, settings_table=angles)
    log = run_experiment(cfg)
    first, last = log.n <= 40_000, log.n > 80_000
    ab = log.pair_mask(("a", "b"))
    for part in (first, last):
        for side in ("left", "right"):
            out = getattr(log, f"outcome_{side}")[part]
            assert abs((out == 1).mean() - 0.5) < 3 * math.sqrt(0.25 / out.size) + 1e-3
    # correlation of (a,b) drifts with time as the right analyzer effectively rotates
    e_first = log.products[first & ab].mean()
    e_last = log.products[last & ab].mean()
    assert e_last - e_first < -0.3


def test_timetag_station():
    cfg = StationConfig("timetag", delay_scale=2.0)
    out, delay = timetag_station(Setting("a", 0.7), PairState(0.7), cfg, TrialStream(1, "left", 3))
    assert out == 1 and delay == 0.0
    # r -> 1 and |sin| = 1 gives T0
    assert models.timetag_delay(PI / 4, 0.0, 1.0, 2, 2.0, 4.0) == pytest.approx(2.0)
    r = TrialStream(1, "left", 3).uniform(0)
    out, delay = timetag_station(Setting("a", 0.3), PairState(0.0), cfg, TrialStream(1, "left", 3))
    assert delay == pytest.approx(2.0 * r * abs(math.sin(0.6)) ** 4)
    assert out == static_station(Setting("a", 0.3), PairState(0.0), 2)


def test_timetag_delays_vanish_with_scale():
    angles = {"a": 0.0, "b": 1.0, "c": 2.0}
    big = run_experiment(RunConfig(trials=2000, station=StationConfig("timetag", delay_scale=1.0),
                                   seed=3, settings_table=angles))
    tiny = run_experiment(RunConfig(trials=2000, station=StationConfig("timetag", delay_scale=1e-300),
                                    seed=3, settings_table=angles))
    assert np.array_equal(big.outcome_left, tiny.outcome_left)
    assert tiny.delay_left.max() < 1e-299 and tiny.delay_right.max() < 1e-299


def test_timetag_filtered_correlation_tracks_minus_cos_2theta():
    from eprblab.analysis import coincidence_filter

    M = 10**6
    idx = np.arange(1, M + 1)
    beta = np.radians(30.0)
    cfg = RunConfig(Protocol.three_setting(), M, station=StationConfig("timetag"),
                    source=SourceConfig(partner_offset=PI / 2), seed=11,
                    settings_table={"a": 0.0, "b": beta, "c": PI / 2})
    left = np.full(M, LABEL_CODE["a"])
    right = np.full(M, LABEL_CODE["b"])
    cols = simulate(cfg, idx, left, right)
    from eprblab.core import EventLog

    log = EventLog(**cols, settings_table=cfg.settings_table)
    kept = coincidence_filter(log, 0.1)
    assert abs(kept.products.mean() - (-math.cos(2 * beta))) < 0.05
    assert 0 < kept.retained_fraction < 1


def test_singlet_reference():
    a, b = Setting("a", 0.4), Setting("b", 0.4, "right")
    for n in range(1, 50):
        x, y = singlet_reference_sample(a, b, 1, TrialStream(3, "pair", n))
        assert x == -y
    M = 10**6
    pair = Stream(8, "pair")
    idx = np.arange(M)
    x, y = models.singlet_outcomes(0.0, PI / 2, 1, pair.uniform(idx, 0), pair.uniform(idx, 1))
    assert abs((x.astype(int) * y).mean()) < 0.01
    x, y = models.singlet_outcomes(0.0, PI, 1, pair.uniform(idx, 0), pair.uniform(idx, 1))
    assert abs((x.astype(int) * y).mean() - 1.0) < 0.01


# -- locality contract ----------------------------------------------------------

@pytest.mark.parametrize("fn", [models.static_outcome, models.dynamic_outcome, models.timetag_delay,
                                models.static_station, models.dynamic_station, models.timetag_station])
def test_station_signatures_have_no_remote_parameter(fn):
    params = set(inspect.signature(fn).parameters)
    assert not any("remote" in p or "right" in p or "other" in p for p in params)
    assert params.isdisjoint({"left", "right_angle", "left_angle"})


@pytest.mark.parametrize("kind,offset", [("static", 0.0), ("dynamic", 0.0), ("timetag", PI / 2)])
def test_left_outcomes_ignore_right_schedule(kind, offset):
    M = 5000
    idx = np.arange(1, M + 1)
    angles = {"a": 0.1, "b": 1.3, "c": 2.9, "d": 4.0}
    cfg = RunConfig(Protocol.three_setting(), M, station=StationConfig(kind, drift_rate=0.003),
                    source=SourceConfig(partner_offset=offset), seed=17, settings_table=angles)
    rng = np.random.default_rng(1)
    left = rng.choice([0, 1], M)
    cols = [simulate(cfg, idx, left, rng.choice([1, 2, 3], M)) for _ in range(3)]
    for other in cols[1:]:
        assert np.array_equal(cols[0]["outcome_left"], other["outcome_left"])
        if kind == "timetag":
            assert np.array_equal(cols[0]["delay_left"], other["delay_left"])


@pytest.mark.parametrize("kind", ["static", "dynamic", "timetag", "singlet"])
def test_marginal_symmetry(kind):
    M = 60_000
    cfg = RunConfig(Protocol.three_setting(), M, station=StationConfig(kind, drift_rate=0.01),
                    seed=23, settings_table={"a": 0.2, "b": 1.9, "c": 4.4})
    log = run_experiment(cfg)
    for side in ("left", "right"):
        frac = (getattr(log, f"outcome_{side}") == 1).mean()
        assert abs(frac - 0.5) <= 3 * math.sqrt(0.25 / M)


def test_station_config_validation():
    with pytest.raises(ValueError):
        StationConfig("static", periodicity=3)
    with pytest.raises(ValueError):
        StationConfig("timetag", delay_exponent=0)
    with pytest.raises(ValueError):
        StationConfig("timetag", delay_scale=-1)
    with pytest.raises(ValueError):
        StationConfig("quantum")
    assert StationConfig("timetag").periodicity == 2
    assert StationConfig("static").periodicity == 1
    assert SourceConfig("fixed", -0.5).lambda_value == pytest.approx(2 * PI - 0.5)
