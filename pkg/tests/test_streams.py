import numpy as np
import pytest

from eprblab.streams import Stream, TrialStream


def test_pure_function_of_counter():
    s = Stream(42, "left")
    idx = np.arange(1, 1001)
    whole = s.uniform(idx, 0)
    pieces = np.concatenate([s.uniform(idx[:300], 0), s.uniform(idx[300:], 0)])
    assert np.array_equal(whole, pieces)
    assert s.uniform(17, 0) == whole[16]
    assert TrialStream(42, "left", 17).uniform(0) == whole[16]


def test_streams_differ_by_name_seed_and_draw():
    idx = np.arange(1, 101)
    base = Stream(1, "left").uniform(idx)
    assert not np.array_equal(base, Stream(1, "right").uniform(idx))
    assert not np.array_equal(base, Stream(2, "left").uniform(idx))
    assert not np.array_equal(base, Stream(1, "left").uniform(idx, 1))


def test_uniform_range_and_moments():
    u = Stream(7, "x").uniform(np.arange(200_000))
    assert u.min() >= 0.0 and u.max() < 1.0
    # mean 1/2, variance 1/12; 5-sigma bands
    assert abs(u.mean() - 0.5) < 5 * np.sqrt(1 / 12 / u.size)
    assert abs(u.var() - 1 / 12) < 0.002
    # lag-1 correlation across consecutive trial indices
    assert abs(np.corrcoef(u[:-1], u[1:])[0, 1]) < 0.01


def test_draw_range_checked():
    with pytest.raises(ValueError):
        Stream(0, "x").uniform(1, 16)
