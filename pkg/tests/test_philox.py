import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpperc._philox import line_key, raw_stream, to_unit, trial_key

u64 = st.integers(0, 2 ** 64 - 1)


def numpy_stream(k0, k1, lo, hi, n):
    bg = np.random.Philox(key=np.array([k0, k1], dtype=np.uint64),
                          counter=np.array([0, 0, lo, hi], dtype=np.uint64))
    return bg.random_raw(n)


@given(u64, u64, u64, u64, st.integers(1, 40))
def test_stream_matches_numpy_philox(k0, k1, lo, hi, n):
    ours = raw_stream(np.uint64(k0), np.uint64(k1), np.uint64(lo), np.uint64(hi), n)
    assert np.array_equal(ours, numpy_stream(k0, k1, lo, hi, n))


def test_long_stream_matches_numpy():
    ours = raw_stream(np.uint64(7), np.uint64(11), np.uint64(3), np.uint64(5), 1001)
    assert np.array_equal(ours, numpy_stream(7, 11, 3, 5, 1001))


def test_to_unit_range():
    assert to_unit(np.uint64(0)) == 0.0
    top = to_unit(np.uint64(2 ** 64 - 1))
    assert top < 1.0
    assert top == 1.0 - 2.0 ** -53


def test_line_keys_distinguish_kind_direction_and_position():
    keys = {line_key("D", 0, (0,)), line_key("B", 0, (0,)), line_key("B", 1, (0, 0)),
            line_key("B", 0, (0, 0)), line_key("D", 0, (1,)), line_key("D", 0, (-1,))}
    assert len(keys) == 6
    assert line_key("D", 0, (3, -2)) == line_key("D", 0, [3, -2])


def test_trial_key_validation():
    assert trial_key(1, 2) == (1, 2)
    with pytest.raises(ValueError):
        trial_key(-1, 0)
    with pytest.raises(ValueError):
        trial_key(0, 2 ** 64)
