from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cryocount.sampler import (
    LaneLayout,
    MeasurementSource,
    lane_block,
    lanes,
    next_shot,
    padding_mask,
    read_shot_file,
    write_shot_file,
)


def test_same_seed_same_stream():
    a = MeasurementSource.bernoulli([0.3, 0.7, 0.5], seed=11).take(100)
    b = MeasurementSource.bernoulli([0.3, 0.7, 0.5], seed=11).take(100)
    assert np.array_equal(a, b)


def test_lanes_are_independent_of_consumption_order():
    src = MeasurementSource.bernoulli([0.5] * 4, seed=2)
    lane1_first = src.take(10, lane=1)
    src.reset()
    src.take(50, lane=0)
    assert np.array_equal(src.take(10, lane=1), lane1_first)


def test_deterministic_probabilities():
    out = MeasurementSource.bernoulli([0, 1], seed=0).take(16)
    assert out[:, 0].sum() == 0 and out[:, 1].sum() == 16


def test_explicit_bit_order():
    probs = np.zeros(8)
    probs[0b001] = 1.0  # qubit 0 set only
    out = MeasurementSource.explicit(probs).take(5)
    assert (out == [1, 0, 0]).all()


def test_explicit_frequencies():
    probs = np.array([0.1, 0.2, 0.3, 0.4])
    out = MeasurementSource.explicit(probs, seed=4).take(20000)
    k = out[:, 0] + 2 * out[:, 1]
    freq = np.bincount(k, minlength=4) / len(k)
    assert np.allclose(freq, probs, atol=0.02)


def test_explicit_validation():
    with pytest.raises(ValueError):
        MeasurementSource.explicit([0.5, 0.6])
    with pytest.raises(ValueError):
        MeasurementSource("explicit", 21, np.ones(4))
    with pytest.raises(ValueError):
        MeasurementSource.bernoulli([1.5])


def test_next_shot_indices():
    src = MeasurementSource.bernoulli([0.5, 0.5], seed=1)
    assert next_shot(src).shot_index == 0
    assert next_shot(src).shot_index == 1


def test_layout_rejects_small_machine():
    with pytest.raises(ValueError):
        LaneLayout(3, 4, 10)


@given(st.integers(1, 8), st.integers(1, 8), st.integers(1, 500))
def test_padding_fills_exactly_the_surplus(N, L, T):
    lay = LaneLayout(N * L, N, T)
    mask = padding_mask(lay)
    assert mask.shape == (lay.T_prime, L)
    assert int((~mask).sum()) == T
    assert int(mask.sum()) == lay.padding < L
    # surplus only on the last step
    assert not mask[:-1].any()


def test_case_study_lane_count():
    assert LaneLayout(10**4, 36, 10**6).L == 277


def test_lane_block_real_shots_in_order():
    src = MeasurementSource.bernoulli([0.5] * 3, seed=9)
    lay = LaneLayout(7, 3, 5)  # L=2, T'=3, one padding shot
    block = lane_block(src, lay)
    assert block.bits.shape == (3, 2, 3)
    assert block.real_shots().shape == (5, 3)
    src.reset()
    recs = [r for step in lanes(src, lay) for r in step]
    assert [r.shot_index for r in recs] == list(range(6))
    assert [r.padding for r in recs] == [False] * 5 + [True]
    assert np.array_equal(np.array([r.bits for r in recs if not r.padding]), block.real_shots())


@settings(max_examples=30)
@given(st.integers(1, 11), st.integers(1, 40), st.integers(0, 10**6))
def test_shot_file_roundtrip(tmp_path_factory, N, T, seed):
    shots = MeasurementSource.bernoulli([0.5] * N, seed=seed).take(T)
    path = tmp_path_factory.mktemp("shots") / "s.bin"
    write_shot_file(path, shots)
    assert np.array_equal(read_shot_file(path, N, T), shots)


def test_shot_file_packing_is_little_endian(tmp_path):
    path = tmp_path / "s.bin"
    write_shot_file(path, np.array([[1, 0, 0, 0], [0, 0, 0, 1]]))
    assert path.read_bytes() == bytes([0b10000001])


def test_short_file_rejected(tmp_path):
    path = tmp_path / "s.bin"
    path.write_bytes(b"\x00")
    with pytest.raises(ValueError):
        read_shot_file(path, 4, 3)
