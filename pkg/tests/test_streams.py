"""Tests for the addressed deterministic random streams."""

import numpy as np

from widegauss.streams import (
    PURPOSE_BIAS,
    PURPOSE_GAUSSIAN_FDD,
    PURPOSE_WEIGHTS,
    substream,
)


def test_purpose_tags_are_distinct():
    assert len({PURPOSE_WEIGHTS, PURPOSE_GAUSSIAN_FDD, PURPOSE_BIAS}) == 3


def test_same_address_same_stream():
    a = substream(7, PURPOSE_WEIGHTS, 2, 5).standard_normal(16)
    b = substream(7, PURPOSE_WEIGHTS, 2, 5).standard_normal(16)
    np.testing.assert_array_equal(a, b)


def test_any_path_component_changes_the_stream():
    base = substream(7, 1, 2, 3).standard_normal(16)
    for path in [(7, 0, 2, 3), (7, 1, 0, 3), (7, 1, 2, 0), (8, 1, 2, 3)]:
        seed, *rest = path
        other = substream(seed, *rest).standard_normal(16)
        assert not np.array_equal(base, other)


def test_draw_order_does_not_leak_between_streams():
    # Draining one stream must not move its siblings.
    before = substream(3, PURPOSE_BIAS, 0).standard_normal(8)
    drained = substream(3, PURPOSE_BIAS, 1)
    drained.standard_normal(10_000)
    after = substream(3, PURPOSE_BIAS, 0).standard_normal(8)
    np.testing.assert_array_equal(before, after)


def test_path_values_coerced_to_int():
    a = substream(1, np.int64(4)).standard_normal(4)
    b = substream(1, 4).standard_normal(4)
    np.testing.assert_array_equal(a, b)


def test_philox_generator_backend():
    gen = substream(0, 0)
    assert isinstance(gen.bit_generator, np.random.Philox)
