import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from emofuse.errors import AllMasked, InvalidOverlap, WindowTooLarge
from emofuse.sequence import n_windows, pad_or_truncate, pool, window_concat

frames = st.integers(1, 12).flatmap(
    lambda L: arrays(np.float64, (L, 3), elements=st.floats(-1e3, 1e3, allow_nan=False))
)


class TestPad:
    def test_exact_length(self):
        x = np.arange(6.0).reshape(3, 2)
        out, mask = pad_or_truncate(x, 3)
        np.testing.assert_array_equal(out, x)
        assert mask.tolist() == [1, 1, 1]

    def test_pad(self):
        x = np.ones((2, 3))
        out, mask = pad_or_truncate(x, 4)
        assert mask.tolist() == [1, 1, 0, 0]
        np.testing.assert_array_equal(out[2:], 0.0)

    def test_truncate_tail(self):
        x = np.arange(10.0).reshape(5, 2)
        out, mask = pad_or_truncate(x, 3)
        np.testing.assert_array_equal(out, x[:3])
        assert mask.tolist() == [1, 1, 1]


class TestWindows:
    def test_no_overlap(self):
        x = np.arange(8.0).reshape(4, 2)
        out = window_concat(x, 2, 0)
        np.testing.assert_array_equal(out, [[0, 1, 2, 3], [4, 5, 6, 7]])

    def test_overlap_one(self):
        x = np.arange(4.0)[:, None]
        np.testing.assert_array_equal(window_concat(x, 2, 1), [[0, 1], [1, 2], [2, 3]])

    def test_identity(self):
        x = np.random.default_rng(0).normal(size=(5, 3))
        np.testing.assert_array_equal(window_concat(x, 1, 0), x)

    def test_tail_dropped(self):
        assert window_concat(np.zeros((7, 1)), 3, 0).shape == (2, 3)

    def test_errors(self):
        with pytest.raises(WindowTooLarge):
            window_concat(np.zeros((2, 1)), 3, 0)
        with pytest.raises(InvalidOverlap):
            window_concat(np.zeros((5, 1)), 2, 2)
        with pytest.raises(InvalidOverlap):
            window_concat(np.zeros((5, 1)), 2, -1)

    @given(st.integers(1, 30), st.data())
    def test_count_formula(self, L, data):
        w = data.draw(st.integers(1, L))
        o = data.draw(st.integers(0, w - 1))
        out = window_concat(np.zeros((L, 2)), w, o)
        assert len(out) == n_windows(L, w, o) == (L - w) // (w - o) + 1


class TestPool:
    def test_single_frame(self):
        x = np.array([[1.0, -2.0, 3.0]])
        for f in ("mean", "max"):
            np.testing.assert_array_equal(pool(x, f), x[0])

    def test_two_frames(self):
        x = np.array([[0.0] * 4, [2.0] * 4])
        np.testing.assert_array_equal(pool(x, "mean"), [1.0] * 4)
        np.testing.assert_array_equal(pool(x, "max"), [2.0] * 4)

    def test_all_masked(self):
        with pytest.raises(AllMasked):
            pool(np.ones((2, 2)), "mean", mask=[0, 0])

    @settings(max_examples=60, deadline=None)
    @given(frames, st.integers(1, 16), st.sampled_from(["mean", "max"]))
    def test_padding_is_transparent(self, x, target, functional):
        if len(x) > target:
            return
        padded, mask = pad_or_truncate(x, target)
        assert np.array_equal(pool(padded, functional, mask), pool(x, functional))

    @settings(max_examples=60, deadline=None)
    @given(frames, st.floats(0.01, 100.0))
    def test_linearity_and_monotone(self, x, c):
        np.testing.assert_allclose(pool(c * x, "mean"), c * pool(x, "mean"), rtol=1e-9, atol=1e-9)
        xp = np.abs(x)
        np.testing.assert_allclose(pool(c * xp, "max"), c * pool(xp, "max"), rtol=1e-12)
