import numpy as np
import pytest

try:
    from hypothesis import given, settings
    from hypothesis import strategies as st
    HAVE_HYPOTHESIS = True
except ImportError:  # pragma: no cover
    HAVE_HYPOTHESIS = False

from linksim.core import RngStream, binary_source
from linksim.interleaving import (InterleaverSpec, deinterleave, descramble,
                                  interleave, scramble, scrambling_sequence)


class TestInterleaverSpec:
    def test_row_column_hand_example(self):
        # 2x3 grid: write [a b c / d e f] row-major, read column-major.
        spec = InterleaverSpec("row-column", 6, rows=2, cols=3)
        x = np.array(["a", "b", "c", "d", "e", "f"])
        assert interleave(x, spec).tolist() == ["a", "d", "b", "e", "c", "f"]

    def test_permutation_is_bijective(self):
        for spec in (InterleaverSpec("row-column", 12, rows=3, cols=4),
                     InterleaverSpec("random", 12, seed=5)):
            assert sorted(spec.permutation().tolist()) == list(range(12))

    def test_random_is_seeded(self):
        a = InterleaverSpec("random", 100, seed=9).permutation()
        b = InterleaverSpec("random", 100, seed=9).permutation()
        c = InterleaverSpec("random", 100, seed=10).permutation()
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            InterleaverSpec("row-column", 7, rows=2, cols=3)

    def test_missing_params(self):
        with pytest.raises(ValueError):
            InterleaverSpec("row-column", 6)
        with pytest.raises(ValueError):
            InterleaverSpec("random", 6)
        with pytest.raises(ValueError):
            InterleaverSpec("helical", 6)

    def test_serialization_round_trip(self):
        for spec in (InterleaverSpec("row-column", 6, rows=2, cols=3),
                     InterleaverSpec("random", 8, seed=3)):
            again = InterleaverSpec.from_dict(spec.to_dict())
            assert np.array_equal(spec.permutation(), again.permutation())


class TestInterleave:
    def test_round_trip(self):
        spec = InterleaverSpec("random", 64, seed=1)
        x = binary_source([10, 64], RngStream(0))
        assert np.array_equal(deinterleave(interleave(x, spec), spec), x)

    def test_length_check(self):
        spec = InterleaverSpec("random", 64, seed=1)
        with pytest.raises(ValueError):
            interleave(np.zeros((2, 63)), spec)
        with pytest.raises(ValueError):
            deinterleave(np.zeros((2, 65)), spec)

    if HAVE_HYPOTHESIS:
        @given(st.integers(1, 200), st.integers(0, 2**32 - 1))
        @settings(max_examples=50, deadline=None)
        def test_round_trip_property(self, length, seed):
            spec = InterleaverSpec("random", length, seed=seed)
            x = np.arange(length)
            assert np.array_equal(deinterleave(interleave(x, spec), spec), x)

        @given(st.integers(1, 20), st.integers(1, 20))
        @settings(max_examples=50, deadline=None)
        def test_row_column_round_trip_property(self, rows, cols):
            spec = InterleaverSpec("row-column", rows * cols,
                                   rows=rows, cols=cols)
            x = np.arange(rows * cols)
            assert np.array_equal(deinterleave(interleave(x, spec), spec), x)


class TestScramble:
    def test_sequence_seeded_and_binary(self):
        a = scrambling_sequence(256, 7)
        b = scrambling_sequence(256, 7)
        assert np.array_equal(a, b)
        assert set(np.unique(a)) <= {0, 1}
        assert 0.3 < a.mean() < 0.7

    def test_bits_self_inverse(self):
        x = binary_source([20, 128], RngStream(1))
        assert np.array_equal(descramble(scramble(x, 3), 3), x)

    def test_bits_actually_change(self):
        x = np.zeros((1, 128), dtype=np.uint8)
        assert scramble(x, 3).sum() > 0

    def test_llr_sign_flip_self_inverse(self):
        g = RngStream(2, 0).generator()
        llr = g.normal(size=(10, 64))
        assert np.allclose(descramble(scramble(llr, 5), 5), llr)

    def test_scrambled_llrs_match_scrambled_bits(self):
        # Transmitting scrambled bits and descrambling the LLRs must give
        # the same hard decisions as the unscrambled system.
        bits = binary_source([5, 32], RngStream(3))
        tx = scramble(bits, 11)
        llr_rx = (2.0 * tx - 1.0) * 4.0
        llr = descramble(llr_rx, 11)
        assert np.array_equal((llr > 0).astype(np.uint8), bits)
