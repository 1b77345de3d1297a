import itertools

import numpy as np
import pytest

from linksim.channel import awgn
from linksim.core import RngStream, binary_source, compute_bler, ebnodb2no
from linksim.polar import (CRC_POLYNOMIALS, PolarCode, crc_attach, crc_check,
                           polar5g_construct, polar_encode, polar_sc_decode,
                           polar_scl_decode, polar_transform, rm_construct,
                           reliability_sequence)


def bpsk_llr(codewords, no, rng):
    x = (1.0 - 2.0 * codewords).astype(np.complex128)
    y = awgn(x, no, rng)
    return -4.0 * np.real(y) / no


def codebook(code):
    """All 2^k codewords, indexed by the info-bit tuple (big-endian)."""
    k = code.k
    msgs = np.array(list(itertools.product([0, 1], repeat=k)), dtype=np.uint8)
    return msgs, polar_encode(msgs, code)


class TestCrc:
    @pytest.mark.parametrize("name", sorted(CRC_POLYNOMIALS))
    def test_attach_then_check(self, name):
        poly = CRC_POLYNOMIALS[name]
        bits = binary_source([50, 40], RngStream(1))
        frame = crc_attach(bits, poly)
        assert frame.shape == (50, 40 + poly.degree)
        assert crc_check(frame, poly).all()

    @pytest.mark.parametrize("name", sorted(CRC_POLYNOMIALS))
    def test_single_bit_errors_detected(self, name):
        poly = CRC_POLYNOMIALS[name]
        bits = binary_source([1, 30], RngStream(2))
        frame = crc_attach(bits, poly)
        for pos in range(frame.shape[1]):
            bad = frame.copy()
            bad[0, pos] ^= 1
            assert not crc_check(bad, poly)[0]

    def test_parity_polynomial_is_even_parity(self):
        poly = CRC_POLYNOMIALS["parity"]
        frame = crc_attach(np.array([[1, 0, 1, 1]]), poly)
        assert frame.sum() % 2 == 0

    def test_crc16_known_vector(self):
        # CRC-16/CCITT of one zero byte with zero initial state is 0x0000;
        # of the single bit 1 it equals the generator's lower 16 bits.
        poly = CRC_POLYNOMIALS["crc16"]
        frame = crc_attach(np.zeros((1, 8), dtype=np.uint8), poly)
        assert not frame[0, 8:].any()
        frame = crc_attach(np.array([[1]], dtype=np.uint8), poly)
        expected = [(0x1021 >> i) & 1 for i in range(15, -1, -1)]
        assert list(frame[0, 1:]) == expected


class TestConstruction:
    def test_reliability_sequence_is_permutation(self):
        seq = reliability_sequence()
        assert sorted(seq.tolist()) == list(range(1024))

    def test_most_reliable_positions_last(self):
        # Index n-1 (all stages combine) is always the most reliable.
        seq = reliability_sequence()
        assert seq[-1] == 1023
        assert seq[0] == 0

    def test_info_set_4_of_8(self):
        code = polar5g_construct(4, 8)
        assert code.info_set.tolist() == [3, 5, 6, 7]

    def test_rm_1_3_equals_polar_4_8_choice(self):
        rm = rm_construct(1, 3)
        assert rm.info_set.tolist() == [3, 5, 6, 7]

    def test_rm_minimum_distance(self):
        # RM(1, 3) has minimum distance 4.
        rm = rm_construct(1, 3)
        _, words = codebook(rm)
        weights = words.sum(axis=1)
        assert weights[1:].min() == 4

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ValueError):
            polar5g_construct(10, 24)

    def test_k_bounds(self):
        with pytest.raises(ValueError):
            polar5g_construct(0, 8)
        with pytest.raises(ValueError):
            polar5g_construct(8, 8)

    def test_code_attrs(self):
        code = polar5g_construct(5, 16)
        assert code.k == 5
        assert code.num_stages == 4
        assert len(code.frozen_set) + len(code.info_set) == 16


class TestEncode:
    def test_transform_self_inverse(self):
        u = binary_source([20, 64], RngStream(3))
        assert np.array_equal(polar_transform(polar_transform(u)), u)

    def test_hand_computed_n4(self):
        # u = [u0 u1 u2 u3], x = u F^{(x)2}: x0=u0^u1^u2^u3, x1=u1^u3,
        # x2=u2^u3, x3=u3.
        u = np.array([[1, 0, 1, 1]], dtype=np.uint8)
        x = polar_transform(u)
        assert x.tolist() == [[1, 1, 0, 1]]

    def test_encode_places_info_bits(self):
        code = polar5g_construct(4, 8)
        bits = np.array([[1, 0, 1, 1]], dtype=np.uint8)
        x = polar_encode(bits, code)
        u = np.zeros((1, 8), dtype=np.uint8)
        u[0, code.info_set] = bits
        assert np.array_equal(x, polar_transform(u))

    def test_linearity(self):
        code = polar5g_construct(8, 16)
        rng = RngStream(4, 0)
        a = binary_source([10, 8], rng.child(0))
        b = binary_source([10, 8], rng.child(1))
        assert np.array_equal(
            polar_encode(a ^ b, code),
            polar_encode(a, code) ^ polar_encode(b, code),
        )


class TestScDecode:
    def test_noiseless_round_trip(self):
        for k, n in [(4, 8), (12, 32), (100, 256)]:
            code = polar5g_construct(k, n)
            bits = binary_source([16, k], RngStream(20 + n))
            x = polar_encode(bits, code)
            llr = (2.0 * x - 1.0) * 6.0
            assert np.array_equal(polar_sc_decode(llr, code), bits)

    def test_exact_variant_matches_minsum_decisions_mostly(self):
        code = polar5g_construct(16, 32)
        rng = RngStream(21, 0)
        bits = binary_source([300, 16], rng.child(0))
        x = polar_encode(bits, code)
        no = ebnodb2no(3.0, 1, 0.5)
        llr = bpsk_llr(x, no, rng.child(1))
        d_min = polar_sc_decode(llr, code, exact=False)
        d_exact = polar_sc_decode(llr, code, exact=True)
        # Both must be near-identical; the approximation changes few frames.
        assert np.mean(np.all(d_min == d_exact, axis=1)) > 0.97

    def test_sc_posterior_recursion_oracle(self):
        # Exact-SC bit posteriors on a tiny code, verified against direct
        # enumeration of Pr(u_i | y, u_{<i}) over the codebook.
        code = polar5g_construct(3, 4)
        msgs, words = codebook(code)
        g = RngStream(22, 0).generator()
        no = 0.8
        for _ in range(200):
            tx = words[g.integers(len(words))]
            y = (1.0 - 2.0 * tx) + np.sqrt(no / 2) * g.standard_normal(4)
            llr = -4.0 * y / no
            dec = polar_sc_decode(llr[None, :], code, exact=True)[0]
            # Follow the same successive path with exact enumeration.
            lik = np.exp(llr @ words.T)  # metric prop. to Pr(y | word)
            prefix = np.ones(len(words), dtype=bool)
            expected = []
            for i in range(code.k):
                p1 = lik[prefix & (msgs[:, i] == 1)].sum()
                p0 = lik[prefix & (msgs[:, i] == 0)].sum()
                bit = 1 if p1 > p0 else 0
                expected.append(bit)
                prefix &= msgs[:, i] == bit
            assert dec.tolist() == expected


class TestSclDecode:
    def test_list_one_equals_sc(self):
        code = polar5g_construct(16, 32)
        rng = RngStream(30, 0)
        bits = binary_source([500, 16], rng.child(0))
        x = polar_encode(bits, code)
        no = ebnodb2no(1.0, 1, 0.5)
        llr = bpsk_llr(x, no, rng.child(1))
        sc = polar_sc_decode(llr, code)
        scl = polar_scl_decode(llr, code, list_size=1)
        assert np.array_equal(sc, scl)

    def test_full_list_is_ml_n8(self):
        # With L = 2^k the list contains every message, so the selection
        # must be exact ML (up to metric ties).
        code = polar5g_construct(4, 8)
        msgs, words = codebook(code)
        g = RngStream(31, 0).generator()
        llrs = g.normal(size=(2000, 8)) * 2.0
        dec = polar_scl_decode(llrs, code, list_size=16)
        metrics = llrs @ words.T.astype(float)
        best = metrics.max(axis=1)
        chosen = metrics[np.arange(len(llrs)),
                         (msgs[None, :, :] == dec[:, None, :]).all(-1).argmax(1)]
        untied = (np.sort(metrics, axis=1)[:, -1]
                  - np.sort(metrics, axis=1)[:, -2]) > 1e-9
        assert untied.sum() > 1900
        assert np.allclose(chosen[untied], best[untied])

    def test_larger_list_never_much_worse(self):
        code = polar5g_construct(32, 64)
        rng = RngStream(32, 0)
        bits = binary_source([500, 32], rng.child(0))
        x = polar_encode(bits, code)
        no = ebnodb2no(2.0, 1, 0.5)
        llr = bpsk_llr(x, no, rng.child(1))
        bler = [compute_bler(bits, polar_scl_decode(llr, code, list_size=L))
                for L in (1, 8)]
        assert bler[1] <= bler[0]

    def test_ca_scl_beats_plain_scl(self):
        crc = CRC_POLYNOMIALS["crc6"]
        rng = RngStream(33, 0)
        no = ebnodb2no(3.0, 1, 0.5)
        payload = binary_source([2000, 32], rng.child(0))

        plain = polar5g_construct(32, 64)
        x = polar_encode(payload, plain)
        llr = bpsk_llr(x, no, rng.child(1))
        bler_plain = compute_bler(
            payload, polar_scl_decode(llr, plain, list_size=8))

        ca = polar5g_construct(32 + crc.degree, 64, crc=crc)
        frame = crc_attach(payload, crc)
        x = polar_encode(frame, ca)
        llr = bpsk_llr(x, no, rng.child(2))
        dec = polar_scl_decode(llr, ca, list_size=8, use_crc=True)
        bler_ca = compute_bler(payload, dec[:, :32])
        assert bler_ca < bler_plain

    def test_ca_scl_noiseless(self):
        crc = CRC_POLYNOMIALS["crc11"]
        code = polar5g_construct(43, 128, crc=crc)
        payload = binary_source([20, 32], RngStream(34))
        frame = crc_attach(payload, crc)
        x = polar_encode(frame, code)
        llr = (2.0 * x - 1.0) * 6.0
        dec = polar_scl_decode(llr, code, list_size=4, use_crc=True)
        assert np.array_equal(dec[:, :32], payload)
        assert crc_check(dec, crc).all()

    def test_use_crc_without_crc_raises(self):
        code = polar5g_construct(4, 8)
        with pytest.raises(ValueError):
            polar_scl_decode(np.zeros((1, 8)), code, use_crc=True)
