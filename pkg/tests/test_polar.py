import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_posteriors, memoryless_erasure
from polarmem.channels import transmit
from polarmem.errors import ResourceError, ValidationError
from polarmem.polar import (
    PolarCode,
    bit_reversal_permutation,
    decode,
    encode,
    genie_posteriors,
    genie_posteriors_full,
    inverse_polar_transform,
    polar_transform,
    sc_decode_csi,
    sc_decode_trellis,
)


def dense_generator(n: int) -> np.ndarray:
    """Independent oracle: explicit G = B_N . F^{(kron) n} over GF(2)."""
    f = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    g = np.array([[1]], dtype=np.uint8)
    for _ in range(n):
        g = np.kron(g, f)
    return g[:, bit_reversal_permutation(n)] % 2


class TestTransform:
    def test_n1_kernel(self):
        # x = (u0 + u1, u1) over GF(2)
        np.testing.assert_array_equal(inverse_polar_transform([1, 0]), [1, 0])
        np.testing.assert_array_equal(inverse_polar_transform([0, 1]), [1, 1])

    def test_n2_by_hand(self):
        # the last generator row is all-ones; u = e3 spreads over the block
        np.testing.assert_array_equal(inverse_polar_transform([0, 0, 0, 1]), [1, 1, 1, 1])
        np.testing.assert_array_equal(inverse_polar_transform([1, 0, 0, 0]), [1, 0, 0, 0])

    @pytest.mark.parametrize("n", range(7))
    def test_matches_dense_generator(self, n):
        size = 1 << n
        g = dense_generator(n)
        rng = np.random.default_rng(n)
        for _ in range(20):
            u = rng.integers(0, 2, size).astype(np.uint8)
            np.testing.assert_array_equal(inverse_polar_transform(u), u @ g % 2)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 8), st.integers(0, 2 ** 31))
    def test_transforms_are_mutual_inverses(self, n, seed):
        u = np.random.default_rng(seed).integers(0, 2, 1 << n).astype(np.uint8)
        np.testing.assert_array_equal(polar_transform(inverse_polar_transform(u)), u)
        np.testing.assert_array_equal(inverse_polar_transform(polar_transform(u)), u)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 8), st.integers(0, 2 ** 31))
    def test_linearity(self, n, seed):
        rng = np.random.default_rng(seed)
        a = rng.integers(0, 2, 1 << n).astype(np.uint8)
        b = rng.integers(0, 2, 1 << n).astype(np.uint8)
        np.testing.assert_array_equal(
            inverse_polar_transform(a ^ b),
            inverse_polar_transform(a) ^ inverse_polar_transform(b),
        )

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ValidationError, match="power of two"):
            polar_transform([0, 1, 0])

    def test_bit_reversal_involution(self):
        for n in range(6):
            perm = bit_reversal_permutation(n)
            np.testing.assert_array_equal(perm[perm], np.arange(1 << n))


class TestPolarCode:
    def test_rate(self):
        code = PolarCode(n=3, info_set=[3, 5, 6, 7])
        assert code.block_length == 8
        assert code.rate == 0.5

    def test_frozen_mask(self):
        code = PolarCode(n=2, info_set=[3])
        np.testing.assert_array_equal(code.frozen_mask, [1, 1, 1, 0])

    def test_info_set_deduplicated_sorted(self):
        code = PolarCode(n=2, info_set=[3, 1, 3])
        np.testing.assert_array_equal(code.info_set, [1, 3])

    def test_out_of_range_rejected(self):
        with pytest.raises(ValidationError, match="out of range"):
            PolarCode(n=2, info_set=[4])

    def test_rate_one(self):
        code = PolarCode.rate_one(3)
        assert code.rate == 1.0

    def test_encode_shape_gate(self):
        code = PolarCode(n=3, info_set=[6, 7])
        with pytest.raises(ValidationError, match="length"):
            encode(code, [1, 0, 1])

    def test_encode_respects_frozen_values(self):
        frozen = np.array([1, 0, 1, 0], dtype=np.uint8)
        code = PolarCode(n=2, info_set=[3], frozen_values=frozen)
        x = encode(code, [1])
        u = polar_transform(x)
        np.testing.assert_array_equal(u, [1, 0, 1, 1])


class TestNoiselessDecoding:
    """Over a perfect channel every SC decode must return the message exactly."""

    @pytest.mark.parametrize("n", [1, 3, 5])
    def test_trellis_noiseless(self, n):
        channel = memoryless_erasure(0.0)
        code = PolarCode.rate_one(n)
        rng = np.random.default_rng(n)
        for trial in range(10):
            message = rng.integers(0, 2, 1 << n).astype(np.uint8)
            record = transmit(channel, encode(code, message), 1000 * n + trial)
            decoded, post1 = decode(channel, code, record)
            np.testing.assert_array_equal(decoded, message)
            u = polar_transform(record.inputs)
            np.testing.assert_allclose(post1, u.astype(float), atol=1e-12)

    def test_csi_noiseless(self):
        from conftest import memoryless_depolarizing

        channel = memoryless_depolarizing(0.0)
        code = PolarCode.rate_one(4)
        rng = np.random.default_rng(0)
        message = rng.integers(0, 2, 16).astype(np.uint8)
        record = transmit(channel, encode(code, message), 77)
        decoded, _ = decode(channel, code, record)
        np.testing.assert_array_equal(decoded, message)

    def test_frozen_bits_recover_erased_block(self):
        # one erasure, enough frozen bits: SC fills the hole through the code
        channel = memoryless_erasure(0.3)
        code = PolarCode(n=3, info_set=[3, 5, 6, 7])
        message = np.array([1, 0, 1, 1], dtype=np.uint8)
        x = encode(code, message)
        outputs = x.astype(np.int64).copy()
        outputs[2] = 2  # erase one symbol
        decoded, _ = sc_decode_trellis(channel, code, outputs)
        np.testing.assert_array_equal(decoded, message)


class TestAgainstBruteForce:
    """The trellis decoder must reproduce exact joint-law posteriors."""

    def test_ge_channel_n4(self, ge_channel):
        rng = np.random.default_rng(42)
        for trial in range(5):
            u = rng.integers(0, 2, 4).astype(np.uint8)
            record = transmit(ge_channel, inverse_polar_transform(u), 100 + trial,
                              reveal_states=True)
            got = genie_posteriors_full(ge_channel, record, u)
            want = brute_force_posteriors(ge_channel, record.outputs, u)
            np.testing.assert_allclose(got, want, atol=1e-12)

    def test_all_output_patterns_n2(self, ge_channel):
        from polarmem.channels import TransmissionRecord

        for u in itertools.product(range(2), repeat=2):
            u = np.array(u, dtype=np.uint8)
            x = inverse_polar_transform(u)
            # every output pattern of positive probability given this codeword
            for outputs in itertools.product(*[(int(b), 2) for b in x]):
                record = TransmissionRecord(
                    inputs=x,
                    outputs=np.array(outputs, dtype=np.int64),
                    states=None,
                )
                got = genie_posteriors_full(ge_channel, record, u)
                want = brute_force_posteriors(ge_channel, record.outputs, u)
                np.testing.assert_allclose(got, want, atol=1e-12)


class TestDecoderGates:
    def test_csi_requires_states(self, ge_channel):
        code = PolarCode.rate_one(2)
        with pytest.raises(ValidationError, match="state path"):
            sc_decode_csi(ge_channel, code, np.zeros(4, np.int64), None)

    def test_alphabet_gate(self, ge_channel):
        code = PolarCode.rate_one(2)
        with pytest.raises(ValidationError, match="alphabet"):
            sc_decode_trellis(ge_channel, code, np.array([0, 0, 0, 3]))

    def test_state_budget(self):
        from polarmem import build_queue_channel

        channel = build_queue_channel(0.5, 1.0, lambda s: 0.1, level=70)
        code = PolarCode.rate_one(2)
        with pytest.raises(ResourceError, match="budget"):
            sc_decode_trellis(channel, code, np.zeros(4, np.int64))

    def test_genie_message_consistency(self, ge_channel):
        code = PolarCode(n=2, info_set=[2, 3])
        message = np.array([1, 0], dtype=np.uint8)
        record = transmit(ge_channel, encode(code, message), 5)
        with pytest.raises(ValidationError, match="inconsistent"):
            genie_posteriors(ge_channel, code, record, np.array([0, 1], dtype=np.uint8))
        post = genie_posteriors(ge_channel, code, record, message)
        assert post.shape == (4,)
