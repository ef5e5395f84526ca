"""Cross-checks between the compiled kernel and its pure-Python twin.

The two implementations must agree bit-for-bit on decisions and to float
round-off on posteriors, for every decoding mode.
"""

import numpy as np
import pytest

import polarmem._sc_pure as pure
from polarmem import BACKEND, build_ge_qec, build_queue_channel, transmit
from polarmem._backend import sample_states, sc_trellis
from polarmem.polar import PolarCode, _leaf_csi, _leaf_trellis, encode, polar_transform

compiled = pytest.importorskip(
    "polarmem._sc_core", reason="compiled backend unavailable; pure fallback in use"
)


def test_active_backend_reported():
    assert BACKEND in ("compiled", "pure")
    if BACKEND == "compiled":
        assert sc_trellis is compiled.sc_trellis


def _random_case(rng, n, channel):
    size = 1 << n
    code = PolarCode(n=n, info_set=rng.choice(size, size // 2, replace=False))
    message = rng.integers(0, 2, len(code.info_set)).astype(np.uint8)
    record = transmit(channel, encode(code, message), int(rng.integers(2 ** 31)),
                      reveal_states=True)
    return code, message, record


@pytest.mark.parametrize("n", [1, 2, 4, 6])
def test_trellis_mode_agrees(n):
    rng = np.random.default_rng(n)
    channel = build_ge_qec(0.1, 0.3, 0.01, 0.4)
    for _ in range(10):
        code, _, record = _random_case(rng, n, channel)
        leaf = _leaf_trellis(channel, record.outputs)
        args = (channel.chain.matrix, channel.stationary, code.frozen_mask, code.frozen_values)
        u_c, p_c = compiled.sc_trellis(leaf, *args)
        u_p, p_p = pure.sc_trellis(leaf, *args)
        np.testing.assert_array_equal(u_c, u_p)
        np.testing.assert_allclose(p_c, p_p, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("n", [1, 3, 5])
def test_csi_mode_agrees(n):
    rng = np.random.default_rng(100 + n)
    channel = build_queue_channel(0.8, 1.0, lambda s: min(1.0, 0.05 * s), level=12)
    for _ in range(10):
        code, _, record = _random_case(rng, n, channel)
        leaf = _leaf_csi(channel, record.outputs, record.states)
        args = (np.ones((1, 1)), np.ones(1), code.frozen_mask, code.frozen_values)
        u_c, p_c = compiled.sc_trellis(leaf, *args)
        u_p, p_p = pure.sc_trellis(leaf, *args)
        np.testing.assert_array_equal(u_c, u_p)
        np.testing.assert_allclose(p_c, p_p, rtol=1e-12, atol=1e-15)


def test_genie_mode_agrees():
    rng = np.random.default_rng(7)
    channel = build_ge_qec(0.1, 0.3, 0.01, 0.4)
    for _ in range(10):
        u = rng.integers(0, 2, 16).astype(np.uint8)
        from polarmem.polar import inverse_polar_transform

        record = transmit(channel, inverse_polar_transform(u), int(rng.integers(2 ** 31)))
        leaf = _leaf_trellis(channel, record.outputs)
        dummy = np.zeros(16, dtype=np.uint8)
        args = (channel.chain.matrix, channel.stationary, dummy, dummy)
        _, p_c = compiled.sc_trellis(leaf, *args, genie_u=u)
        _, p_p = pure.sc_trellis(leaf, *args, genie_u=u)
        np.testing.assert_allclose(p_c, p_p, rtol=1e-12, atol=1e-15)


def test_sample_states_agrees():
    rng = np.random.default_rng(3)
    matrix = rng.random((5, 5)) + 0.05
    matrix /= matrix.sum(axis=1, keepdims=True)
    pi = np.full(5, 0.2)
    cum_rows = np.cumsum(matrix, axis=1)
    init_cum = np.cumsum(pi)
    uniforms = rng.random(10_000)
    np.testing.assert_array_equal(
        compiled.sample_states(cum_rows, init_cum, uniforms),
        pure.sample_states(cum_rows, init_cum, uniforms),
    )
