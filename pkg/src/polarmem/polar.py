"""Polar transform, encoder, and successive-cancellation decoders.

Two decoding modes share one kernel (see `_backend`): scalar SC when the
receiver observes the state path (the channel is then conditionally
memoryless, a single dummy trellis state), and matrix-trellis SC when the
state path is hidden, where block likelihoods are |S| x |S| matrices indexed
by the chain's entry/exit states.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from ._backend import sc_trellis
from .channels import MarkovianCqChannel, TransmissionRecord
from .errors import ResourceError, ValidationError

MAX_TRELLIS_STATES = 64  # |S|^3 per node beyond this is a config smell, not a decode


@lru_cache(maxsize=None)
def bit_reversal_permutation(n: int) -> np.ndarray:
    """Permutation sending index i to its n-bit reversal."""
    size = 1 << n
    perm = np.zeros(size, dtype=np.int64)
    for i in range(size):
        r = 0
        x = i
        for _ in range(n):
            r = (r << 1) | (x & 1)
            x >>= 1
        perm[i] = r
    perm.setflags(write=False)
    return perm


def _check_block(bits: np.ndarray) -> int:
    if bits.ndim != 1 or bits.size == 0 or bits.size & (bits.size - 1):
        raise ValidationError(f"length {bits.size} is not a power of two")
    return bits.size.bit_length() - 1


def _butterfly(bits: np.ndarray) -> np.ndarray:
    """Multiply a row bit-vector by the n-fold Kronecker power of [[1,0],[1,1]]."""
    v = bits.copy()
    h = 1
    while h < v.size:
        w = v.reshape(-1, 2 * h)
        w[:, :h] ^= w[:, h:]
        h *= 2
    return v


def polar_transform(bits) -> np.ndarray:
    """u-domain image of a codeword: bit-reversal permutation, then butterfly."""
    bits = np.asarray(bits, dtype=np.uint8)
    n = _check_block(bits)
    return _butterfly(bits[bit_reversal_permutation(n)])


def inverse_polar_transform(bits) -> np.ndarray:
    """Codeword for a u-domain vector (butterfly, then bit reversal)."""
    bits = np.asarray(bits, dtype=np.uint8)
    n = _check_block(bits)
    return _butterfly(bits)[bit_reversal_permutation(n)]


@dataclass(frozen=True)
class PolarCode:
    """Blocklength 2**n, information index set, frozen bit values."""

    n: int
    info_set: np.ndarray
    frozen_values: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError("n must be >= 0")
        info = np.unique(np.asarray(self.info_set, dtype=np.int64))
        if len(info) and (info[0] < 0 or info[-1] >= self.block_length):
            raise ValidationError("information indices out of range")
        object.__setattr__(self, "info_set", info)
        frozen = self.frozen_values
        if frozen is None:
            frozen = np.zeros(self.block_length, dtype=np.uint8)
        else:
            frozen = np.asarray(frozen, dtype=np.uint8)
            if frozen.shape != (self.block_length,) or np.any(frozen > 1):
                raise ValidationError("frozen_values must be a full-length bit vector")
        object.__setattr__(self, "frozen_values", frozen)
        mask = np.ones(self.block_length, dtype=np.uint8)
        mask[info] = 0
        object.__setattr__(self, "_frozen_mask", mask)

    @property
    def block_length(self) -> int:
        return 1 << self.n

    @property
    def rate(self) -> float:
        return len(self.info_set) / self.block_length

    @property
    def frozen_mask(self) -> np.ndarray:
        return self._frozen_mask

    @classmethod
    def rate_one(cls, n: int) -> "PolarCode":
        return cls(n=n, info_set=np.arange(1 << n))


def encode(code: PolarCode, message) -> np.ndarray:
    """Place the message on the information set and map u -> codeword."""
    message = np.asarray(message, dtype=np.uint8)
    if message.shape != (len(code.info_set),):
        raise ValidationError(
            f"message length {message.size} != information set size {len(code.info_set)}"
        )
    u = code.frozen_values.copy()
    u[code.info_set] = message
    return inverse_polar_transform(u)


def _leaf_trellis(channel: MarkovianCqChannel, outputs: np.ndarray) -> np.ndarray:
    table = channel.law.table  # (S, 2, Y)
    return np.ascontiguousarray(table[:, :, outputs].transpose(2, 1, 0))


def _leaf_csi(channel: MarkovianCqChannel, outputs: np.ndarray, states: np.ndarray) -> np.ndarray:
    table = channel.law.table
    return np.ascontiguousarray(table[states, :, outputs][:, :, None])


def _check_outputs(channel: MarkovianCqChannel, outputs) -> np.ndarray:
    outputs = np.asarray(outputs, dtype=np.int64)
    if outputs.ndim != 1 or outputs.size == 0 or outputs.size & (outputs.size - 1):
        raise ValidationError("outputs length must be a power of two")
    if np.any(outputs < 0) or np.any(outputs >= channel.law.n_outcomes):
        raise ValidationError("output symbol outside the law's alphabet")
    return outputs


def sc_decode_csi(channel: MarkovianCqChannel, code: PolarCode, outputs, states):
    """Scalar SC given the observed state path; returns (message, P(u_i=1 | ...))."""
    outputs = _check_outputs(channel, outputs)
    if states is None:
        raise ValidationError("CSI decoding needs the state path")
    states = np.asarray(states, dtype=np.int64)
    if states.shape != outputs.shape:
        raise ValidationError("state path length mismatch")
    leaf = _leaf_csi(channel, outputs, states)
    u_hat, post1 = sc_trellis(leaf, np.ones((1, 1)), np.ones(1),
                              code.frozen_mask, code.frozen_values)
    return u_hat[code.info_set], post1


def sc_decode_trellis(channel: MarkovianCqChannel, code: PolarCode, outputs):
    """Matrix-trellis SC over the hidden state path; returns (message, P(u_i=1 | ...))."""
    outputs = _check_outputs(channel, outputs)
    if channel.n_states > MAX_TRELLIS_STATES:
        raise ResourceError(
            f"{channel.n_states} trellis states exceed the budget of "
            f"{MAX_TRELLIS_STATES}; truncate the chain harder"
        )
    leaf = _leaf_trellis(channel, outputs)
    u_hat, post1 = sc_trellis(leaf, channel.chain.matrix, channel.stationary,
                              code.frozen_mask, code.frozen_values)
    return u_hat[code.info_set], post1


def decode(channel: MarkovianCqChannel, code: PolarCode, record: TransmissionRecord):
    """Dispatch to the decoder matching the channel's CSI mode."""
    if channel.csi:
        return sc_decode_csi(channel, code, record.outputs, record.states)
    return sc_decode_trellis(channel, code, record.outputs)


def genie_posteriors_full(channel: MarkovianCqChannel, record: TransmissionRecord,
                          true_u: np.ndarray) -> np.ndarray:
    """P(u_i = 1 | u^{i-1}, y[, states]) with every past decision forced true."""
    true_u = np.asarray(true_u, dtype=np.uint8)
    outputs = _check_outputs(channel, record.outputs)
    if true_u.shape != outputs.shape:
        raise ValidationError("true u-vector length mismatch")
    dummy = np.zeros(outputs.size, dtype=np.uint8)
    if channel.csi:
        leaf = _leaf_csi(channel, outputs, np.asarray(record.states, dtype=np.int64))
        _, post1 = sc_trellis(leaf, np.ones((1, 1)), np.ones(1), dummy, dummy, genie_u=true_u)
    else:
        if channel.n_states > MAX_TRELLIS_STATES:
            raise ResourceError("state budget exceeded; truncate the chain harder")
        leaf = _leaf_trellis(channel, outputs)
        _, post1 = sc_trellis(leaf, channel.chain.matrix, channel.stationary,
                              dummy, dummy, genie_u=true_u)
    return post1


def genie_posteriors(channel: MarkovianCqChannel, code: PolarCode,
                     record: TransmissionRecord, true_message) -> np.ndarray:
    """Genie-aided per-index posteriors for a coded transmission."""
    true_message = np.asarray(true_message, dtype=np.uint8)
    true_u = polar_transform(record.inputs)
    if not np.array_equal(true_u[code.info_set], true_message):
        raise ValidationError("message is inconsistent with the transmitted codeword")
    if not np.array_equal(true_u[code.frozen_mask.astype(bool)],
                          code.frozen_values[code.frozen_mask.astype(bool)]):
        raise ValidationError("frozen bits are inconsistent with the transmitted codeword")
    return genie_posteriors_full(channel, record, true_u)
