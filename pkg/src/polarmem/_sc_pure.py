"""Pure-Python/NumPy kernels: Markov path sampling and trellis SC decoding.

Mirror of the compiled extension `_sc_core`; whichever imports cleanly is
selected in `_backend`.  Keep the two implementations in lockstep — the test
suite asserts they agree to float precision.

The trellis SC decoder works on the binary recursion tree over contiguous
output blocks.  A node covering a block holds, per hypothesis on its current
local input bit, a likelihood matrix M[b](s_in, s_out) = P(block outputs,
exit state | entry state, past local bits, current bit = b).  Sibling blocks
chain through one transition-matrix step; even (check) phases sum the hidden
sibling bit out, odd (variable) phases condition on the decided bit.  With a
single dummy state this degenerates to standard scalar SC.
"""

from __future__ import annotations

import numpy as np


def sample_states(cum_rows: np.ndarray, init_cum: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Sample a state path: first state from init_cum, then row-by-row."""
    n_states = cum_rows.shape[0]
    length = uniforms.shape[0]
    out = np.empty(length, dtype=np.int64)
    s = min(int(np.searchsorted(init_cum, uniforms[0], side="right")), n_states - 1)
    out[0] = s
    for i in range(1, length):
        s = min(int(np.searchsorted(cum_rows[s], uniforms[i], side="right")), n_states - 1)
        out[i] = s
    return out


class _Trellis:
    def __init__(self, leaf, K, pi):
        self.N = leaf.shape[0]
        self.S = leaf.shape[2]
        self.n = self.N.bit_length() - 1
        self.K = K
        self.pi = pi
        num_nodes = 2 * self.N - 1
        self.mats = np.zeros((num_nodes, 2, self.S, self.S))
        self.phase = np.full(num_nodes, -1, dtype=np.int64)
        self.nrecv = np.zeros(num_nodes, dtype=np.int64)
        self.bit_even = np.zeros(num_nodes, dtype=np.int64)
        self.last_bit = np.zeros(num_nodes, dtype=np.int64)
        for t in range(self.N):
            node = self._idx(self.n, t)
            for b in (0, 1):
                self.mats[node, b] = np.diag(leaf[t, b])
            self.phase[node] = 0

    @staticmethod
    def _idx(d, t):
        return (1 << d) - 1 + t

    def calc(self, d, t, phase):
        node = self._idx(d, t)
        if self.phase[node] == phase:
            return
        j = phase >> 1
        self.calc(d + 1, 2 * t, j)
        self.calc(d + 1, 2 * t + 1, j)
        lm = self.mats[self._idx(d + 1, 2 * t)]
        rm = self.mats[self._idx(d + 1, 2 * t + 1)]
        out = self.mats[node]
        if phase & 1 == 0:
            for b in (0, 1):
                out[b] = lm[b] @ self.K @ rm[0] + lm[b ^ 1] @ self.K @ rm[1]
        else:
            u_prev = self.last_bit[node]
            for v in (0, 1):
                out[v] = lm[u_prev ^ v] @ self.K @ rm[v]
        peak = out.max()
        if peak <= 0.0:
            # a past wrong guess killed every explanation of this block
            # (possible on zero-crossover channels); treat it as uninformative
            out[:] = 1.0
        else:
            out /= peak
        self.phase[node] = phase

    def push(self, d, t, bit):
        node = self._idx(d, t)
        if self.nrecv[node] & 1 == 0:
            self.bit_even[node] = bit
        elif d < self.n:
            self.push(d + 1, 2 * t, self.bit_even[node] ^ bit)
            self.push(d + 1, 2 * t + 1, bit)
        self.last_bit[node] = bit
        self.nrecv[node] += 1


def sc_trellis(leaf, K, pi, frozen_mask, frozen_vals, genie_u=None):
    """Successive-cancellation decode over a hidden-Markov channel.

    leaf[i, x, s] = P(y_i | input x, state s); K, pi are the chain step and
    stationary law.  Frozen positions are forced; in genie mode every decision
    is replaced by the true bit.  Returns (u_hat, posterior of u_i = 1).
    """
    leaf = np.ascontiguousarray(leaf, dtype=np.float64)
    N = leaf.shape[0]
    tree = _Trellis(leaf, np.asarray(K, dtype=np.float64), np.asarray(pi, dtype=np.float64))
    u_hat = np.zeros(N, dtype=np.uint8)
    post1 = np.empty(N)
    ones = np.ones(tree.S)
    for i in range(N):
        tree.calc(0, 0, i)
        root = tree.mats[0]
        p0 = float(tree.pi @ root[0] @ ones)
        p1 = float(tree.pi @ root[1] @ ones)
        post1[i] = p1 / (p0 + p1)
        if genie_u is not None:
            u = int(genie_u[i])
        elif frozen_mask[i]:
            u = int(frozen_vals[i])
        else:
            u = 1 if p1 > p0 else 0  # tie breaks to 0
        u_hat[i] = u
        tree.push(0, 0, u)
    return u_hat, post1
