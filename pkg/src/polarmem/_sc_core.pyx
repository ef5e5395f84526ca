# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: Markov path sampling and trellis SC decoding.

Same contract as `_sc_pure`; see that module for the algorithm notes.  The
likelihood matrices live in one flat (num_nodes, 2, S, S) buffer and the
recursion is plain C recursion (depth = log2 N).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def sample_states(double[:, ::1] cum_rows, double[::1] init_cum, double[::1] uniforms):
    cdef Py_ssize_t n_states = cum_rows.shape[0]
    cdef Py_ssize_t length = uniforms.shape[0]
    out_arr = np.empty(length, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef Py_ssize_t i, s, j
    cdef double u

    u = uniforms[0]
    s = 0
    while s < n_states - 1 and init_cum[s] <= u:
        s += 1
    out[0] = s
    for i in range(1, length):
        u = uniforms[i]
        j = 0
        while j < n_states - 1 and cum_rows[s, j] <= u:
            j += 1
        s = j
        out[i] = s
    return out_arr


cdef struct TrellisState:
    Py_ssize_t n  # tree depth, N = 2**n
    Py_ssize_t S
    double* mats      # (2N-1, 2, S, S)
    long long* phase
    long long* nrecv
    unsigned char* bit_even
    unsigned char* last_bit
    double* K         # (S, S)
    double* tmp       # scratch (S, S)


cdef inline Py_ssize_t node_idx(Py_ssize_t d, Py_ssize_t t) noexcept:
    return ((<Py_ssize_t> 1) << d) - 1 + t


cdef inline void matmul(double* a, double* b, double* out, Py_ssize_t S) noexcept:
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(S):
        for j in range(S):
            acc = 0.0
            for k in range(S):
                acc += a[i * S + k] * b[k * S + j]
            out[i * S + j] = acc


cdef int calc(TrellisState* st, Py_ssize_t d, Py_ssize_t t, long long phase) except -1:
    cdef Py_ssize_t node = node_idx(d, t)
    if st.phase[node] == phase:
        return 0
    cdef long long j = phase >> 1
    calc(st, d + 1, 2 * t, j)
    calc(st, d + 1, 2 * t + 1, j)
    cdef Py_ssize_t S = st.S
    cdef Py_ssize_t mstride = 2 * S * S
    cdef double* lm = st.mats + node_idx(d + 1, 2 * t) * mstride
    cdef double* rm = st.mats + node_idx(d + 1, 2 * t + 1) * mstride
    cdef double* out = st.mats + node * mstride
    cdef double* lk = st.tmp            # left @ K
    cdef double* acc = st.tmp + S * S   # (left @ K) @ right
    cdef Py_ssize_t b, v, i
    cdef int u_prev
    cdef double peak

    if (phase & 1) == 0:
        for b in range(2):
            for v in range(2):
                matmul(lm + (b ^ v) * S * S, st.K, lk, S)
                matmul(lk, rm + v * S * S, acc, S)
                if v == 0:
                    for i in range(S * S):
                        out[b * S * S + i] = acc[i]
                else:
                    for i in range(S * S):
                        out[b * S * S + i] += acc[i]
    else:
        u_prev = st.last_bit[node]
        for v in range(2):
            matmul(lm + (u_prev ^ v) * S * S, st.K, lk, S)
            matmul(lk, rm + v * S * S, out + v * S * S, S)

    peak = 0.0
    for i in range(mstride):
        if out[i] > peak:
            peak = out[i]
    if peak <= 0.0:
        # a past wrong guess killed every explanation of this block
        # (possible on zero-crossover channels); treat it as uninformative
        for i in range(mstride):
            out[i] = 1.0
    else:
        for i in range(mstride):
            out[i] /= peak
    st.phase[node] = phase
    return 0


cdef void push(TrellisState* st, Py_ssize_t d, Py_ssize_t t, int bit) noexcept:
    cdef Py_ssize_t node = node_idx(d, t)
    if (st.nrecv[node] & 1) == 0:
        st.bit_even[node] = <unsigned char> bit
    elif d < st.n:
        push(st, d + 1, 2 * t, st.bit_even[node] ^ bit)
        push(st, d + 1, 2 * t + 1, bit)
    st.last_bit[node] = <unsigned char> bit
    st.nrecv[node] += 1


def sc_trellis(leaf, K, pi, frozen_mask, frozen_vals, genie_u=None):
    """Successive-cancellation decode over a hidden-Markov channel.

    leaf[i, x, s] = P(y_i | input x, state s); K, pi are the chain step and
    stationary law.  Frozen positions are forced; in genie mode every decision
    is replaced by the true bit.  Returns (u_hat, posterior of u_i = 1).
    """
    cdef cnp.ndarray[double, ndim=3, mode="c"] leaf_c = np.ascontiguousarray(leaf, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] K_c = np.ascontiguousarray(K, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] pi_c = np.ascontiguousarray(pi, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, mode="c"] fmask = np.ascontiguousarray(frozen_mask, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, mode="c"] fvals = np.ascontiguousarray(frozen_vals, dtype=np.uint8)

    cdef Py_ssize_t N = leaf_c.shape[0]
    cdef Py_ssize_t S = leaf_c.shape[2]
    cdef Py_ssize_t n = 0
    while ((<Py_ssize_t> 1) << n) < N:
        n += 1
    if ((<Py_ssize_t> 1) << n) != N:
        raise ValueError("blocklength must be a power of two")

    cdef bint genie = genie_u is not None
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, mode="c"] gu
    if genie:
        gu = np.ascontiguousarray(genie_u, dtype=np.uint8)
    else:
        gu = fvals  # unused

    cdef Py_ssize_t num_nodes = 2 * N - 1
    mats_arr = np.zeros((num_nodes, 2, S, S))
    phase_arr = np.full(num_nodes, -1, dtype=np.int64)
    nrecv_arr = np.zeros(num_nodes, dtype=np.int64)
    bits_arr = np.zeros(2 * num_nodes, dtype=np.uint8)
    tmp_arr = np.zeros(2 * S * S)
    cdef cnp.ndarray[double, ndim=4, mode="c"] mats = mats_arr
    cdef cnp.ndarray[long long, ndim=1, mode="c"] phase = phase_arr
    cdef cnp.ndarray[long long, ndim=1, mode="c"] nrecv = nrecv_arr
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, mode="c"] bits = bits_arr
    cdef cnp.ndarray[double, ndim=1, mode="c"] tmp = tmp_arr

    cdef TrellisState st
    st.n = n
    st.S = S
    st.mats = <double*> mats.data
    st.phase = <long long*> phase.data
    st.nrecv = <long long*> nrecv.data
    st.bit_even = <unsigned char*> bits.data
    st.last_bit = (<unsigned char*> bits.data) + num_nodes
    st.K = <double*> K_c.data
    st.tmp = <double*> tmp.data

    # leaves: diagonal base case
    cdef Py_ssize_t t, b, s, node
    cdef Py_ssize_t mstride = 2 * S * S
    for t in range(N):
        node = node_idx(n, t)
        for b in range(2):
            for s in range(S):
                st.mats[node * mstride + b * S * S + s * S + s] = leaf_c[t, b, s]
        st.phase[node] = 0

    u_hat_arr = np.zeros(N, dtype=np.uint8)
    post1_arr = np.empty(N)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, mode="c"] u_hat = u_hat_arr
    cdef cnp.ndarray[double, ndim=1, mode="c"] post1 = post1_arr

    cdef Py_ssize_t i, r, c
    cdef double p0, p1, rowsum
    cdef double* root
    cdef int u
    for i in range(N):
        calc(&st, 0, 0, i)
        root = st.mats  # node 0
        p0 = 0.0
        p1 = 0.0
        for r in range(S):
            for c in range(S):
                p0 += pi_c[r] * root[0 * S * S + r * S + c]
                p1 += pi_c[r] * root[1 * S * S + r * S + c]
        post1[i] = p1 / (p0 + p1)
        if genie:
            u = gu[i]
        elif fmask[i]:
            u = fvals[i]
        else:
            u = 1 if p1 > p0 else 0  # tie breaks to 0
        u_hat[i] = <unsigned char> u
        push(&st, 0, 0, u)
    return u_hat_arr, post1_arr
