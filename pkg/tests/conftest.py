import itertools

import numpy as np
import pytest

from polarmem import assemble
from polarmem.markov import FiniteMarkovChain
from polarmem.polar import inverse_polar_transform
from polarmem.qnoise import NoiseSpec

GE_PARAMS = (0.1, 0.3, 0.01, 0.4)  # the running GE-QEC example, capacity 0.8925


def memoryless_erasure(eps: float, csi: bool = False):
    """BEC(eps) as a one-state Markov channel."""
    return assemble(FiniteMarkovChain(np.array([[1.0]])), NoiseSpec.erasure([eps]), csi=csi)


def memoryless_depolarizing(p: float):
    return assemble(FiniteMarkovChain(np.array([[1.0]])), NoiseSpec.depolarizing([p]), csi=True)


def power_iteration_stationary(matrix: np.ndarray, iters: int = 200000, tol: float = 1e-13):
    """Independent stationary-distribution oracle (plain power iteration)."""
    pi = np.full(matrix.shape[0], 1.0 / matrix.shape[0])
    for _ in range(iters):
        nxt = pi @ matrix
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() < tol:
            return nxt
        pi = nxt
    return pi


def brute_force_posteriors(channel, outputs, past_u):
    """Exact P(u_i = 1 | y, u_1^{i-1}) by summing every state path and input
    completion of the joint law.  Exponential; N <= 8, small |S| only."""
    outputs = np.asarray(outputs)
    size = len(outputs)
    K = channel.chain.matrix
    pi = channel.stationary
    n_states = channel.n_states
    law = channel.law.table
    posts = np.empty(size)
    for i in range(size):
        mass = [0.0, 0.0]
        for b in (0, 1):
            for future in itertools.product((0, 1), repeat=size - i - 1):
                u = np.concatenate([past_u[:i], [b], future]).astype(np.uint8)
                x = inverse_polar_transform(u)
                for path in itertools.product(range(n_states), repeat=size):
                    w = pi[path[0]]
                    for a, c in zip(path, path[1:]):
                        w *= K[a, c]
                    for j in range(size):
                        w *= law[path[j], x[j], outputs[j]]
                    mass[b] += w
        posts[i] = mass[1] / (mass[0] + mass[1])
    return posts


@pytest.fixture(scope="session")
def ge_channel():
    from polarmem import build_ge_qec

    return build_ge_qec(*GE_PARAMS)
