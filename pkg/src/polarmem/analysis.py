"""Monte Carlo polarization, code construction, capacities, BLER, sweeps.

This is the experimental side of the toolkit: estimate how the synthesized
bit-channels polarize for a given Markov-memory channel, pick an information
set, evaluate the closed-form capacity expressions and their no-CSI Jensen
bounds, and measure block error rates of the resulting codes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channels import MarkovianCqChannel, transmit
from .errors import ValidationError
from .markov import (
    CountableChainSpec,
    FiniteMarkovChain,
    l1_distance,
    stationary_distribution,
    truncate_chain,
)
from .polar import PolarCode, decode, encode, genie_posteriors_full, inverse_polar_transform
from .qnoise import NoiseSpec, binary_entropy, holevo_chi_unital


def bec_recursion(eps: float, n: int) -> np.ndarray:
    """Exact Bhattacharyya values of the 2**n BEC(eps) synthesized channels.

    Index order matches the decoder's decision order: the even child of index
    j is the degraded split 2z - z**2, the odd child the upgraded split z**2.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValidationError("erasure probability outside [0, 1]")
    z = np.array([eps])
    for _ in range(n):
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


@dataclass(frozen=True)
class PolarizationEstimate:
    """Per-index genie-aided reliability estimates."""

    n: int
    z_hat: np.ndarray
    i_hat: np.ndarray
    err_hat: np.ndarray
    trials: int
    seed: int
    mean_i_sigma: float = 0.0  # std error of mean(i_hat) over trials

    @property
    def mean_i(self) -> float:
        return float(np.mean(self.i_hat))

    @property
    def block_length(self) -> int:
        return 1 << self.n

    def good_fraction(self, gamma: float = 0.1) -> float:
        """Fraction of indices with estimated mutual information above 1 - gamma."""
        return float(np.mean(self.i_hat > 1.0 - gamma))

    def good_fraction_z(self, threshold: float = 0.01) -> float:
        return float(np.mean(self.z_hat < threshold))


def estimate_polarization(channel: MarkovianCqChannel, n: int, trials: int,
                          seed: int) -> PolarizationEstimate:
    """Monte Carlo polarization: uniform inputs, genie-aided SC posteriors.

    Per trial and index, the Bhattacharyya contribution is
    sqrt(P(wrong) / P(true)) clipped to [0, 1]; the information contribution
    is 1 - h(posterior); the error contribution is the wrong-decision flag.
    """
    if trials < 1000:
        raise ValidationError("polarization estimates need at least 1e3 trials")
    size = 1 << n
    z_acc = np.zeros(size)
    h_acc = np.zeros(size)
    err_acc = np.zeros(size)
    block_h = np.empty(trials)
    root = np.random.SeedSequence(seed)
    for trial, child in enumerate(root.spawn(trials)):
        u_ss, tx_ss = child.spawn(2)
        u = np.random.default_rng(u_ss).integers(0, 2, size=size, dtype=np.uint8)
        x = inverse_polar_transform(u)
        record = transmit(channel, x, tx_ss)
        post1 = genie_posteriors_full(channel, record, u)
        post_true = np.where(u == 1, post1, 1.0 - post1)
        with np.errstate(divide="ignore", over="ignore"):
            z = np.sqrt((1.0 - post_true) / np.maximum(post_true, 1e-300))
        z_acc += np.minimum(z, 1.0)
        h = binary_entropy(post1)
        h_acc += h
        block_h[trial] = h.mean()
        decisions = (post1 > 0.5).astype(np.uint8)  # tie breaks to 0
        err_acc += decisions != u
    return PolarizationEstimate(
        n=n,
        z_hat=z_acc / trials,
        i_hat=1.0 - h_acc / trials,
        err_hat=err_acc / trials,
        trials=trials,
        seed=seed,
        mean_i_sigma=float(block_h.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0,
    )


def select_information_set(est: PolarizationEstimate, rate: float) -> PolarCode:
    """The floor(rate * N) most reliable indices: smallest Z, ties by error, then index."""
    if not 0.0 <= rate <= 1.0:
        raise ValidationError("rate must lie in [0, 1]")
    size = est.block_length
    k = int(np.floor(rate * size))
    order = np.lexsort((np.arange(size), est.err_hat, est.z_hat))
    return PolarCode(n=est.n, info_set=np.sort(order[:k]))


@dataclass(frozen=True)
class CapacityReport:
    model_id: str
    capacity: float
    bounds: Optional[tuple[float, float]] = None
    truncation: Optional[object] = None

    @property
    def jensen_gap(self) -> Optional[float]:
        if self.bounds is None:
            return None
        return self.bounds[1] - self.bounds[0]


def _state_probs(chain: FiniteMarkovChain, noise: NoiseSpec) -> tuple[np.ndarray, np.ndarray]:
    pi = stationary_distribution(chain)
    p = np.array([noise.p(s) for s in range(chain.size)])
    return pi, p


def capacity_erasure(chain: FiniteMarkovChain, noise: NoiseSpec,
                     model_id: str = "erasure") -> CapacityReport:
    """1 minus the stationary erasure probability."""
    if noise.kind != "erasure":
        raise ValidationError("capacity_erasure needs erasure noise")
    pi, p = _state_probs(chain, noise)
    return CapacityReport(model_id=model_id, capacity=float(1.0 - pi @ p))


def capacity_unital_csi(chain: FiniteMarkovChain, noise: NoiseSpec,
                        model_id: str = "unital-csi") -> CapacityReport:
    """Stationary expectation of the per-state Holevo information (receiver CSI)."""
    if noise.kind not in ("depolarizing", "pauli"):
        raise ValidationError("capacity_unital_csi needs unital (Pauli) noise")
    pi = stationary_distribution(chain)
    chi = np.array([holevo_chi_unital(noise.pauli_params(s)) for s in range(chain.size)])
    return CapacityReport(model_id=model_id, capacity=float(pi @ chi))


def capacity_depolarizing_csi(chain: FiniteMarkovChain, noise: NoiseSpec,
                              model_id: str = "depolarizing-csi") -> CapacityReport:
    """E[1 - h(p/2)] with the no-CSI Jensen bounds attached."""
    if noise.kind != "depolarizing":
        raise ValidationError("capacity_depolarizing_csi needs depolarizing noise")
    pi, p = _state_probs(chain, noise)
    capacity = float(pi @ (1.0 - binary_entropy(p / 2.0)))
    lower = float(1.0 - binary_entropy(float(pi @ p) / 2.0))
    return CapacityReport(model_id=model_id, capacity=capacity, bounds=(lower, capacity))


def conditional_entropy_rate(channel: MarkovianCqChannel) -> float:
    """H(X|Y) per use: the stationary erased fraction, or E[h(crossover)] under CSI."""
    pi = channel.stationary
    if channel.law.mode == "erasure":
        return float(pi @ channel.law.table[:, 0, 2])
    if not channel.csi:
        raise ValidationError("no entropy-rate formula for hidden-state unital channels")
    crossover = channel.law.table[:, 0, 1]
    return float(pi @ binary_entropy(crossover))


@dataclass(frozen=True)
class BlerResult:
    block_length: int
    rate: float
    trials: int
    errors: int
    bler: float
    ci_low: float
    ci_high: float


def _wilson(errors: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    phat = errors / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * np.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if errors == 0 else max(0.0, float(center - half))
    hi = 1.0 if errors == trials else min(1.0, float(center + half))
    return lo, hi


def bler_experiment(channel: MarkovianCqChannel, code: PolarCode, trials: int,
                    seed: int) -> BlerResult:
    """Block error rate of the code over the channel, with a Wilson 95% interval."""
    if trials < 100:
        raise ValidationError("BLER experiments need at least 1e2 trials")
    errors = 0
    root = np.random.SeedSequence(seed)
    k = len(code.info_set)
    for child in root.spawn(trials):
        msg_ss, tx_ss = child.spawn(2)
        message = np.random.default_rng(msg_ss).integers(0, 2, size=k, dtype=np.uint8)
        record = transmit(channel, encode(code, message), tx_ss)
        decoded, _ = decode(channel, code, record)
        errors += int(not np.array_equal(decoded, message))
    lo, hi = _wilson(errors, trials)
    return BlerResult(
        block_length=code.block_length,
        rate=code.rate,
        trials=trials,
        errors=errors,
        bler=errors / trials,
        ci_low=lo,
        ci_high=hi,
    )


@dataclass(frozen=True)
class SweepRow:
    level: int
    l1_to_reference: float
    mean_p: float
    capacity: float


def truncation_sweep(spec: CountableChainSpec, noise: NoiseSpec, levels: Sequence[int],
                     reference_level: Optional[int] = None,
                     reference_pi: Optional[np.ndarray] = None,
                     augmentation: str = "last-column") -> list[SweepRow]:
    """Capacity of the truncated channel as the truncation level grows.

    The reference stationary law is either supplied in closed form or computed
    at a level strictly beyond every swept level.
    """
    levels = list(levels)
    if sorted(levels) != levels:
        raise ValidationError("levels must be ascending")
    if reference_pi is None:
        if reference_level is None or reference_level <= max(levels):
            raise ValidationError("need reference_pi or a reference_level beyond max(levels)")
        ref_chain = truncate_chain(spec, reference_level, augmentation)
        reference_pi = stationary_distribution(ref_chain)
    rows = []
    for level in levels:
        chain = truncate_chain(spec, level, augmentation)
        pi = stationary_distribution(chain)
        p = np.array([noise.p(s) for s in range(chain.size)])
        mean_p = float(pi @ p)
        if noise.kind == "erasure":
            capacity = 1.0 - mean_p
        elif noise.kind == "depolarizing":
            capacity = float(pi @ (1.0 - binary_entropy(p / 2.0)))
        else:
            chi = np.array([holevo_chi_unital(noise.pauli_params(s)) for s in range(chain.size)])
            capacity = float(pi @ chi)
        rows.append(SweepRow(
            level=level,
            l1_to_reference=l1_distance(pi, reference_pi),
            mean_p=mean_p,
            capacity=capacity,
        ))
    return rows
