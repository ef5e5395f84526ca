"""Assembled cq-channels with Markov memory, and end-to-end transmission.

A channel bundles a finite chain (possibly a truncation of a countable one),
a per-state noise spec, the induced classical law, and the CSI flag.  The
classical simulation path samples a stationary state trajectory and then
draws each output symbol from the induced law, conditionally independently
given the states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, StructuralError, ValidationError
from .markov import (
    CountableChainSpec,
    FiniteMarkovChain,
    ge_chain,
    mm1_arrival_spec,
    sample_path,
    stationary_distribution,
    truncate_chain,
)
from .qnoise import InducedLaw, NoiseSpec, induced_law

ERASE = 2  # output symbol index of the erasure flag


@dataclass(frozen=True)
class TruncationProvenance:
    level: int
    augmentation: str


@dataclass(frozen=True)
class MarkovianCqChannel:
    chain: FiniteMarkovChain
    noise: NoiseSpec
    law: InducedLaw
    csi: bool
    provenance: Optional[TruncationProvenance] = None

    def __post_init__(self):
        if self.law.n_states != self.chain.size:
            raise ValidationError("law and chain disagree on the state count")
        expected = induced_law(self.noise, self.csi, self.chain.size)
        if not np.allclose(expected.table, self.law.table, atol=1e-12):
            raise ValidationError("law is inconsistent with the noise spec")
        stationary_distribution(self.chain)  # cache + ergodicity check

    @property
    def n_states(self) -> int:
        return self.chain.size

    @property
    def stationary(self) -> np.ndarray:
        return stationary_distribution(self.chain)


@dataclass(frozen=True)
class TransmissionRecord:
    """One block through the channel; states ride along only under CSI."""

    inputs: np.ndarray
    outputs: np.ndarray
    states: Optional[np.ndarray]

    def __post_init__(self):
        if len(self.inputs) != len(self.outputs):
            raise ValidationError("inputs and outputs must have equal length")
        if self.states is not None and len(self.states) != len(self.inputs):
            raise ValidationError("state path length mismatch")


def _assemble(chain: FiniteMarkovChain, noise: NoiseSpec, csi: bool,
              provenance: Optional[TruncationProvenance]) -> MarkovianCqChannel:
    law = induced_law(noise, csi, chain.size)
    return MarkovianCqChannel(chain=chain, noise=noise, law=law, csi=csi, provenance=provenance)


def build_ge_qec(k01: float, k10: float, p0: float, p1: float) -> MarkovianCqChannel:
    """Two-state Markov-modulated qubit erasure channel, no CSI at the receiver."""
    noise = NoiseSpec.erasure([p0, p1])
    return _assemble(ge_chain(k01, k10), noise, csi=False, provenance=None)


def build_queue_channel(lam: float, mu: float, p_fn: Callable[[int], float],
                        level: int, augmentation: str = "last-column") -> MarkovianCqChannel:
    """Depolarizing queue-channel: M/M/1 arrival-seen queue lengths drive p, CSI on.

    The countable arrival-epoch chain is truncated at ``level``; states above
    the truncation are treated as fully depolarizing when the noise table is
    built from ``p_fn`` over 0..level.
    """
    if level < 1:
        raise ValidationError("truncation level must be >= 1")
    spec = mm1_arrival_spec(lam, mu)  # raises on lam >= mu
    chain = truncate_chain(spec, level, augmentation)
    table = [float(p_fn(s)) for s in range(level + 1)]
    noise = NoiseSpec.depolarizing(table, tail=1.0)
    return _assemble(chain, noise, csi=True,
                     provenance=TruncationProvenance(level, augmentation))


def assemble(chain_spec, noise_spec: NoiseSpec, csi: bool,
             truncation: Optional[tuple[int, str]] = None) -> MarkovianCqChannel:
    """General assembly: finite chains pass through, countable specs must truncate."""
    if isinstance(chain_spec, FiniteMarkovChain):
        chain = chain_spec
        provenance = None
        if truncation is not None:
            level, augmentation = truncation
            chain = truncate_chain(chain_spec, level, augmentation)
            provenance = TruncationProvenance(level, augmentation)
    elif isinstance(chain_spec, CountableChainSpec):
        if truncation is None:
            if chain_spec.truncation_hint is None:
                raise ConfigError("countable chain specs need a truncation directive")
            truncation = (chain_spec.truncation_hint, "last-column")
        level, augmentation = truncation
        chain = truncate_chain(chain_spec, level, augmentation)
        provenance = TruncationProvenance(level, augmentation)
    else:
        raise ConfigError(f"unsupported chain spec type {type(chain_spec).__name__}")
    return _assemble(chain, noise_spec, csi, provenance)


def transmit(channel: MarkovianCqChannel, codeword: np.ndarray, seed,
             reveal_states: bool = False) -> TransmissionRecord:
    """Send a codeword: stationary state path, then y_i ~ law(.|x_i, s_i).

    Deterministic given the seed; the state path is returned when the channel
    has CSI (or when explicitly revealed for diagnostics).
    """
    codeword = np.asarray(codeword, dtype=np.uint8)
    if codeword.ndim != 1 or codeword.size < 1:
        raise ValidationError("codeword must be a nonempty bit vector")
    if np.any(codeword > 1):
        raise ValidationError("codeword entries must be bits")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    path_ss, out_ss = ss.spawn(2)
    states = sample_path(channel.chain, codeword.size, np.random.default_rng(path_ss))
    cum = np.cumsum(channel.law.table, axis=2)
    rows = cum[states, codeword]  # (N, n_outcomes)
    u = np.random.default_rng(out_ss).random(codeword.size)
    outputs = (u[:, None] >= rows).sum(axis=1).astype(np.int64)
    np.minimum(outputs, channel.law.n_outcomes - 1, out=outputs)
    keep = states if (channel.csi or reveal_states) else None
    return TransmissionRecord(inputs=codeword, outputs=outputs, states=keep)
