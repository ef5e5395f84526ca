"""Polar coding over erasure and unital qubit channels with Markov memory."""

from ._backend import BACKEND
from .channels import (
    MarkovianCqChannel,
    TransmissionRecord,
    assemble,
    build_ge_qec,
    build_queue_channel,
    transmit,
)
from .markov import (
    CountableChainSpec,
    FiniteMarkovChain,
    StructureReport,
    check_structure,
    l1_distance,
    sample_path,
    stationary_distribution,
    truncate_chain,
)
from .polar import (
    PolarCode,
    encode,
    genie_posteriors,
    inverse_polar_transform,
    polar_transform,
    sc_decode_csi,
    sc_decode_trellis,
)
from .qnoise import (
    DensityOperator,
    InducedLaw,
    NoiseSpec,
    PauliNoiseParams,
    apply_erasure,
    apply_pauli,
    binary_entropy,
    holevo_chi_unital,
    induced_law,
    verify_induced,
    von_neumann_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CountableChainSpec",
    "DensityOperator",
    "FiniteMarkovChain",
    "InducedLaw",
    "MarkovianCqChannel",
    "NoiseSpec",
    "PauliNoiseParams",
    "PolarCode",
    "StructureReport",
    "TransmissionRecord",
    "apply_erasure",
    "apply_pauli",
    "assemble",
    "binary_entropy",
    "build_ge_qec",
    "build_queue_channel",
    "check_structure",
    "encode",
    "genie_posteriors",
    "holevo_chi_unital",
    "induced_law",
    "inverse_polar_transform",
    "l1_distance",
    "polar_transform",
    "sample_path",
    "sc_decode_csi",
    "sc_decode_trellis",
    "stationary_distribution",
    "transmit",
    "truncate_chain",
    "verify_induced",
    "von_neumann_entropy",
]
