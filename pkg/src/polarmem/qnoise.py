"""Qubit density operators, per-state noise maps, entropies, and induced laws.

The noise maps are the two families with known capacity results for Markov
memory: state-dependent erasure, and unital (Pauli) qubit noise with receiver
state information.  ``induced_law`` derives the classical channel seen when
bits ride on orthogonal product states and the receiver applies the matching
projective product measurement; ``verify_induced`` re-derives it by sampling
actual density operators, as an end-to-end check of that reduction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import UnsupportedModeError, ValidationError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
EIG_TOL = 1e-12

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)


class DensityOperator:
    """Hermitian, unit-trace, positive semidefinite matrix of dimension 2 or 3.

    Dimension 3 embeds a qubit alongside an erasure flag |e> orthogonal to the
    qubit subspace (basis index 2).
    """

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape not in ((2, 2), (3, 3)):
            raise ValidationError(f"density operator must be 2x2 or 3x3, got {matrix.shape}")
        if np.max(np.abs(matrix - matrix.conj().T)) > HERMITIAN_TOL:
            raise ValidationError("matrix is not Hermitian within tolerance")
        # re-symmetrize to keep float drift from accumulating across maps
        matrix = 0.5 * (matrix + matrix.conj().T)
        tr = matrix.trace().real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"trace is {tr!r}, not 1 within {TRACE_TOL}")
        eigs = np.linalg.eigvalsh(matrix)
        if eigs[0] < -EIG_TOL:
            raise ValidationError(f"negative eigenvalue {eigs[0]!r}")
        self.matrix = matrix
        self.matrix.setflags(write=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def basis(cls, b: int) -> "DensityOperator":
        """Computational basis state |b><b| for b in {0, 1}."""
        if b not in (0, 1):
            raise ValidationError("basis bit must be 0 or 1")
        m = np.zeros((2, 2), dtype=complex)
        m[b, b] = 1.0
        return cls(m)

    @classmethod
    def from_bloch(cls, r: np.ndarray) -> "DensityOperator":
        """Qubit state (I + r . sigma) / 2 for a Bloch vector with |r| <= 1."""
        r = np.asarray(r, dtype=float)
        if np.linalg.norm(r) > 1.0 + EIG_TOL:
            raise ValidationError("Bloch vector must have norm <= 1")
        m = 0.5 * (PAULI_I + r[0] * PAULI_X + r[1] * PAULI_Y + r[2] * PAULI_Z)
        return cls(m)

    @classmethod
    def maximally_mixed(cls) -> "DensityOperator":
        return cls(0.5 * np.eye(2, dtype=complex))

    def bloch_vector(self) -> np.ndarray:
        if self.dimension != 2:
            raise ValidationError("Bloch vector is defined for qubits only")
        return np.array([np.trace(self.matrix @ p).real for p in (PAULI_X, PAULI_Y, PAULI_Z)])


@dataclass(frozen=True)
class PauliNoiseParams:
    """Mixing weights (q_I, q_X, q_Y, q_Z) of a Pauli channel."""

    q_i: float
    q_x: float
    q_y: float
    q_z: float

    def __post_init__(self):
        qs = self.as_array()
        if np.any(qs < -TRACE_TOL) or np.any(qs > 1 + TRACE_TOL):
            raise ValidationError("Pauli weights must lie in [0, 1]")
        if abs(qs.sum() - 1.0) > TRACE_TOL:
            raise ValidationError(f"Pauli weights sum to {qs.sum()!r}, not 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.q_i, self.q_x, self.q_y, self.q_z], dtype=float)

    @classmethod
    def identity(cls) -> "PauliNoiseParams":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def depolarizing(cls, p: float) -> "PauliNoiseParams":
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"depolarizing probability {p} outside [0, 1]")
        return cls(1.0 - 0.75 * p, 0.25 * p, 0.25 * p, 0.25 * p)

    @property
    def bloch_scales(self) -> np.ndarray:
        """Componentwise Bloch contraction factors (lambda_x, lambda_y, lambda_z)."""
        qi, qx, qy, qz = self.q_i, self.q_x, self.q_y, self.q_z
        return np.array([qi + qx - qy - qz, qi - qx + qy - qz, qi - qx - qy + qz])

    @property
    def best_axis(self) -> int:
        return int(np.argmax(np.abs(self.bloch_scales)))

    @property
    def lambda_max(self) -> float:
        return float(np.max(np.abs(self.bloch_scales)))


def apply_erasure(p: float, rho: DensityOperator) -> DensityOperator:
    """(1 - p) * (rho ⊕ 0) + p * |e><e| on the flag-extended space."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"erasure probability {p} outside [0, 1]")
    if rho.dimension != 2:
        raise ValidationError("erasure acts on qubit inputs")
    out = np.zeros((3, 3), dtype=complex)
    out[:2, :2] = (1.0 - p) * rho.matrix
    out[2, 2] = p
    return DensityOperator(out)


def apply_pauli(params: PauliNoiseParams, rho: DensityOperator) -> DensityOperator:
    """Random-Pauli map sum_k q_k sigma_k rho sigma_k (unital)."""
    if rho.dimension != 2:
        raise ValidationError("Pauli noise acts on qubit inputs")
    out = np.zeros((2, 2), dtype=complex)
    for q, sigma in zip(params.as_array(), PAULIS):
        if q:
            out += q * (sigma @ rho.matrix @ sigma)
    return DensityOperator(out)


def binary_entropy(x):
    """h(x) = -x log2 x - (1-x) log2 (1-x), with h(0) = h(1) = 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValidationError("binary_entropy argument outside [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(arr > 0, arr * np.log2(np.where(arr > 0, arr, 1.0)), 0.0)
        y = 1.0 - arr
        h -= np.where(y > 0, y * np.log2(np.where(y > 0, y, 1.0)), 0.0)
    return float(h) if np.isscalar(x) or arr.ndim == 0 else h


def von_neumann_entropy(rho: DensityOperator) -> float:
    """S(rho) = -Tr(rho log2 rho) in bits."""
    eigs = np.linalg.eigvalsh(rho.matrix)
    if eigs[0] < -EIG_TOL:
        raise ValidationError(f"negative eigenvalue {eigs[0]!r}")
    eigs = np.clip(eigs, 0.0, None)
    nz = eigs[eigs > 0]
    return float(-(nz * np.log2(nz)).sum())


def holevo_chi_unital(params: PauliNoiseParams) -> float:
    """Holevo information of a Pauli (unital qubit) channel in bits.

    Attained by two orthogonal pure states on the least-contracted Bloch axis
    with uniform prior: chi = 1 - h((1 + lambda_max) / 2).
    """
    return 1.0 - binary_entropy(0.5 * (1.0 + params.lambda_max))


@dataclass(frozen=True)
class NoiseSpec:
    """Per-state qubit noise: erasure probabilities or Pauli weights.

    ``table`` covers states 0..len(table)-1; any state beyond falls back to
    ``tail`` (default: full noise), which is how saturated truncations treat
    the clipped high states.
    """

    kind: str  # "erasure" | "depolarizing" | "pauli"
    table: np.ndarray
    tail: object = 1.0

    def __post_init__(self):
        if self.kind not in ("erasure", "depolarizing", "pauli"):
            raise ValidationError(f"unknown noise kind {self.kind!r}")
        table = np.asarray(self.table, dtype=float)
        object.__setattr__(self, "table", table)
        if self.kind == "pauli":
            if table.ndim != 2 or table.shape[1] != 4:
                raise ValidationError("pauli table must have shape (n_states, 4)")
            for row in table:
                PauliNoiseParams(*row)
            tail = np.asarray(self.tail, dtype=float)
            if tail.shape != (4,):
                raise ValidationError("pauli tail must be a 4-vector of weights")
            PauliNoiseParams(*tail)
            object.__setattr__(self, "tail", tail)
        else:
            if table.ndim != 1:
                raise ValidationError("probability table must be one-dimensional")
            if np.any(table < 0) or np.any(table > 1):
                raise ValidationError("noise probabilities must lie in [0, 1]")
            if not 0.0 <= float(self.tail) <= 1.0:
                raise ValidationError("tail probability must lie in [0, 1]")
            object.__setattr__(self, "tail", float(self.tail))

    def p(self, s: int) -> float:
        """Erasure / depolarizing probability of state s (tail beyond the table)."""
        if self.kind == "pauli":
            raise ValidationError("pauli noise has no scalar probability")
        return float(self.table[s]) if s < self.table.shape[0] else self.tail

    def pauli_params(self, s: int) -> PauliNoiseParams:
        if self.kind == "erasure":
            raise ValidationError("erasure noise is not a Pauli channel")
        if self.kind == "depolarizing":
            return PauliNoiseParams.depolarizing(self.p(s))
        row = self.table[s] if s < self.table.shape[0] else self.tail
        return PauliNoiseParams(*row)

    @classmethod
    def erasure(cls, table, tail: float = 1.0) -> "NoiseSpec":
        return cls("erasure", np.asarray(table, dtype=float), tail)

    @classmethod
    def depolarizing(cls, table, tail: float = 1.0) -> "NoiseSpec":
        return cls("depolarizing", np.asarray(table, dtype=float), tail)


@dataclass(frozen=True)
class InducedLaw:
    """Classical law P(y | x, s) induced by orthogonal coding + product measurement.

    Outcome alphabet is (0, 1, e) in erasure mode and (0, 1) otherwise.
    """

    table: np.ndarray  # (n_states, 2, n_outcomes)
    mode: str  # "erasure" | "unital"
    csi: bool

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        object.__setattr__(self, "table", table)
        if table.ndim != 3 or table.shape[1] != 2:
            raise ValidationError("law table must have shape (n_states, 2, n_outcomes)")
        if np.any(np.abs(table.sum(axis=2) - 1.0) > TRACE_TOL):
            raise ValidationError("law rows must sum to 1")
        if self.mode == "erasure":
            if table.shape[2] != 3:
                raise ValidationError("erasure law needs 3 outcomes")
            if np.any(np.abs(table[:, 0, 2] - table[:, 1, 2]) > TRACE_TOL) \
                    or np.any(table[:, 0, 1] > TRACE_TOL) or np.any(table[:, 1, 0] > TRACE_TOL):
                raise ValidationError("erasure law must erase symmetrically and never flip")
        elif self.mode == "unital":
            if table.shape[2] != 2:
                raise ValidationError("unital law needs 2 outcomes")
            if np.any(np.abs(table[:, 0, 1] - table[:, 1, 0]) > TRACE_TOL):
                raise ValidationError("unital law must have a symmetric crossover")
        else:
            raise ValidationError(f"unknown law mode {self.mode!r}")
        table.setflags(write=False)

    @property
    def n_states(self) -> int:
        return self.table.shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.table.shape[2]


def induced_law(noise: NoiseSpec, csi: bool, n_states: int, axis: str = "z") -> InducedLaw:
    """Derive P(y | x, s) for states 0..n_states-1.

    Erasure: the 3-outcome projective measurement identifies the bit unless
    the flag fires, so P(x|x,s) = 1 - p(s) and P(e|.,s) = p(s).  Pauli with
    receiver CSI: antipodal coding and measurement along ``axis`` ("z" or the
    per-state "best" axis) gives a symmetric crossover; on the z axis that is
    q_X + q_Y, i.e. p/2 for depolarizing noise.
    """
    if n_states < 1:
        raise ValidationError("need at least one state")
    if noise.kind == "erasure":
        table = np.zeros((n_states, 2, 3))
        for s in range(n_states):
            p = noise.p(s)
            table[s, 0] = (1.0 - p, 0.0, p)
            table[s, 1] = (0.0, 1.0 - p, p)
        return InducedLaw(table, "erasure", csi)
    if not csi:
        raise UnsupportedModeError(
            "unital noise without receiver CSI has no known capacity; refusing to build a law"
        )
    if axis not in ("z", "best"):
        raise ValidationError(f"unknown encoding axis {axis!r}")
    table = np.zeros((n_states, 2, 2))
    for s in range(n_states):
        params = noise.pauli_params(s)
        if axis == "z":
            crossover = params.q_x + params.q_y
        else:
            crossover = 0.5 * (1.0 - params.lambda_max)
        table[s, 0] = (1.0 - crossover, crossover)
        table[s, 1] = (crossover, 1.0 - crossover)
    return InducedLaw(table, "unital", csi)


@dataclass(frozen=True)
class InducedCell:
    state: int
    x: int
    expected: np.ndarray
    empirical: np.ndarray
    ok: bool


@dataclass(frozen=True)
class InducedVerification:
    cells: tuple
    trials: int
    seed: int
    ok: bool
    failures: tuple = field(default=())


def verify_induced(noise: NoiseSpec, law: InducedLaw, trials: int, seed: int) -> InducedVerification:
    """Monte Carlo check that the analytic law matches the density-operator maps.

    For each (x, s): prepare |x><x|, push it through the actual map, sample the
    product measurement from the Born probabilities, and flag any outcome
    frequency further than 3 sigma from the law.
    """
    if trials < 10_000:
        raise ValidationError("need at least 1e4 trials for the 3-sigma gates")
    rng = np.random.default_rng(seed)
    cells = []
    failures = []
    for s in range(law.n_states):
        for x in (0, 1):
            rho = DensityOperator.basis(x)
            if noise.kind == "erasure":
                out = apply_erasure(noise.p(s), rho)
            else:
                out = apply_pauli(noise.pauli_params(s), rho)
            born = np.clip(np.diag(out.matrix).real, 0.0, None)
            born /= born.sum()
            counts = rng.multinomial(trials, born)
            emp = counts / trials
            expected = law.table[s, x]
            sigma = np.sqrt(expected * (1.0 - expected) / trials)
            ok = bool(np.all(np.abs(emp - expected) <= np.where(sigma > 0, 3 * sigma, TRACE_TOL)))
            cell = InducedCell(s, x, expected, emp, ok)
            cells.append(cell)
            if not ok:
                failures.append((s, x))
    return InducedVerification(tuple(cells), trials, seed, not failures, tuple(failures))
