"""Finite and countable-state Markov chains: stationary laws, truncation, structure.

Countable chains are described by a row generator and reduced to finite chains
by north-west corner truncation with an augmentation rule that redistributes
the clipped mass.  The structural checks cover the standard sufficient
conditions under which the truncated stationary laws converge to the countable
one (Hessenberg support, a Doeblin column, stochastic-monotone domination).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import StructuralError, ValidationError

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-10
DIST_SUM_TOL = 1e-9

AUGMENTATIONS = ("last-column", "linear", "identity-diagonal")

_DIRECT_SOLVE_MAX = 2000


class FiniteMarkovChain:
    """A row-stochastic transition matrix over states 0..size-1.

    Immutable after construction; the stationary distribution is computed
    lazily and cached.
    """

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValidationError(f"transition matrix must be square, got {matrix.shape}")
        if np.any(matrix < -ROW_SUM_TOL) or np.any(matrix > 1 + ROW_SUM_TOL):
            raise ValidationError("transition probabilities must lie in [0, 1]")
        sums = matrix.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
        if bad.size:
            raise ValidationError(
                f"row {bad[0]} sums to {sums[bad[0]]!r}, not 1 within {ROW_SUM_TOL}"
            )
        self._matrix = matrix
        self._matrix.setflags(write=False)
        self._stationary: Optional[np.ndarray] = None

    @classmethod
    def from_rows(cls, size: int, rows: Sequence[Sequence[tuple[int, float]]]) -> "FiniteMarkovChain":
        """Build from per-state lists of (target, probability) pairs."""
        matrix = np.zeros((size, size))
        for s, row in enumerate(rows):
            for j, p in row:
                matrix[s, j] += p
        return cls(matrix)

    @property
    def size(self) -> int:
        return self._matrix.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def stationary(self) -> Optional[np.ndarray]:
        """Cached stationary distribution, or None if not yet computed."""
        return self._stationary

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteMarkovChain) and np.array_equal(self._matrix, other._matrix)

    def __repr__(self) -> str:
        return f"FiniteMarkovChain(size={self.size})"


@dataclass(frozen=True)
class CountableChainSpec:
    """Generator-style description of a countable-state chain.

    ``row_fn(s)`` returns the finitely supported transition row of state ``s``
    as a mapping from target state to probability.  ``structural_tags`` are
    claims about the support pattern; they are not trusted until
    :func:`check_structure` confirms them.  ``harris_asserted`` records a user
    assertion that the drift/minorization conditions hold; it is documentation
    only and never checked algorithmically.
    """

    row_fn: Callable[[int], Mapping[int, float]]
    structural_tags: frozenset = frozenset()
    truncation_hint: Optional[int] = None
    dominating_row_fn: Optional[Callable[[int], Mapping[int, float]]] = None
    harris_asserted: bool = False

    def row(self, s: int) -> dict[int, float]:
        row = dict(self.row_fn(s))
        total = math.fsum(row.values())
        if abs(total - 1.0) > ROW_SUM_TOL:
            raise ValidationError(f"spec row {s} sums to {total!r}, not 1 within {ROW_SUM_TOL}")
        if any(p < 0 for p in row.values()):
            raise ValidationError(f"spec row {s} has a negative probability")
        return row

    @classmethod
    def from_finite(cls, chain: FiniteMarkovChain, **kwargs) -> "CountableChainSpec":
        """View an already-finite chain as a countable spec (rows beyond the
        last state are absorbing self-loops, which truncation never reaches
        when level >= size - 1)."""
        size = chain.size
        matrix = chain.matrix

        def row_fn(s: int) -> dict[int, float]:
            if s < size:
                return {j: matrix[s, j] for j in range(size) if matrix[s, j] > 0.0}
            return {s: 1.0}

        return cls(row_fn=row_fn, **kwargs)


@dataclass(frozen=True)
class StructureReport:
    """Verdicts for the sufficient truncation-convergence structures."""

    upper_hessenberg: bool
    lower_hessenberg: bool
    doeblin_row: bool
    monotone_dominated: bool
    verified_up_to: int
    doeblin_delta: float = 0.0
    doeblin_column: Optional[int] = None
    dominating_matrix: Optional[str] = None
    notes: dict = field(default_factory=dict)

    @property
    def any_structure(self) -> bool:
        return self.upper_hessenberg or self.lower_hessenberg or self.doeblin_row \
            or self.monotone_dominated


def _support_graph(matrix: np.ndarray) -> csr_matrix:
    return csr_matrix(matrix > 0.0)


def _period(matrix: np.ndarray) -> int:
    """Period of an irreducible chain: gcd of (level[u] + 1 - level[v]) over
    all support edges, with levels from a BFS of the support graph."""
    size = matrix.shape[0]
    level = np.full(size, -1, dtype=int)
    level[0] = 0
    queue = [0]
    adj = [np.flatnonzero(matrix[s] > 0.0) for s in range(size)]
    while queue:
        u = queue.pop()
        for v in adj[u]:
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(int(v))
    g = 0
    for u in range(size):
        for v in adj[u]:
            g = math.gcd(g, level[u] + 1 - level[v])
    return abs(g) if g else 1


def assert_ergodic(chain: FiniteMarkovChain) -> None:
    """Raise StructuralError unless the chain is irreducible and aperiodic."""
    n_comp, labels = connected_components(_support_graph(chain.matrix), connection="strong")
    if n_comp > 1:
        first_off = int(np.flatnonzero(labels != labels[0])[0])
        raise StructuralError(
            f"chain is reducible: state {first_off} is not in the same "
            f"communicating class as state 0 ({n_comp} classes)"
        )
    d = _period(chain.matrix)
    if d != 1:
        raise StructuralError(f"chain is periodic with period {d}")


def _power_iteration(matrix: np.ndarray, tol: float = 1e-12, max_iter: int = 200000) -> np.ndarray:
    size = matrix.shape[0]
    pi = np.full(size, 1.0 / size)
    prev = prev2 = None
    for _ in range(max_iter):
        nxt = pi @ matrix
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() < tol:
            return nxt
        # Aitken delta-squared acceleration on the iterate sequence
        if prev2 is not None:
            d1 = prev - prev2
            d2 = nxt - 2 * prev + prev2
            mask = np.abs(d2) > 1e-300
            acc = nxt.copy()
            acc[mask] = prev2[mask] - d1[mask] ** 2 / d2[mask]
            if np.all(acc >= 0) and acc.sum() > 0:
                acc /= acc.sum()
                if np.abs(acc @ matrix - acc).sum() < np.abs(nxt @ matrix - nxt).sum():
                    nxt = acc
        prev2, prev, pi = prev, pi, nxt
    raise StructuralError("power iteration failed to converge")


def stationary_distribution(chain: FiniteMarkovChain) -> np.ndarray:
    """Stationary distribution pi with pi K = pi, sum 1, all entries > 0.

    Direct linear solve for moderate sizes, accelerated power iteration
    beyond; the result is cached on the chain.
    """
    if chain.stationary is not None:
        return chain.stationary
    assert_ergodic(chain)
    size = chain.size
    if size == 1:
        pi = np.array([1.0])
    elif size <= _DIRECT_SOLVE_MAX:
        a = chain.matrix.T - np.eye(size)
        a[-1, :] = 1.0
        b = np.zeros(size)
        b[-1] = 1.0
        pi = np.linalg.solve(a, b)
    else:
        pi = _power_iteration(chain.matrix)
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    resid = np.abs(pi @ chain.matrix - pi).sum()
    if resid > STATIONARY_TOL:
        raise StructuralError(f"stationary residual {resid} exceeds {STATIONARY_TOL}")
    pi.setflags(write=False)
    chain._stationary = pi
    return pi


def truncate_chain(
    spec: CountableChainSpec | FiniteMarkovChain,
    level: int,
    augmentation: str = "last-column",
) -> FiniteMarkovChain:
    """North-west corner truncation to states 0..level, re-stochasticized.

    Mass clipped from each row is redistributed per the augmentation rule:
    ``last-column`` sends it all to state ``level``, ``linear`` spreads it
    proportionally over the surviving row, ``identity-diagonal`` returns it to
    the row's own state.  Every rule only adds mass, so the result dominates
    the raw corner block element-wise.
    """
    if isinstance(spec, FiniteMarkovChain):
        spec = CountableChainSpec.from_finite(spec)
    if level < 0:
        raise ValidationError("truncation level must be >= 0")
    if augmentation not in AUGMENTATIONS:
        raise ValidationError(f"unknown augmentation {augmentation!r}; choose from {AUGMENTATIONS}")
    if level == 0:
        return FiniteMarkovChain(np.array([[1.0]]))
    size = level + 1
    matrix = np.zeros((size, size))
    for s in range(size):
        row = spec.row(s)
        kept = {j: p for j, p in row.items() if j <= level}
        kept_sum = math.fsum(kept.values())
        lost = 1.0 - kept_sum
        for j, p in kept.items():
            matrix[s, j] = p
        if lost <= 0.0:
            continue
        if kept_sum == 0.0:
            warnings.warn(
                f"row {s} keeps no mass at level {level}; sending it all to state {level}",
                stacklevel=2,
            )
            matrix[s, level] = 1.0
        elif augmentation == "last-column":
            matrix[s, level] += lost
        elif augmentation == "identity-diagonal":
            matrix[s, s] += lost
        else:  # linear
            matrix[s, :] /= kept_sum
    # exact re-stochasticization against float drift
    matrix /= matrix.sum(axis=1, keepdims=True)
    return FiniteMarkovChain(matrix)


def check_structure(spec: CountableChainSpec, up_to: int) -> StructureReport:
    """Verify the sufficient support structures on states 0..up_to.

    Absent evidence yields a False verdict with an explanatory note, never an
    error.
    """
    if up_to < 1:
        raise ValidationError("up_to must be >= 1")
    rows = [spec.row(s) for s in range(up_to + 1)]
    notes: dict = {}

    upper = True  # k_{ss'} = 0 whenever s > s' + 1 (drop by at most 1)
    lower = True  # k_{ss'} = 0 whenever s' > s + 1 (climb by at most 1)
    for s, row in enumerate(rows):
        for j, p in row.items():
            if p <= 0.0:
                continue
            if s > j + 1:
                if upper:
                    notes["upper_hessenberg"] = f"violated by k[{s},{j}] > 0"
                upper = False
            if j > s + 1:
                if lower:
                    notes["lower_hessenberg"] = f"violated by k[{s},{j}] > 0"
                lower = False

    columns = set()
    for row in rows:
        columns.update(row.keys())
    doeblin_delta, doeblin_col = 0.0, None
    for j in sorted(columns):
        delta = min(row.get(j, 0.0) for row in rows)
        if delta > doeblin_delta:
            doeblin_delta, doeblin_col = delta, j
    doeblin = doeblin_delta > 0.0
    if not doeblin:
        notes["doeblin_row"] = "no column is uniformly positive over the checked states"

    monotone = False
    dom_desc = None
    if spec.dominating_row_fn is not None:
        dom_rows = [dict(spec.dominating_row_fn(s)) for s in range(up_to + 1)]
        dom_desc = f"user-supplied dominating matrix checked on states 0..{up_to}"
        monotone = True
        for m in range(up_to + 1):
            tails = [math.fsum(p for j, p in row.items() if j > m) for row in dom_rows]
            if any(tails[s] > tails[s + 1] + ROW_SUM_TOL for s in range(up_to)):
                monotone = False
                notes["monotone_dominated"] = f"dominating matrix not stochastically monotone at tail level {m}"
                break
            k_tails = [math.fsum(p for j, p in row.items() if j > m) for row in rows]
            if any(tails[s] + ROW_SUM_TOL < k_tails[s] for s in range(up_to + 1)):
                monotone = False
                notes["monotone_dominated"] = f"dominating matrix does not dominate the chain at tail level {m}"
                break
    else:
        notes["monotone_dominated"] = "no dominating matrix supplied"

    return StructureReport(
        upper_hessenberg=upper,
        lower_hessenberg=lower,
        doeblin_row=doeblin,
        monotone_dominated=monotone,
        verified_up_to=up_to,
        doeblin_delta=doeblin_delta,
        doeblin_column=doeblin_col,
        dominating_matrix=dom_desc,
        notes=notes,
    )


def l1_distance(p: np.ndarray, q: np.ndarray) -> float:
    """L1 distance between two probability vectors, zero-padding the shorter."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    for name, v in (("p", p), ("q", q)):
        if abs(v.sum() - 1.0) > DIST_SUM_TOL:
            raise ValidationError(f"{name} sums to {v.sum()!r}, not 1 within {DIST_SUM_TOL}")
    size = max(p.size, q.size)
    pp = np.zeros(size)
    qq = np.zeros(size)
    pp[: p.size] = p
    qq[: q.size] = q
    return float(np.abs(pp - qq).sum())


def sample_path(chain: FiniteMarkovChain, length: int, seed) -> np.ndarray:
    """Stationary state path: S_1 ~ pi, S_{i+1} ~ row(S_i), reproducible by seed."""
    if length < 1:
        raise ValidationError("path length must be >= 1")
    pi = stationary_distribution(chain)
    from ._backend import sample_states  # deferred: avoids import cycle at build time

    cum_rows = np.cumsum(chain.matrix, axis=1)
    init_cum = np.cumsum(pi)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    uniforms = rng.random(length)
    return sample_states(cum_rows, init_cum, uniforms)


def ge_chain(k01: float, k10: float) -> FiniteMarkovChain:
    """Two-state chain with flip probabilities k01, k10 (both strictly inside (0,1))."""
    for name, k in (("k01", k01), ("k10", k10)):
        if not 0.0 < k < 1.0:
            raise StructuralError(f"{name}={k} leaves the two-state chain reducible or periodic")
    return FiniteMarkovChain(np.array([[1.0 - k01, k01], [k10, 1.0 - k10]]))


def mm1_arrival_spec(lam: float, mu: float) -> CountableChainSpec:
    """Arrival-epoch queue-length chain of an M/M/1 queue (Lindley embedding).

    From state i the next arrival sees j <= i + 1; exactly m service
    completions fit in one interarrival window with probability
    (lam / (lam + mu)) * (mu / (lam + mu))**m.  Stationary law (for lam < mu)
    is geometric with ratio lam / mu by PASTA.
    """
    if lam <= 0 or mu <= 0:
        raise ValidationError("rates must be positive")
    if lam >= mu:
        raise StructuralError(f"queue unstable: lambda={lam} >= mu={mu}")
    a = lam / (lam + mu)
    r = mu / (lam + mu)

    def row_fn(i: int) -> dict[int, float]:
        row = {}
        for j in range(i + 1, 0, -1):
            row[j] = a * r ** (i + 1 - j)
        row[0] = max(0.0, 1.0 - math.fsum(row.values()))  # clamp float dust
        return row

    return CountableChainSpec(
        row_fn=row_fn,
        structural_tags=frozenset({"lower-hessenberg"}),
        truncation_hint=60,
        harris_asserted=True,
    )


def geometric_pmf(ratio: float, size: int) -> np.ndarray:
    """First ``size`` terms of the geometric law (1 - ratio) * ratio**k."""
    k = np.arange(size)
    return (1.0 - ratio) * ratio ** k
