"""
Statevector engine: phase (cost) unitary, clause-controlled mixer,
expectation values and seeded sampling.

Basis state k holds edge bit b in bit b of k; bit 0 means edge present.
Operators update the amplitude buffer in place and return the state.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .config import Limits, resolve_limits
from .errors import CapacityError, DimensionMismatchError, ParameterError
from .matchgraph import Edge, EdgeKind, MatchingGraph, cost_table, total_weight

logger = logging.getLogger(__name__)

# Mixer index plans are kept for graphs up to this many qubits, two graphs at a time.
PLAN_CACHE_QUBITS = 20
SUPPORT_TOL = 1e-12


class ClauseKind(str, Enum):
    PAPER_LITERAL = "paper"
    SYMMETRIC = "symmetric"


@dataclass
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.num_qubits,):
            raise DimensionMismatchError(
                f"{self.num_qubits} qubits need {1 << self.num_qubits} amplitudes, "
                f"got shape {self.amplitudes.shape}"
            )

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(num_qubits, amps)

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def support(self, tol: float = SUPPORT_TOL) -> List[int]:
        return [int(k) for k in np.nonzero(np.abs(self.amplitudes) > tol)[0]]


@dataclass
class GateLog:
    """Rotation counters with an optional plain-text gate trace."""

    rz_count: int = 0
    crx_count: int = 0
    record_trace: bool = False
    lines: List[str] = field(default_factory=list)

    def rz(self, bit: int, theta: float) -> None:
        self.rz_count += 1
        if self.record_trace:
            self.lines.append(f"RZ bit={bit} theta={theta!r}")

    def crx(self, controls: List[int], target: int, theta: float, kind: ClauseKind) -> None:
        self.crx_count += 1
        if self.record_trace:
            bits = ",".join(str(b) for b in controls)
            self.lines.append(
                f"CRX bits={bits} target={target} theta={theta!r} clause={ClauseKind(kind).value}"
            )


def _check_dims(state: StateVector, g: MatchingGraph) -> None:
    if state.num_qubits != g.num_qubits:
        raise DimensionMismatchError(
            f"state has {state.num_qubits} qubits, graph needs {g.num_qubits}"
        )


def initial_state(g: MatchingGraph, limits: Optional[Limits] = None) -> StateVector:
    """Every point on its auxiliary edge: main bits 1, auxiliary bits 0."""
    limits = resolve_limits(limits)
    if g.num_qubits > limits.qubit_cap:
        raise CapacityError(f"graph has {g.num_qubits} qubits, simulator cap is {limits.qubit_cap}")
    return StateVector.basis(g.num_qubits, g.initial_index)


# ---- control clauses ----


def _guard_mask(g: MatchingGraph, e: Edge) -> int:
    """Auxiliary edges of a main edge's endpoints."""
    mask = 1 << g.aux_y_bit(e.j)
    if not g.variant.is_dcp:
        mask |= 1 << g.aux_x_bit(e.i)
    return mask


def _neighbour_mask(g: MatchingGraph, e: Edge) -> int:
    if e.kind == EdgeKind.MAIN:
        return (g.row_mask(e.i) | g.col_mask(e.j)) & ~e.mask
    if e.kind == EdgeKind.AUX_X:
        return g.row_mask(e.i)
    return g.col_mask(e.j)


def _clause_mask(g: MatchingGraph, e: Edge, idx: np.ndarray, kind: ClauseKind) -> np.ndarray:
    neighbours = _neighbour_mask(g, e)
    target_bit = (idx >> e.bit_index) & 1
    if e.kind == EdgeKind.MAIN:
        ok = (idx & neighbours) == neighbours
        if kind == ClauseKind.SYMMETRIC:
            ok &= (idx & _guard_mask(g, e)) == 0
        else:
            ok &= target_bit == 1
        return ok
    ok = (idx & neighbours) != neighbours
    if kind == ClauseKind.PAPER_LITERAL:
        ok &= target_bit == 0
    return ok


def clause_value(g: MatchingGraph, e: Edge, s: int, kind: ClauseKind = ClauseKind.SYMMETRIC) -> int:
    """
    Control clause of edge e on basis state s.

    Symmetric: a main edge (i, j) may move iff no other main edge of row i
    or column j is present and the auxiliary edges of x_i and y_j are
    present; AuxX(i) / AuxY(j) may move iff some main edge of row i /
    column j is present. The target bit is never read.

    Literal: the same neighbour conditions without the auxiliary
    guard, and a main edge must be absent (an auxiliary edge present) to
    qualify.
    """
    idx = np.array([s], dtype=np.int64)
    return int(_clause_mask(g, e, idx, ClauseKind(kind))[0])


def clause_controls(g: MatchingGraph, e: Edge) -> List[int]:
    """Bits a symmetric clause reads."""
    mask = _neighbour_mask(g, e)
    if e.kind == EdgeKind.MAIN:
        mask |= _guard_mask(g, e)
    return [b for b in range(g.num_qubits) if (mask >> b) & 1]


def mixer_order(g: MatchingGraph) -> List[Edge]:
    """Main edges row-major, then AuxY ascending, then AuxX ascending."""
    mains = [e for e in g.edges if e.kind == EdgeKind.MAIN]
    aux_y = [e for e in g.edges if e.kind == EdgeKind.AUX_Y]
    aux_x = [e for e in g.edges if e.kind == EdgeKind.AUX_X]
    return mains + aux_y + aux_x


def _plan_iter(g: MatchingGraph) -> Iterator[Tuple[Edge, np.ndarray]]:
    idx = np.arange(g.dim, dtype=np.int64)
    for e in mixer_order(g):
        low = ((idx >> e.bit_index) & 1) == 0
        yield e, idx[low & _clause_mask(g, e, idx, ClauseKind.SYMMETRIC)]


@lru_cache(maxsize=2)
def _cached_plan(g: MatchingGraph) -> Tuple[Tuple[Edge, np.ndarray], ...]:
    return tuple(_plan_iter(g))


def mixer_pairs(g: MatchingGraph):
    """(edge, lows) in mixer order; lows are the bit-0 halves of the rotated pairs."""
    if g.num_qubits <= PLAN_CACHE_QUBITS:
        return _cached_plan(g)
    return _plan_iter(g)


def _rotate(amps: np.ndarray, lows: np.ndarray, mask: int, beta: float) -> None:
    if lows.size == 0:
        return
    highs = lows | mask
    c, s = math.cos(beta / 2.0), math.sin(beta / 2.0)
    a = amps[lows]
    b = amps[highs]
    amps[lows] = c * a - 1j * s * b
    amps[highs] = -1j * s * a + c * b


# ---- operators ----


def apply_cost_unitary(
    state: StateVector,
    g: MatchingGraph,
    gamma: float,
    scale: float = 1.0,
    log: Optional[GateLog] = None,
) -> StateVector:
    """
    Diagonal phase exp(i (gamma*scale/2) sum_e w_e z_e), z_e = +1 when edge e
    is present and -1 otherwise. This is the product of RZ(-gamma*scale*w_e).
    """
    _check_dims(state, g)
    zsum = 2.0 * cost_table(g) - total_weight(g)
    if gamma != 0.0:
        state.amplitudes *= np.exp(0.5j * gamma * scale * zsum)
    if log is not None:
        for e in g.edges:
            log.rz(e.bit_index, -gamma * scale * e.weight)
    return state


def apply_mixer(
    state: StateVector,
    g: MatchingGraph,
    beta: float,
    log: Optional[GateLog] = None,
) -> StateVector:
    """
    Ordered product of clause-controlled rotations exp(-i beta/2 X_e).

    Every pair (s, s with bit e set) whose symmetric clause holds is
    rotated; other amplitudes are left alone.
    """
    _check_dims(state, g)
    amps = state.amplitudes
    for e, lows in mixer_pairs(g):
        if beta != 0.0:
            _rotate(amps, lows, e.mask, beta)
        if log is not None:
            log.crx(clause_controls(g, e), e.bit_index, beta, ClauseKind.SYMMETRIC)
    return state


def apply_mixer_batch(block: np.ndarray, g: MatchingGraph, beta: float) -> np.ndarray:
    """apply_mixer on every column of a (2^num_qubits, k) amplitude block."""
    if block.shape[0] != g.dim:
        raise DimensionMismatchError(f"block has {block.shape[0]} rows, graph needs {g.dim}")
    for e, lows in mixer_pairs(g):
        _rotate(block, lows, e.mask, beta)
    return block


@dataclass(frozen=True)
class MixerLevel:
    """State support after one more individual mixing rotation."""

    edge: Optional[str]
    support: Tuple[Tuple[int, complex], ...]


def mixer_levels(g: MatchingGraph, beta: float, limits: Optional[Limits] = None) -> List[MixerLevel]:
    """
    Construction tree of the first mixer as data.

    Level 0 is the initial state; level k is the support, with amplitudes,
    after the k-th individual rotation in mixer order.
    """
    state = initial_state(g, limits)
    amps = state.amplitudes

    def snapshot(label: Optional[str]) -> MixerLevel:
        support = tuple((k, complex(amps[k])) for k in state.support())
        return MixerLevel(label, support)

    levels = [snapshot(None)]
    for e, lows in mixer_pairs(g):
        _rotate(amps, lows, e.mask, beta)
        levels.append(snapshot(e.label))
    return levels


def expected_cost(state: StateVector, g: MatchingGraph) -> float:
    """E[C] = sum_s |amp_s|^2 cost(s)."""
    _check_dims(state, g)
    return float(np.dot(state.probabilities(), cost_table(g)))


def expected_gain(state: StateVector, g: MatchingGraph) -> float:
    """Expectation of the maximised objective, total weight minus E[C]."""
    return total_weight(g) - expected_cost(state, g)


def sample_measurements(state: StateVector, shots: int, seed: int = 0) -> Dict[int, int]:
    """
    Multinomial measurement counts drawn with numpy's PCG64 generator.

    Returns:
        dict: {basis index: count} for observed states, ascending index

    Raises:
        ParameterError: If shots < 1
    """
    if shots < 1:
        raise ParameterError(f"shots must be positive, got {shots}")
    probs = state.probabilities()
    probs = probs / probs.sum()
    rng = np.random.Generator(np.random.PCG64(seed))
    counts = rng.multinomial(shots, probs)
    observed = np.nonzero(counts)[0]
    logger.debug("sampled %d shots over %d states", shots, observed.size)
    return {int(k): int(counts[k]) for k in observed}
