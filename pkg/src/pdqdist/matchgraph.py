"""
Weighted matching graphs between two persistence diagrams.

Qubit layout: Main(i, j) -> i*m + j, then AuxX(i) -> n*m + i (Wasserstein
only), then AuxY(j) -> n*m + n + j (Wasserstein) or n*m + j (Dcp).
A bit value of 0 means the edge is present.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from .config import Limits, resolve_limits
from .diagrams import PersistenceDiagram, diagonal_distance, lq_distance
from .errors import CapacityError, ParameterError

logger = logging.getLogger(__name__)

# A basis state index, or an array of them for the vectorised predicates.
StateIndex = Union[int, np.ndarray]


class VariantKind(str, Enum):
    WASSERSTEIN = "wasserstein"
    DCP = "dcp"


@dataclass(frozen=True)
class Variant:
    """Distance variant with its parameters; c is set iff kind is DCP."""

    kind: VariantKind = VariantKind.WASSERSTEIN
    p: float = 2.0
    q: float = math.inf
    c: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", VariantKind(self.kind))
        if not self.p >= 1:
            raise ParameterError(f"p must be >= 1, got {self.p}")
        if not self.q >= 1:
            raise ParameterError(f"q must be >= 1 or inf, got {self.q}")
        if self.kind == VariantKind.DCP:
            if self.c is None or not self.c > 0:
                raise ParameterError(f"the dcp variant needs c > 0, got {self.c}")
        elif self.c is not None:
            raise ParameterError("c is only meaningful for the dcp variant")

    @classmethod
    def wasserstein(cls, p: float = 2.0, q: float = math.inf) -> "Variant":
        return cls(VariantKind.WASSERSTEIN, p, q)

    @classmethod
    def dcp(cls, c: float, p: float = 2.0, q: float = math.inf) -> "Variant":
        return cls(VariantKind.DCP, p, q, c)

    @property
    def is_dcp(self) -> bool:
        return self.kind == VariantKind.DCP

    def to_dict(self) -> Dict[str, Any]:
        d: Dict[str, Any] = {"kind": self.kind.value, "p": self.p, "q": _q_out(self.q)}
        if self.is_dcp:
            d["c"] = self.c
        return d

    def distance_from_cost(self, cost: float, m: int) -> float:
        """Post-process a matching cost: cost^(1/p), or (cost/m)^(1/p) for dcp."""
        cost = max(cost, 0.0)
        if self.is_dcp:
            if m == 0:
                return 0.0
            cost = cost / m
        return cost ** (1.0 / self.p)


def _q_out(q: float) -> Union[float, str]:
    return "inf" if math.isinf(q) else q


class EdgeKind(str, Enum):
    MAIN = "main"
    AUX_X = "aux_x"
    AUX_Y = "aux_y"


@dataclass(frozen=True)
class Edge:
    kind: EdgeKind
    weight: float
    bit_index: int
    i: Optional[int] = None
    j: Optional[int] = None

    @property
    def label(self) -> str:
        if self.kind == EdgeKind.MAIN:
            return f"Main({self.i},{self.j})"
        if self.kind == EdgeKind.AUX_X:
            return f"AuxX({self.i})"
        return f"AuxY({self.j})"

    @property
    def mask(self) -> int:
        return 1 << self.bit_index


@dataclass(frozen=True)
class Matching:
    """
    Which points pair up and which go to an auxiliary vertex.

    unmatched_x/unmatched_y are the points sent to the diagonal (Wasserstein)
    or, for dcp, the free points of the smaller diagram and the penalized
    points of the larger one. swapped is set when the smaller diagram is the
    caller's second one, so x indices then refer to that diagram.
    """

    pairs: Tuple[Tuple[int, int], ...] = ()
    unmatched_x: Tuple[int, ...] = ()
    unmatched_y: Tuple[int, ...] = ()
    strict: bool = True
    relaxed: bool = True
    swapped: bool = False

    def to_dict(self, kind: VariantKind = VariantKind.WASSERSTEIN) -> Dict[str, Any]:
        d: Dict[str, Any] = {"pairs": [list(p) for p in self.pairs]}
        if VariantKind(kind) == VariantKind.DCP:
            d["unmatched_x"] = list(self.unmatched_x)
            d["penalized_y"] = list(self.unmatched_y)
        else:
            d["diagonal_x"] = list(self.unmatched_x)
            d["diagonal_y"] = list(self.unmatched_y)
        d["strict"] = self.strict
        d["relaxed"] = self.relaxed
        d["swapped"] = self.swapped
        return d

    def describe(self, kind: VariantKind = VariantKind.WASSERSTEIN) -> str:
        parts = [f"x{i + 1}<->y{j + 1}" for i, j in self.pairs]
        if VariantKind(kind) == VariantKind.DCP:
            parts += [f"y{j + 1} penalized" for j in self.unmatched_y]
        else:
            parts += [f"x{i + 1}->diagonal" for i in self.unmatched_x]
            parts += [f"y{j + 1}->diagonal" for j in self.unmatched_y]
        return "; ".join(parts) if parts else "(empty)"


@dataclass(frozen=True)
class MatchingGraph:
    """
    Matching graph of two diagrams for one variant.

    For dcp the smaller diagram is always d1; swapped records whether the
    caller's inputs were exchanged to get there.
    """

    variant: Variant
    d1: PersistenceDiagram
    d2: PersistenceDiagram
    edges: Tuple[Edge, ...]
    swapped: bool = False

    @property
    def n(self) -> int:
        return len(self.d1)

    @property
    def m(self) -> int:
        return len(self.d2)

    @property
    def num_qubits(self) -> int:
        return len(self.edges)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def main_bit(self, i: int, j: int) -> int:
        return i * self.m + j

    def aux_x_bit(self, i: int) -> Optional[int]:
        if self.variant.is_dcp:
            return None
        return self.n * self.m + i

    def aux_y_bit(self, j: int) -> int:
        if self.variant.is_dcp:
            return self.n * self.m + j
        return self.n * self.m + self.n + j

    def row_mask(self, i: int) -> int:
        """Bits of the main edges leaving x_i."""
        return sum(1 << self.main_bit(i, j) for j in range(self.m))

    def col_mask(self, j: int) -> int:
        """Bits of the main edges reaching y_j."""
        return sum(1 << self.main_bit(i, j) for i in range(self.n))

    @property
    def main_mask(self) -> int:
        return (1 << (self.n * self.m)) - 1

    @property
    def initial_index(self) -> int:
        """All main edges absent, all auxiliary edges present."""
        return self.main_mask

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([e.weight for e in self.edges], dtype=float)

    @cached_property
    def costs(self) -> np.ndarray:
        idx = np.arange(self.dim, dtype=np.int64)
        out = np.zeros(self.dim, dtype=float)
        for e in self.edges:
            out += e.weight * (1 - ((idx >> e.bit_index) & 1))
        return out


def build_graph(
    d1: PersistenceDiagram,
    d2: PersistenceDiagram,
    variant: Variant,
    limits: Optional[Limits] = None,
) -> MatchingGraph:
    """
    Build the matching graph with the documented bit layout and edge weights.

    Main(i, j) weighs ||x_i - y_j||_q^p. AuxX(i) weighs ||x_i - P x_i||_q^p.
    AuxY(j) weighs ||P y_j - y_j||_q^p for Wasserstein and c^p for dcp.
    A dcp graph swaps its inputs when |d1| > |d2|.

    Raises:
        CapacityError: If the graph needs more qubits than limits.qubit_cap
    """
    limits = resolve_limits(limits)
    swapped = False
    if variant.is_dcp and len(d1) > len(d2):
        d1, d2 = d2, d1
        swapped = True
    n, m = len(d1), len(d2)
    num_qubits = n * m + m + (0 if variant.is_dcp else n)
    if num_qubits > limits.qubit_cap:
        raise CapacityError(
            f"graph needs {num_qubits} qubits (n={n}, m={m}), cap is {limits.qubit_cap}"
        )

    p, q = variant.p, variant.q
    edges: List[Edge] = []
    for i, x in enumerate(d1):
        for j, y in enumerate(d2):
            edges.append(Edge(EdgeKind.MAIN, lq_distance(x, y, q) ** p, i * m + j, i, j))
    if not variant.is_dcp:
        for i, x in enumerate(d1):
            edges.append(Edge(EdgeKind.AUX_X, diagonal_distance(x, q) ** p, n * m + i, i=i))
    base = n * m + (0 if variant.is_dcp else n)
    for j, y in enumerate(d2):
        w = variant.c**p if variant.is_dcp else diagonal_distance(y, q) ** p
        edges.append(Edge(EdgeKind.AUX_Y, w, base + j, j=j))

    g = MatchingGraph(variant, d1, d2, tuple(edges), swapped)
    logger.debug(
        "built %s graph: n=%d m=%d qubits=%d swapped=%s",
        variant.kind.value, n, m, g.num_qubits, swapped,
    )
    return g


def total_weight(g: MatchingGraph) -> float:
    return float(sum(e.weight for e in g.edges))


def _present(s: StateIndex, bit: int):
    """1 where the edge on `bit` is present, else 0 (int or int array)."""
    return 1 - ((s >> bit) & 1)


def state_cost(g: MatchingGraph, s: int) -> float:
    """Sum of the weights of the present edges."""
    return float(sum(e.weight for e in g.edges if not (s >> e.bit_index) & 1))


def cost_table(g: MatchingGraph) -> np.ndarray:
    """state_cost for every basis state, indexed by state; cached on the graph."""
    return g.costs


class FeasibilityMode(str, Enum):
    STRICT = "strict"
    RELAXED = "relaxed"


def _feasible(g: MatchingGraph, s: StateIndex, mode: FeasibilityMode):
    strict = FeasibilityMode(mode) == FeasibilityMode.STRICT
    ok = True
    for i in range(g.n):
        mains = sum(_present(s, g.main_bit(i, j)) for j in range(g.m))
        if g.variant.is_dcp:
            ok = ok & (mains <= 1)
            continue
        total = mains + _present(s, g.aux_x_bit(i))
        ok = ok & ((total == 1) if strict else ((mains <= 1) & (total >= 1)))
    for j in range(g.m):
        mains = sum(_present(s, g.main_bit(i, j)) for i in range(g.n))
        total = mains + _present(s, g.aux_y_bit(j))
        ok = ok & ((total == 1) if strict else ((mains <= 1) & (total >= 1)))
    return ok


def check_feasibility(g: MatchingGraph, s: int, mode: FeasibilityMode = FeasibilityMode.STRICT) -> bool:
    """
    Strict: every point has exactly one present edge (dcp: points of the
    first diagram have at most one main edge). Relaxed: at most one main edge
    per point and every point covered (dcp: only the second diagram's points
    need cover).
    """
    return bool(_feasible(g, int(s), mode))


def feasibility_mask(g: MatchingGraph, mode: FeasibilityMode) -> np.ndarray:
    """check_feasibility evaluated on every basis state at once."""
    idx = np.arange(g.dim, dtype=np.int64)
    ok = _feasible(g, idx, mode)
    if isinstance(ok, bool):
        return np.full(g.dim, ok)
    return np.asarray(ok, dtype=bool)


def bits_string(g: MatchingGraph, s: int) -> str:
    """0/1 string of a basis state, bit_index 0 first."""
    return "".join(str((s >> k) & 1) for k in range(g.num_qubits))


def state_from_bits(g: MatchingGraph, bits: Union[str, Iterable[int]]) -> int:
    values = [int(b) for b in bits]
    if len(values) != g.num_qubits or any(v not in (0, 1) for v in values):
        raise ParameterError(f"expected {g.num_qubits} bits of 0/1, got {bits!r}")
    return sum(v << k for k, v in enumerate(values))


def graph_to_dict(g: MatchingGraph) -> Dict[str, Any]:
    edges = []
    for e in g.edges:
        if e.kind == EdgeKind.MAIN:
            endpoints = {"x": e.i, "y": e.j}
        elif e.kind == EdgeKind.AUX_X:
            endpoints = {"x": e.i, "aux": "diagonal"}
        else:
            endpoints = {"y": e.j, "aux": "penalty" if g.variant.is_dcp else "diagonal"}
        edges.append(
            {
                "kind": e.kind.value,
                "label": e.label,
                "endpoints": endpoints,
                "weight": e.weight,
                "bit_index": e.bit_index,
            }
        )
    return {
        "variant": g.variant.to_dict(),
        "n": g.n,
        "m": g.m,
        "num_qubits": g.num_qubits,
        "swapped": g.swapped,
        "edges": edges,
    }
