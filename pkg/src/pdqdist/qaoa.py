"""
Variational loop around the statevector engine.

Schedule: U_M(beta0) on the initial state, then per layer the phase
unitary U_g(gamma) followed by the mixer U_M(beta).
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .config import Limits, resolve_limits
from .diagrams import PersistenceDiagram
from .errors import CapacityError, ParameterError
from .exact import ExactResult, exact_distance
from .matchgraph import (
    EdgeKind,
    FeasibilityMode,
    Matching,
    MatchingGraph,
    Variant,
    bits_string,
    build_graph,
    check_feasibility,
    cost_table,
)
from .qsim import (
    GateLog,
    StateVector,
    apply_cost_unitary,
    apply_mixer,
    expected_cost,
    initial_state,
    sample_measurements,
)

logger = logging.getLogger(__name__)

IMPROVE_TOL = 1e-12
NM_XATOL = 1e-4
NM_MAXITER = 200


class Strategy(str, Enum):
    GRID = "grid"
    GRID_THEN_NELDER_MEAD = "grid_then_nelder_mead"


@dataclass(frozen=True)
class QaoaParams:
    """
    Angles of one circuit: beta0 for the initialising mixer and one
    (gamma, beta) pair per layer. weight_scale multiplies the edge weights
    inside the phase unitary.
    """

    beta0: float = 0.0
    layers: Tuple[Tuple[float, float], ...] = ()
    weight_scale: float = 1.0

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    def as_vector(self) -> np.ndarray:
        return np.array([self.beta0] + [a for pair in self.layers for a in pair], dtype=float)

    @classmethod
    def from_vector(cls, vec: Sequence[float], weight_scale: float = 1.0) -> "QaoaParams":
        vec = [float(v) for v in vec]
        layers = tuple((vec[k], vec[k + 1]) for k in range(1, len(vec), 2))
        return cls(vec[0], layers, weight_scale)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta0": self.beta0,
            "layers": [{"gamma": g, "beta": b} for g, b in self.layers],
            "weight_scale": self.weight_scale,
        }


def weight_scale_for(g: MatchingGraph) -> float:
    """1 / max edge weight, or 1 when every weight is zero."""
    wmax = max((e.weight for e in g.edges), default=0.0)
    return 1.0 / wmax if wmax > 0 else 1.0


def run_layers(
    g: MatchingGraph,
    params: QaoaParams,
    limits: Optional[Limits] = None,
    log: Optional[GateLog] = None,
) -> StateVector:
    """Final state U_M(b_L) U_g(g_L) ... U_M(b_1) U_g(g_1) U_M(beta0) |initial>."""
    state = initial_state(g, limits)
    apply_mixer(state, g, params.beta0, log)
    for gamma, beta in params.layers:
        apply_cost_unitary(state, g, gamma, params.weight_scale, log)
        apply_mixer(state, g, beta, log)
    return state


def _apply_step(state: StateVector, g: MatchingGraph, k: int, angle: float, scale: float) -> None:
    # even positions are mixer angles, odd positions phase angles
    if k % 2 == 0:
        apply_mixer(state, g, angle)
    else:
        apply_cost_unitary(state, g, angle, scale)


def _grid_search(
    g: MatchingGraph, dims: int, resolution: int, scale: float
) -> Tuple[np.ndarray, float, List[Tuple[np.ndarray, float]]]:
    """Exhaustive lexicographic grid over [0, 2pi)^dims, reusing shared prefixes."""
    angles = 2.0 * math.pi * np.arange(resolution) / resolution
    best_vec: Optional[np.ndarray] = None
    best_cost = math.inf
    trace: List[Tuple[np.ndarray, float]] = []
    prefixes: List[StateVector] = [StateVector.basis(g.num_qubits, g.initial_index)]
    current = np.zeros(dims)
    prev: Optional[Tuple[int, ...]] = None
    for point in itertools.product(range(resolution), repeat=dims):
        # first position that changed since the previous grid point
        depth = 0 if prev is None else next(k for k in range(dims) if point[k] != prev[k])
        del prefixes[depth + 1 :]
        for k in range(depth, dims):
            current[k] = angles[point[k]]
            state = prefixes[k].copy()
            _apply_step(state, g, k, current[k], scale)
            prefixes.append(state)
        prev = point
        cost = expected_cost(prefixes[-1], g)
        trace.append((current.copy(), cost))
        if cost < best_cost - IMPROVE_TOL:
            best_cost = cost
            best_vec = current.copy()
    return best_vec, best_cost, trace


def optimize_angles(
    g: MatchingGraph,
    num_layers: int = 1,
    strategy: Strategy = Strategy.GRID,
    grid_resolution: int = 16,
    seed: int = 0,
    limits: Optional[Limits] = None,
) -> Tuple[QaoaParams, List[Tuple[QaoaParams, float]]]:
    """
    Minimise the expected cost over beta0 and the layer angles.

    The grid covers every angle with grid_resolution points in [0, 2pi) and
    is walked in lexicographic order; a later point replaces the incumbent
    only if it is better by more than 1e-12. grid_then_nelder_mead refines
    the best grid point with Nelder-Mead (xatol 1e-4, 200 iterations) and
    keeps the refinement only if it does not regress. Both strategies are
    deterministic; seed is recorded for the caller.

    Returns:
        tuple: (best params, [(params, expected cost)] for every evaluation kept)

    Raises:
        ParameterError: grid_resolution < 2 or num_layers < 0
        CapacityError: The grid exceeds limits.max_grid_points or the graph
            exceeds the simulator cap
    """
    limits = resolve_limits(limits)
    strategy = Strategy(strategy)
    if grid_resolution < 2:
        raise ParameterError(f"grid_resolution must be at least 2, got {grid_resolution}")
    if num_layers < 0:
        raise ParameterError(f"num_layers must be non-negative, got {num_layers}")
    if g.num_qubits > limits.qubit_cap:
        raise CapacityError(f"graph has {g.num_qubits} qubits, simulator cap is {limits.qubit_cap}")
    dims = 1 + 2 * num_layers
    points = grid_resolution**dims
    if points > limits.max_grid_points:
        raise CapacityError(
            f"grid of {grid_resolution}^{dims} = {points} points exceeds {limits.max_grid_points}"
        )

    scale = weight_scale_for(g)
    logger.info(
        "grid search: %d points, %d layers, %d qubits, seed %d", points, num_layers, g.num_qubits, seed
    )
    best_vec, best_cost, grid_trace = _grid_search(g, dims, grid_resolution, scale)
    trace = [(QaoaParams.from_vector(v, scale), c) for v, c in grid_trace]
    logger.info("grid best expected cost %.6g at %s", best_cost, np.round(best_vec, 6).tolist())

    if strategy == Strategy.GRID_THEN_NELDER_MEAD:
        def objective(vec: np.ndarray) -> float:
            return expected_cost(run_layers(g, QaoaParams.from_vector(vec, scale), limits), g)

        step = math.pi / grid_resolution
        simplex = np.vstack([best_vec] + [best_vec + step * np.eye(dims)[k] for k in range(dims)])
        res = minimize(
            objective,
            best_vec,
            method="Nelder-Mead",
            options={
                "xatol": NM_XATOL,
                "fatol": np.inf,
                "maxiter": NM_MAXITER,
                "initial_simplex": simplex,
            },
        )
        refined = float(res.fun)
        logger.info("nelder-mead: %d iterations, expected cost %.6g", res.nit, refined)
        if refined < best_cost:
            best_vec, best_cost = np.asarray(res.x, dtype=float), refined
            trace.append((QaoaParams.from_vector(best_vec, scale), best_cost))

    return QaoaParams.from_vector(best_vec, scale), trace


def decode_matching(g: MatchingGraph, s: int) -> Matching:
    """Read a basis state as a matching, flagging its feasibility."""
    pairs: List[Tuple[int, int]] = []
    unmatched_x: List[int] = []
    unmatched_y: List[int] = []
    for e in g.edges:
        if (s >> e.bit_index) & 1:
            continue
        if e.kind == EdgeKind.MAIN:
            pairs.append((e.i, e.j))
        elif e.kind == EdgeKind.AUX_X:
            unmatched_x.append(e.i)
        else:
            unmatched_y.append(e.j)
    if g.variant.is_dcp:
        rows = {i for i, _ in pairs}
        unmatched_x = [i for i in range(g.n) if i not in rows]
    return Matching(
        tuple(pairs),
        tuple(unmatched_x),
        tuple(unmatched_y),
        strict=check_feasibility(g, s, FeasibilityMode.STRICT),
        relaxed=check_feasibility(g, s, FeasibilityMode.RELAXED),
        swapped=g.swapped,
    )


@dataclass(frozen=True)
class HistogramEntry:
    index: int
    bits: str
    count: int
    cost: float
    strict: bool
    relaxed: bool


@dataclass(frozen=True)
class SampledState:
    index: int
    bits: str
    cost: float
    distance: float
    matching: Matching


@dataclass
class DistanceReport:
    """
    Result of one sampled QAOA run, with the exact reference when requested.

    n and m follow the caller's diagram order. Bit strings and matchings
    follow the graph layout, which exchanges the diagrams when swapped is set.
    """

    variant: Variant
    n: int
    m: int
    params: QaoaParams
    expected_cost: float
    best: Optional[SampledState]
    most_frequent: HistogramEntry
    least_frequent_feasible: Optional[HistogramEntry]
    histogram: List[HistogramEntry]
    qubits: int
    rz_count: int
    crx_count: int
    rotations_per_operator: int
    seed: int = 0
    swapped: bool = False
    exact: Optional[ExactResult] = None
    gate_trace: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        kind = self.variant.kind
        best = None
        if self.best is not None:
            best = {
                "bits": self.best.bits,
                "cost": self.best.cost,
                "distance": self.best.distance,
                "matching": self.best.matching.to_dict(kind),
            }
        d: Dict[str, Any] = {
            "variant": self.variant.to_dict(),
            "n": self.n,
            "m": self.m,
            "swapped": self.swapped,
            "seed": self.seed,
            "params": self.params.to_dict(),
            "expected_cost": self.expected_cost,
            "best": best,
            "most_frequent": {"bits": self.most_frequent.bits, "count": self.most_frequent.count},
            "histogram": [{"bits": h.bits, "count": h.count} for h in self.histogram],
            "resources": {
                "qubits": self.qubits,
                "rz_count": self.rz_count,
                "crx_count": self.crx_count,
                "rotations_per_operator": self.rotations_per_operator,
            },
        }
        if self.least_frequent_feasible is not None:
            d["least_frequent"] = {
                "bits": self.least_frequent_feasible.bits,
                "count": self.least_frequent_feasible.count,
            }
        if self.exact is not None:
            d["exact"] = self.exact.to_dict()
        return d


def _histogram(g: MatchingGraph, counts: Dict[int, int]) -> List[HistogramEntry]:
    costs = cost_table(g)
    return [
        HistogramEntry(
            k,
            bits_string(g, k),
            c,
            float(costs[k]),
            check_feasibility(g, k, FeasibilityMode.STRICT),
            check_feasibility(g, k, FeasibilityMode.RELAXED),
        )
        for k, c in sorted(counts.items())
    ]


def estimate_distance(
    d1: PersistenceDiagram,
    d2: PersistenceDiagram,
    variant: Variant,
    num_layers: int = 1,
    shots: int = 10000,
    seed: int = 0,
    with_exact: bool = False,
    strategy: Strategy = Strategy.GRID,
    grid_resolution: int = 16,
    params: Optional[QaoaParams] = None,
    record_trace: bool = False,
    limits: Optional[Limits] = None,
) -> DistanceReport:
    """
    Build the graph, optimise the angles (unless params is given), run the
    circuit, sample it and decode the samples.

    best is the cheapest relaxed-feasible sampled state and its distance
    is the variant's post-processing of that cost. Ties in most_frequent
    and best go to the smallest basis index.
    """
    limits = resolve_limits(limits)
    g = build_graph(d1, d2, variant, limits)
    if params is None:
        params, _ = optimize_angles(g, num_layers, strategy, grid_resolution, seed, limits)
    log = GateLog(record_trace=record_trace)
    state = run_layers(g, params, limits, log)
    e_cost = expected_cost(state, g)
    counts = sample_measurements(state, shots, seed)
    hist = _histogram(g, counts)

    most = max(hist, key=lambda h: (h.count, -h.index))
    feasible = [h for h in hist if h.relaxed]
    least = min(feasible, key=lambda h: (h.count, h.index)) if feasible else None
    best = None
    if feasible:
        top = min(feasible, key=lambda h: (h.cost, h.index))
        best = SampledState(
            top.index,
            top.bits,
            top.cost,
            variant.distance_from_cost(top.cost, g.m),
            decode_matching(g, top.index),
        )
    logger.info(
        "sampled %d shots: %d distinct states, best cost %s",
        shots, len(hist), None if best is None else f"{best.cost:.6g}",
    )

    return DistanceReport(
        variant=variant,
        n=len(d1),
        m=len(d2),
        params=params,
        expected_cost=e_cost,
        best=best,
        most_frequent=most,
        least_frequent_feasible=least,
        histogram=hist,
        qubits=g.num_qubits,
        rz_count=log.rz_count,
        crx_count=log.crx_count,
        rotations_per_operator=len(g.edges),
        seed=seed,
        swapped=g.swapped,
        exact=exact_distance(d1, d2, variant) if with_exact else None,
        gate_trace=log.lines,
    )
