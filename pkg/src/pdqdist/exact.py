"""
Classical reference solvers.

Hungarian assignment for both distances, constructive enumeration of the
feasible basis states of a matching graph, and brute-force optima used as
oracles in the tests and the `verify` subcommand.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import Limits, resolve_limits
from .diagrams import PersistenceDiagram, diagonal_distance, lq_distance
from .errors import CapacityError, InfeasibleAssignmentError, ParameterError
from .matchgraph import (
    FeasibilityMode,
    Matching,
    MatchingGraph,
    Variant,
    check_feasibility,
    cost_table,
)

logger = logging.getLogger(__name__)

FORBIDDEN = math.inf
TIE_TOL = 1e-9


@dataclass(frozen=True)
class Assignment:
    pairs: Tuple[Tuple[int, int], ...]
    total_cost: float


@dataclass(frozen=True)
class ExactResult:
    """Exact distance with the optimal matching cost and the matching itself."""

    distance: float
    optimal_cost: float
    matching: Matching
    variant: Variant
    n: int
    m: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "distance": self.distance,
            "optimal_cost": self.optimal_cost,
            "matching": self.matching.to_dict(self.variant.kind),
            "variant": self.variant.to_dict(),
            "n": self.n,
            "m": self.m,
        }


# ---- assignment ----


def _solve(cost: np.ndarray) -> Tuple[np.ndarray, float]:
    if cost.shape[0] == 0:
        return np.zeros(0, dtype=int), 0.0
    rows, cols = linear_sum_assignment(cost)
    return cols[np.argsort(rows)], float(cost[rows, cols].sum())


def hungarian_assign(cost, lexicographic: bool = True) -> Assignment:
    """
    Assign every row to a distinct column at minimum total cost.

    Args:
        cost: rows x columns matrix, rows <= columns; math.inf marks a
            forbidden cell
        lexicographic: Among optimal assignments return the one whose column
            sequence (row 0 first) is lexicographically smallest

    Returns:
        Assignment: (row, column) pairs ordered by row, and their total

    Raises:
        ParameterError: More rows than columns, or NaN entries
        InfeasibleAssignmentError: No assignment avoids the forbidden cells
    """
    c = np.array(cost, dtype=float, ndmin=2)
    if c.size == 0:
        return Assignment((), 0.0)
    n_rows, n_cols = c.shape
    if n_rows > n_cols:
        raise ParameterError(f"cost matrix has more rows ({n_rows}) than columns ({n_cols})")
    if np.isnan(c).any():
        raise ParameterError("cost matrix contains NaN")
    forbidden = np.isinf(c)
    if forbidden.all(axis=1).any():
        row = int(np.nonzero(forbidden.all(axis=1))[0][0])
        raise InfeasibleAssignmentError(f"row {row} has no allowed column")

    finite = c[~forbidden]
    sentinel = float(np.abs(finite).sum()) + 1.0
    work = np.where(forbidden, sentinel, c)

    cols, best = _solve(work)
    if forbidden[np.arange(n_rows), cols].any():
        raise InfeasibleAssignmentError("every assignment uses a forbidden cell")

    if lexicographic:
        cols = _lexicographic_refine(work, forbidden, cols, best)
    pairs = tuple((r, int(cols[r])) for r in range(n_rows))
    total = float(sum(c[r, k] for r, k in pairs))
    return Assignment(pairs, total)


def _lexicographic_refine(work: np.ndarray, forbidden: np.ndarray, cols: np.ndarray, best: float) -> np.ndarray:
    """Fix rows in order to the smallest column that still reaches the optimum."""
    n_rows, n_cols = work.shape
    fixed: List[int] = []
    fixed_cost = 0.0
    cols = cols.copy()
    for r in range(n_rows):
        used = set(fixed)
        for k in range(int(cols[r])):
            if k in used or forbidden[r, k]:
                continue
            rest_rows = np.arange(r + 1, n_rows)
            rest_cols = np.array([x for x in range(n_cols) if x not in used and x != k], dtype=int)
            sub_cols, sub = _solve(work[np.ix_(rest_rows, rest_cols)])
            if abs(fixed_cost + work[r, k] + sub - best) <= TIE_TOL:
                cols[r] = k
                cols[r + 1 :] = rest_cols[sub_cols]
                break
        fixed.append(int(cols[r]))
        fixed_cost += work[r, cols[r]]
    return cols


# ---- distances ----


def _wasserstein_matrix(d1: PersistenceDiagram, d2: PersistenceDiagram, p: float, q: float) -> np.ndarray:
    """
    Augmented (n+m) x (n+m) matrix.

    Rows are the points of d1 then the diagonal proxies of d2; columns are
    the points of d2 then the diagonal proxies of d1.
    """
    n, m = len(d1), len(d2)
    size = n + m
    c = np.full((size, size), FORBIDDEN)
    for i, x in enumerate(d1):
        for j, y in enumerate(d2):
            c[i, j] = lq_distance(x, y, q) ** p
        c[i, m + i] = diagonal_distance(x, q) ** p
    for j, y in enumerate(d2):
        c[n + j, j] = diagonal_distance(y, q) ** p
    c[n:, m:] = 0.0
    return c


def exact_distance(d1: PersistenceDiagram, d2: PersistenceDiagram, variant: Variant) -> ExactResult:
    """
    Distance between two diagrams through a single assignment problem.

    Wasserstein solves the augmented matrix and returns cost^(1/p).
    dcp solves the n x m problem with costs min(c, d)^p, adds c^p (m - n)
    and returns (cost / m)^(1/p); inputs are swapped when n > m.
    """
    p, q = variant.p, variant.q
    if not variant.is_dcp:
        n, m = len(d1), len(d2)
        a = hungarian_assign(_wasserstein_matrix(d1, d2, p, q))
        pairs, diag_x, diag_y = [], [], []
        for r, k in a.pairs:
            if r < n and k < m:
                pairs.append((r, k))
            elif r < n:
                diag_x.append(r)
            elif k < m:
                diag_y.append(k)
        cost = a.total_cost
        matching = Matching(tuple(pairs), tuple(diag_x), tuple(sorted(diag_y)))
        logger.debug("wasserstein assignment: %d pairs, cost %.6g", len(pairs), cost)
        return ExactResult(variant.distance_from_cost(cost, m), cost, matching, variant, n, m)

    swapped = len(d1) > len(d2)
    small, large = (d2, d1) if swapped else (d1, d2)
    n, m = len(small), len(large)
    c = variant.c
    dist = np.array([[lq_distance(x, y, q) for y in large] for x in small], dtype=float).reshape(n, m)
    a = hungarian_assign(np.minimum(dist, c) ** p)
    pairs, free_x = [], []
    taken = set()
    for r, k in a.pairs:
        if dist[r, k] <= c:
            pairs.append((r, k))
            taken.add(k)
        else:
            free_x.append(r)
    penalized = tuple(k for k in range(m) if k not in taken)
    cost = a.total_cost + c**p * (m - n)
    matching = Matching(tuple(pairs), tuple(free_x), penalized, swapped=swapped)
    logger.debug("dcp assignment: %d pairs, %d penalized, cost %.6g", len(pairs), len(penalized), cost)
    return ExactResult(variant.distance_from_cost(cost, m), cost, matching, variant, len(d1), len(d2))


def matching_cost(d1: PersistenceDiagram, d2: PersistenceDiagram, variant: Variant, matching: Matching) -> float:
    """
    Distance value of a given matching, computed from the diagrams alone.

    Wasserstein charges ||x - y||^p per pair and the diagonal distance^p per
    unmatched point. dcp charges min(c, ||x - y||)^p per pair and c^p per
    penalized point, then divides by the larger cardinality.
    """
    p, q = variant.p, variant.q
    if not variant.is_dcp:
        cost = sum(lq_distance(d1[i], d2[j], q) ** p for i, j in matching.pairs)
        cost += sum(diagonal_distance(d1[i], q) ** p for i in matching.unmatched_x)
        cost += sum(diagonal_distance(d2[j], q) ** p for j in matching.unmatched_y)
        return variant.distance_from_cost(cost, len(d2))
    if matching.swapped:
        d1, d2 = d2, d1
    c = variant.c
    cost = sum(min(c, lq_distance(d1[i], d2[j], q)) ** p for i, j in matching.pairs)
    cost += c**p * len(matching.unmatched_y)
    return variant.distance_from_cost(cost, max(len(d1), len(d2)))


# ---- enumeration oracles ----


def partial_matchings(n: int, m: int) -> Iterator[Tuple[Tuple[int, int], ...]]:
    """Every set of (i, j) pairs with distinct rows and distinct columns."""

    def extend(i: int, used: frozenset) -> Iterator[Tuple[Tuple[int, int], ...]]:
        if i == n:
            yield ()
            return
        yield from extend(i + 1, used)
        for j in range(m):
            if j not in used:
                for rest in extend(i + 1, used | {j}):
                    yield ((i, j),) + rest

    yield from extend(0, frozenset())


def _aux_choices(g: MatchingGraph, pairs: Sequence[Tuple[int, int]], mode: FeasibilityMode) -> List[List[int]]:
    """Allowed values of each auxiliary bit given the main matching."""
    strict = mode == FeasibilityMode.STRICT
    rows = {i for i, _ in pairs}
    cols = {j for _, j in pairs}
    choices: List[Tuple[int, List[int]]] = []
    if not g.variant.is_dcp:
        for i in range(g.n):
            choices.append((g.aux_x_bit(i), ([1] if strict else [0, 1]) if i in rows else [0]))
    for j in range(g.m):
        choices.append((g.aux_y_bit(j), ([1] if strict else [0, 1]) if j in cols else [0]))
    return [[v << bit for v in values] for bit, values in choices]


def _check_enum_cap(g: MatchingGraph, limits: Limits) -> None:
    if g.num_qubits > limits.enumeration_cap:
        raise CapacityError(
            f"graph has {g.num_qubits} qubits, enumeration cap is {limits.enumeration_cap}"
        )


def enumerate_feasible(
    g: MatchingGraph,
    mode: FeasibilityMode = FeasibilityMode.RELAXED,
    limits: Optional[Limits] = None,
) -> List[int]:
    """
    All feasible basis states of g, ascending.

    States are built from every partial injective main matching and the free
    auxiliary bits it allows, then checked against check_feasibility.

    Raises:
        CapacityError: Above limits.enumeration_cap qubits
    """
    limits = resolve_limits(limits)
    _check_enum_cap(g, limits)
    mode = FeasibilityMode(mode)
    states = set()
    for pairs in partial_matchings(g.n, g.m):
        main = g.main_mask
        for i, j in pairs:
            main &= ~(1 << g.main_bit(i, j))
        for aux in itertools.product(*_aux_choices(g, pairs, mode)):
            s = main | sum(aux)
            if not check_feasibility(g, s, mode):
                raise AssertionError(f"constructed state {s} fails the {mode.value} predicate")
            states.add(s)
    out = sorted(states)
    logger.debug("enumerated %d %s states on %d qubits", len(out), mode.value, g.num_qubits)
    return out


def _optimum(g: MatchingGraph, mode: FeasibilityMode, limits: Optional[Limits]) -> Tuple[float, int]:
    states = enumerate_feasible(g, mode, limits)
    costs = cost_table(g)[states]
    best = float(costs.min())
    # smallest index among the minimisers
    k = int(np.nonzero(costs <= best + 1e-12)[0][0])
    return best, states[k]


def brute_force_optimum(g: MatchingGraph, limits: Optional[Limits] = None) -> Tuple[float, int]:
    """Minimum state cost over the relaxed-feasible states and its smallest argmin."""
    return _optimum(g, FeasibilityMode.RELAXED, limits)


def strict_optimum(g: MatchingGraph, limits: Optional[Limits] = None) -> Tuple[float, int]:
    """Minimum state cost over the strict-feasible states."""
    return _optimum(g, FeasibilityMode.STRICT, limits)


def bijection_oracle_cost(d1: PersistenceDiagram, d2: PersistenceDiagram, variant: Variant) -> float:
    """
    Wasserstein matching cost by direct enumeration.

    Each point of d1 goes to a point of d2 or to its own diagonal
    projection; points of d2 left over go to the diagonal.
    """
    p, q = variant.p, variant.q
    diag_x = [diagonal_distance(x, q) ** p for x in d1]
    diag_y = [diagonal_distance(y, q) ** p for y in d2]
    best = math.inf
    for pairs in partial_matchings(len(d1), len(d2)):
        rows = {i for i, _ in pairs}
        cols = {j for _, j in pairs}
        cost = sum(lq_distance(d1[i], d2[j], q) ** p for i, j in pairs)
        cost += sum(w for i, w in enumerate(diag_x) if i not in rows)
        cost += sum(w for j, w in enumerate(diag_y) if j not in cols)
        best = min(best, cost)
    return best


def injection_oracle_cost(d1: PersistenceDiagram, d2: PersistenceDiagram, variant: Variant) -> float:
    """dcp matching cost by enumerating injections of the smaller diagram into the larger."""
    if len(d1) > len(d2):
        d1, d2 = d2, d1
    p, q, c = variant.p, variant.q, variant.c
    n, m = len(d1), len(d2)
    best = math.inf
    for image in itertools.permutations(range(m), n):
        cost = sum(min(c, lq_distance(d1[i], d2[j], q)) ** p for i, j in enumerate(image))
        best = min(best, cost)
    return best + c**p * (m - n)
