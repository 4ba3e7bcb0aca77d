"""
Feasibility and optimality properties of the mixer, checked on one instance.

Used by the `verify` subcommand and by the test suite.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import Limits, resolve_limits
from .exact import (
    bijection_oracle_cost,
    brute_force_optimum,
    enumerate_feasible,
    exact_distance,
    injection_oracle_cost,
    strict_optimum,
)
from .matchgraph import FeasibilityMode, MatchingGraph, feasibility_mask
from .qsim import apply_mixer, apply_mixer_batch, initial_state, mixer_pairs

logger = logging.getLogger(__name__)

DEFAULT_BETAS = (0.3, 0.7, 1.9)
LEAK_TOL = 1e-12
SUPPORT_TOL = 1e-9
ORACLE_TOL = 1e-9
BATCH_COLUMNS = 64


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"property": self.name, "passed": self.passed, "detail": self.detail}


def pair_closure_violations(g: MatchingGraph) -> List[Tuple[str, int]]:
    """
    Rotated pairs that connect a relaxed-feasible state with an infeasible one.

    Returns:
        list: (edge label, low state index) per offending pair; empty when
        every individual rotation maps the feasible subspace onto itself
    """
    feasible = feasibility_mask(g, FeasibilityMode.RELAXED)
    bad: List[Tuple[str, int]] = []
    for e, lows in mixer_pairs(g):
        mismatch = feasible[lows] != feasible[lows | e.mask]
        bad.extend((e.label, int(s)) for s in lows[mismatch])
    return bad


def _check_mixer_feasibility(g: MatchingGraph, states: List[int], betas: Sequence[float]) -> PropertyResult:
    infeasible = ~feasibility_mask(g, FeasibilityMode.RELAXED)
    worst = 0.0
    for beta in betas:
        for start in range(0, len(states), BATCH_COLUMNS):
            chunk = states[start : start + BATCH_COLUMNS]
            block = np.zeros((g.dim, len(chunk)), dtype=np.complex128)
            block[chunk, np.arange(len(chunk))] = 1.0
            apply_mixer_batch(block, g, beta)
            if infeasible.any():
                worst = max(worst, float(np.abs(block[infeasible]).max()))
    return PropertyResult(
        "mixer-feasibility",
        worst < LEAK_TOL,
        f"{len(states)} feasible starts x {len(betas)} angles, max leaked amplitude {worst:.3g}",
    )


def _check_mixer_completeness(
    g: MatchingGraph, states: List[int], betas: Sequence[float], limits: Limits
) -> PropertyResult:
    feasible = np.zeros(g.dim, dtype=bool)
    feasible[states] = True
    problems = []
    for beta in betas:
        amps = np.abs(apply_mixer(initial_state(g, limits), g, beta).amplitudes)
        weakest = float(amps[feasible].min()) if feasible.any() else 1.0
        leaked = float(amps[~feasible].max()) if (~feasible).any() else 0.0
        if weakest <= SUPPORT_TOL or leaked >= LEAK_TOL:
            problems.append(f"beta={beta}: min feasible {weakest:.3g}, max leaked {leaked:.3g}")
    detail = "; ".join(problems) or f"support equals the {len(states)} relaxed-feasible states"
    return PropertyResult("mixer-completeness", not problems, detail)


def _check_relaxed_minimum(g: MatchingGraph, limits: Limits) -> PropertyResult:
    relaxed, _ = brute_force_optimum(g, limits)
    strict, _ = strict_optimum(g, limits)
    return PropertyResult(
        "relaxed-minimum",
        relaxed == strict,
        f"strict minimum {strict!r}, relaxed minimum {relaxed!r}",
    )


def _check_solver_agreement(g: MatchingGraph, limits: Limits) -> PropertyResult:
    brute, _ = brute_force_optimum(g, limits)
    hungarian = exact_distance(g.d1, g.d2, g.variant).optimal_cost
    if g.variant.is_dcp:
        oracle = injection_oracle_cost(g.d1, g.d2, g.variant)
    else:
        oracle = bijection_oracle_cost(g.d1, g.d2, g.variant)
    ok = abs(brute - hungarian) <= ORACLE_TOL and abs(brute - oracle) <= ORACLE_TOL
    return PropertyResult(
        "solver-agreement",
        ok,
        f"graph minimum {brute:.12g}, assignment {hungarian:.12g}, enumeration {oracle:.12g}",
    )


def run_property_checks(
    g: MatchingGraph,
    betas: Sequence[float] = DEFAULT_BETAS,
    limits: Optional[Limits] = None,
) -> List[PropertyResult]:
    """
    Run the four instance properties.

    mixer-feasibility: the mixer never leaves the relaxed-feasible set from
    any relaxed-feasible basis state. mixer-completeness: from the initial
    state it reaches every relaxed-feasible state and nothing else.
    relaxed-minimum: strict and relaxed minima are equal. solver-agreement:
    graph minimum, assignment solver and direct enumeration agree.
    """
    limits = resolve_limits(limits)
    states = enumerate_feasible(g, FeasibilityMode.RELAXED, limits)
    results = [
        _check_mixer_feasibility(g, states, betas),
        _check_mixer_completeness(g, states, betas, limits),
        _check_relaxed_minimum(g, limits),
        _check_solver_agreement(g, limits),
    ]
    for r in results:
        logger.info("%s: %s (%s)", r.name, "pass" if r.passed else "FAIL", r.detail)
    return results
