"""Tests for the statevector engine."""

import cmath
import math

import numpy as np
import pytest

from pdqdist.config import Limits
from pdqdist.errors import CapacityError, DimensionMismatchError, ParameterError
from pdqdist.exact import enumerate_feasible
from pdqdist.matchgraph import EdgeKind, bits_string, state_from_bits
from pdqdist.qsim import (
    ClauseKind,
    GateLog,
    StateVector,
    apply_cost_unitary,
    apply_mixer,
    clause_controls,
    clause_value,
    expected_cost,
    expected_gain,
    initial_state,
    mixer_levels,
    mixer_order,
    sample_measurements,
)

from .test_matchgraph import WASSERSTEIN_E1_STATES, DCP_E1_STATES


def _uniform(g, bits):
    amps = np.zeros(g.dim, dtype=complex)
    for b in bits:
        amps[state_from_bits(g, b)] = 1.0
    return StateVector(g.num_qubits, amps / np.linalg.norm(amps))


def test_initial_state_bits(w_graph, dcp_graph):
    """All main edges absent, all auxiliary edges present."""
    assert initial_state(w_graph).support() == [state_from_bits(w_graph, "11000")]
    assert initial_state(dcp_graph).support() == [state_from_bits(dcp_graph, "1100")]


def test_initial_state_respects_cap(w_graph):
    with pytest.raises(CapacityError):
        initial_state(w_graph, Limits(qubit_cap=4))


def test_state_vector_shape_check():
    with pytest.raises(DimensionMismatchError):
        StateVector(2, np.zeros(3))


def test_mixer_order(w_graph):
    assert [e.label for e in mixer_order(w_graph)] == [
        "Main(0,0)",
        "Main(0,1)",
        "AuxY(0)",
        "AuxY(1)",
        "AuxX(0)",
    ]


def test_symmetric_clause_on_initial_state(w_graph):
    """From the initial state every main edge may move, no auxiliary edge may."""
    s = w_graph.initial_index
    values = {e.label: clause_value(w_graph, e, s) for e in w_graph.edges}
    assert values == {"Main(0,0)": 1, "Main(0,1)": 1, "AuxX(0)": 0, "AuxY(0)": 0, "AuxY(1)": 0}


def test_symmetric_clause_ignores_target_bit(w_graph):
    for e in w_graph.edges:
        for s in range(w_graph.dim):
            assert clause_value(w_graph, e, s) == clause_value(w_graph, e, s ^ e.mask)


def test_literal_clause_reads_target_bit(w_graph):
    """The literal clause only lets absent main edges and present auxiliary edges move."""
    main = w_graph.edges[0]
    optimal = state_from_bits(w_graph, "01110")
    assert clause_value(w_graph, main, optimal, ClauseKind.PAPER_LITERAL) == 0
    assert clause_value(w_graph, main, optimal ^ main.mask, ClauseKind.PAPER_LITERAL) == 1


def test_clause_controls(w_graph):
    """Main(0,0) reads Main(0,1), AuxX(0) and AuxY(0)."""
    assert clause_controls(w_graph, w_graph.edges[0]) == [1, 2, 3]
    aux_y1 = [e for e in w_graph.edges if e.kind == EdgeKind.AUX_Y][1]
    assert clause_controls(w_graph, aux_y1) == [1]


def test_first_main_rotation(w_graph):
    """U_M,Main(0,0)(beta) on the initial state: cos|initial> - i sin|Main(0,0) added>."""
    beta = 0.7
    level = mixer_levels(w_graph, beta)[1]
    amps = dict(level.support)
    assert level.edge == "Main(0,0)"
    assert amps[state_from_bits(w_graph, "11000")] == pytest.approx(math.cos(beta / 2))
    assert amps[state_from_bits(w_graph, "01000")] == pytest.approx(-1j * math.sin(beta / 2))


@pytest.mark.parametrize("graph, table", [("w_graph", WASSERSTEIN_E1_STATES), ("dcp_graph", DCP_E1_STATES)])
def test_mixer_support_is_feasible_set(request, graph, table):
    """One mixer from the initial state reaches exactly the relaxed-feasible states."""
    g = request.getfixturevalue(graph)
    state = apply_mixer(initial_state(g), g, 0.7)
    assert sorted(bits_string(g, s) for s in state.support(1e-9)) == sorted(table)
    assert state.support(1e-9) == enumerate_feasible(g)
    assert state.norm() == pytest.approx(1.0)


def test_tree_leaves_match_mixer(w_graph):
    beta = 0.7
    levels = mixer_levels(w_graph, beta)
    assert len(levels) == 1 + w_graph.num_qubits
    direct = apply_mixer(initial_state(w_graph), w_graph, beta).amplitudes
    for k, amp in levels[-1].support:
        assert amp == pytest.approx(direct[k])


def test_mixer_at_pi_lands_on_optimum(w_graph):
    """With beta = pi every rotation is a full swap, ending on x1<->y1, y2->diagonal."""
    state = apply_mixer(initial_state(w_graph), w_graph, math.pi)
    probs = state.probabilities()
    assert probs[state_from_bits(w_graph, "01110")] == pytest.approx(1.0)


def test_mixer_is_unitary_on_any_state(w_graph):
    rng = np.random.Generator(np.random.PCG64(2))
    amps = rng.normal(size=w_graph.dim) + 1j * rng.normal(size=w_graph.dim)
    state = StateVector(w_graph.num_qubits, amps / np.linalg.norm(amps))
    apply_mixer(state, w_graph, 1.3)
    assert state.norm() == pytest.approx(1.0)


def test_cost_unitary_relative_phase(w_graph):
    """Phase between the initial and optimal states is exp(i pi/4 (z(start) - z(optimum)))."""
    state = _uniform(w_graph, WASSERSTEIN_E1_STATES)
    s0, s7 = state_from_bits(w_graph, "11000"), state_from_bits(w_graph, "01110")
    apply_cost_unitary(state, w_graph, math.pi / 2)
    weights = [e.weight for e in w_graph.edges]

    def zsum(s):
        return sum(w * (1 if not (s >> k) & 1 else -1) for k, w in enumerate(weights))

    ratio = state.amplitudes[s0] / state.amplitudes[s7]
    assert ratio == pytest.approx(cmath.exp(1j * math.pi / 4 * (zsum(s0) - zsum(s7))))
    assert state.norm() == pytest.approx(1.0)


def test_cost_unitary_leaves_probabilities(w_graph):
    state = _uniform(w_graph, WASSERSTEIN_E1_STATES)
    before = state.probabilities().copy()
    apply_cost_unitary(state, w_graph, 1.1, scale=0.5)
    assert np.allclose(state.probabilities(), before)


def test_gate_log_counts_and_trace(w_graph):
    log = GateLog(record_trace=True)
    state = initial_state(w_graph)
    apply_mixer(state, w_graph, 0.5, log)
    apply_cost_unitary(state, w_graph, 0.25, log=log)
    assert log.crx_count == w_graph.num_qubits
    assert log.rz_count == w_graph.num_qubits
    assert log.lines[0].startswith("CRX bits=1,2,3 target=0 ")
    assert log.lines[-1].startswith("RZ bit=4 ")


def test_dimension_mismatch(w_graph, dcp_graph):
    with pytest.raises(DimensionMismatchError):
        apply_mixer(initial_state(dcp_graph), w_graph, 0.3)


def test_expected_cost_of_initial_state(w_graph):
    state = initial_state(w_graph)
    assert expected_cost(state, w_graph) == pytest.approx(2.75)
    assert expected_gain(state, w_graph) == pytest.approx(6.75 - 2.75)


def test_sampling_two_state_superposition():
    state = StateVector(1, np.array([1.0, 1.0]) / math.sqrt(2.0))
    counts = sample_measurements(state, 10000, seed=7)
    assert sum(counts.values()) == 10000
    for k in (0, 1):
        assert abs(counts[k] - 5000) <= 3 * math.sqrt(2500)


def test_sampling_is_seeded_and_tracks_amplitudes(w_graph):
    state = apply_mixer(initial_state(w_graph), w_graph, 0.7)
    a = sample_measurements(state, 10000, seed=42)
    assert a == sample_measurements(state, 10000, seed=42)
    probs = state.probabilities()
    for k, c in a.items():
        assert abs(c / 10000 - probs[k]) < 0.02
    assert set(a) <= set(enumerate_feasible(w_graph))


def test_sampling_rejects_no_shots(w_graph):
    with pytest.raises(ParameterError):
        sample_measurements(initial_state(w_graph), 0)


def _random_state(rng, g):
    amps = rng.normal(size=g.dim) + 1j * rng.normal(size=g.dim)
    return StateVector(g.num_qubits, amps / np.linalg.norm(amps))


@pytest.mark.parametrize("a, b", [(0.3, 1.7), (-2.1, 0.9), (math.pi, 0.05)])
def test_cost_unitary_commutes_with_itself(w_graph, dcp_graph, a, b):
    rng = np.random.Generator(np.random.PCG64(11))
    for g in (w_graph, dcp_graph):
        start = _random_state(rng, g)
        ab = apply_cost_unitary(apply_cost_unitary(start.copy(), g, a), g, b)
        ba = apply_cost_unitary(apply_cost_unitary(start.copy(), g, b), g, a)
        assert np.allclose(ab.amplitudes, ba.amplitudes, rtol=0.0, atol=1e-10)


def test_operators_preserve_norm_over_random_trials(w_graph, dcp_graph):
    """1000 random (state, angle) draws, alternating graphs and operators."""
    rng = np.random.Generator(np.random.PCG64(1000))
    for trial in range(1000):
        g = w_graph if trial % 2 == 0 else dcp_graph
        state = _random_state(rng, g)
        angle = rng.uniform(-2.0 * math.pi, 2.0 * math.pi)
        if (trial // 2) % 2 == 0:
            apply_mixer(state, g, angle)
        else:
            apply_cost_unitary(state, g, angle, scale=rng.uniform(0.1, 2.0))
        assert abs(state.norm() - 1.0) <= 1e-10
