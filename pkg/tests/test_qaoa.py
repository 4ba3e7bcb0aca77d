"""Tests for the variational loop, decoding and the sampled distance report."""

import math

import pytest

from pdqdist.config import Limits
from pdqdist.errors import CapacityError, ParameterError
from pdqdist.exact import brute_force_optimum, enumerate_feasible, exact_distance
from pdqdist.filtration import reference_diagrams
from pdqdist.matchgraph import Variant, bits_string, build_graph, state_from_bits
from pdqdist.qaoa import (
    QaoaParams,
    Strategy,
    decode_matching,
    estimate_distance,
    optimize_angles,
    run_layers,
    weight_scale_for,
)
from pdqdist.qsim import GateLog, expected_cost

from .test_matchgraph import WASSERSTEIN_E1_STATES


def test_params_vector_layout():
    p = QaoaParams(0.1, ((0.2, 0.3), (0.4, 0.5)), 0.25)
    assert p.as_vector().tolist() == [0.1, 0.2, 0.3, 0.4, 0.5]
    assert QaoaParams.from_vector(p.as_vector(), 0.25) == p
    assert p.to_dict()["layers"][1] == {"gamma": 0.4, "beta": 0.5}


def test_weight_scale(w_graph):
    assert weight_scale_for(w_graph) == pytest.approx(0.25)


def test_zero_layers_support_is_feasible_set(w_graph):
    state = run_layers(w_graph, QaoaParams(beta0=0.7))
    assert sorted(bits_string(w_graph, s) for s in state.support(1e-9)) == sorted(WASSERSTEIN_E1_STATES)


def test_layers_stay_feasible(w_graph):
    """Phase and mixer layers never move amplitude out of the feasible set."""
    params = QaoaParams(0.7, ((1.1, 0.4), (2.3, 1.9)), weight_scale_for(w_graph))
    state = run_layers(w_graph, params)
    assert set(state.support(1e-12)) <= set(enumerate_feasible(w_graph))
    assert state.norm() == pytest.approx(1.0)


def test_grid_optimum_is_grid_minimum(w_graph):
    """The returned angles are at least as good as every grid point evaluated."""
    params, trace = optimize_angles(w_graph, num_layers=1, grid_resolution=8)
    assert len(trace) == 8**3
    best = expected_cost(run_layers(w_graph, params), w_graph)
    assert all(best <= c + 1e-12 for _, c in trace)


def test_grid_is_deterministic(dcp_graph):
    a, _ = optimize_angles(dcp_graph, grid_resolution=6, seed=1)
    b, _ = optimize_angles(dcp_graph, grid_resolution=6, seed=99)
    assert a == b


def test_nelder_mead_never_regresses(random_pair):
    d1, d2 = random_pair(2, 2, 4)
    g = build_graph(d1, d2, Variant.wasserstein())
    grid, _ = optimize_angles(g, grid_resolution=4)
    refined, _ = optimize_angles(g, strategy=Strategy.GRID_THEN_NELDER_MEAD, grid_resolution=4)
    assert expected_cost(run_layers(g, refined), g) <= expected_cost(run_layers(g, grid), g) + 1e-12


def test_optimize_rejects_bad_arguments(w_graph):
    with pytest.raises(ParameterError):
        optimize_angles(w_graph, grid_resolution=1)
    with pytest.raises(ParameterError):
        optimize_angles(w_graph, num_layers=-1)
    with pytest.raises(CapacityError):
        optimize_angles(w_graph, num_layers=2, grid_resolution=16, limits=Limits(max_grid_points=1000))


def test_decode_optimal_wasserstein_state(w_graph):
    """The optimal state is x1<->y1 with y2 on the diagonal."""
    m = decode_matching(w_graph, state_from_bits(w_graph, "01110"))
    assert m.pairs == ((0, 0),)
    assert m.unmatched_x == ()
    assert m.unmatched_y == (1,)
    assert m.strict and m.relaxed


def test_decode_dcp_states(dcp_graph):
    m = decode_matching(dcp_graph, state_from_bits(dcp_graph, "0110"))
    assert m.pairs == ((0, 0),)
    assert m.unmatched_y == (1,)
    assert m.strict
    start = decode_matching(dcp_graph, dcp_graph.initial_index)
    assert start.pairs == ()
    assert start.unmatched_x == (0,)
    assert start.unmatched_y == (0, 1)


def test_decode_infeasible_state(w_graph):
    m = decode_matching(w_graph, 0)
    assert not m.relaxed and not m.strict


def test_e1_wasserstein_report(e1_d1, e1_d2, wasserstein):
    """One layer recovers the exact distance and the optimal matching is most frequent."""
    r = estimate_distance(e1_d1, e1_d2, wasserstein, num_layers=1, shots=10000, seed=0, with_exact=True)
    assert r.best.distance == pytest.approx(1.5, abs=1e-9)
    assert r.best.distance == pytest.approx(r.exact.distance, abs=1e-9)
    assert r.most_frequent.bits == "01110"
    assert sum(h.count for h in r.histogram) == 10000
    assert r.qubits == 5
    assert r.rotations_per_operator == 5
    assert r.crx_count == 2 * 5
    assert r.rz_count == 5


def test_e1_dcp_report(e1_d1, e1_d2, dcp):
    r = estimate_distance(e1_d1, e1_d2, dcp, num_layers=1, shots=10000, seed=0)
    assert r.best.distance == pytest.approx(math.sqrt(0.02), abs=1e-9)
    assert r.most_frequent.bits == "0110"
    assert r.best.matching.pairs == ((0, 0),)
    assert r.exact is None


def test_report_with_fixed_params(w_graph, e1_d1, e1_d2, wasserstein):
    """Given angles skip optimisation; sampled relaxed costs never beat the optimum."""
    params = QaoaParams(0.7, ((0.5, 0.9),), weight_scale_for(w_graph))
    r = estimate_distance(e1_d1, e1_d2, wasserstein, shots=2000, seed=3, params=params, record_trace=True)
    assert r.params == params
    optimum, _ = brute_force_optimum(w_graph)
    assert all(h.cost >= optimum - 1e-12 for h in r.histogram if h.relaxed)
    assert len(r.gate_trace) == r.rz_count + r.crx_count
    assert r.least_frequent_feasible.count <= r.most_frequent.count


def test_report_to_dict_keys(e1_d1, e1_d2, dcp):
    r = estimate_distance(e1_d1, e1_d2, dcp, shots=100, grid_resolution=4, with_exact=True)
    d = r.to_dict()
    assert {"variant", "n", "m", "params", "expected_cost", "best", "most_frequent", "histogram", "resources"} <= set(d)
    assert d["resources"]["qubits"] == 4
    assert d["exact"]["distance"] == pytest.approx(exact_distance(e1_d1, e1_d2, dcp).distance)
    assert sum(h["count"] for h in d["histogram"]) == 100
    assert d["params"]["weight_scale"] == pytest.approx(0.25)


def test_swapped_dcp_report(e1_d1, e1_d2, dcp):
    """n and m stay in caller order; the flag says the layout exchanged them."""
    r = estimate_distance(e1_d2, e1_d1, dcp, shots=100, grid_resolution=4)
    d = r.to_dict()
    assert d["swapped"] is True
    assert (d["n"], d["m"]) == (2, 1)
    assert d["resources"]["qubits"] == 1 * 2 + 2
    assert estimate_distance(e1_d1, e1_d2, dcp, shots=100, grid_resolution=4).to_dict()["swapped"] is False


@pytest.mark.parametrize("layers", [0, 1, 2])
@pytest.mark.parametrize("n, m", [(1, 1), (1, 2), (2, 1), (2, 2), (2, 3), (3, 3), (0, 2)])
def test_resource_counts(random_pair, n, m, layers):
    """One clause-controlled rotation per edge per mixer, one phase rotation per edge per layer."""
    d1, d2 = random_pair(n, m, 7 * n + m)
    for variant, per_operator in (
        (Variant.wasserstein(), n * m + n + m),
        (Variant.dcp(0.3), n * m + max(n, m)),
    ):
        g = build_graph(d1, d2, variant)
        assert g.num_qubits == per_operator
        params = QaoaParams(0.4, ((0.3, 1.1),) * layers, weight_scale_for(g))
        log = GateLog()
        run_layers(g, params, log=log)
        assert log.crx_count == (layers + 1) * per_operator
        assert log.rz_count == layers * per_operator


# Odd, so beta = pi is not a grid angle and the optimised circuit keeps a
# suboptimal tail in its histogram.
ODD_GRID_RESOLUTION = 31


@pytest.fixture(scope="module")
def reference():
    return reference_diagrams()


@pytest.mark.slow
@pytest.mark.parametrize("variant", [Variant.wasserstein(), Variant.dcp(0.2)])
def test_clean_reference_pair_most_frequent_is_optimal(reference, variant):
    """Small circle against small and large circle: x1<->y1, y2 unmatched."""
    d1, d2 = reference["clean-one-circle"], reference["clean-two-circles"]
    assert (len(d1), len(d2)) == (1, 2)
    r = estimate_distance(d1, d2, variant, num_layers=1, shots=10000, seed=0, with_exact=True)
    g = build_graph(d1, d2, variant)
    optimum, state = brute_force_optimum(g)
    assert r.most_frequent.index == state
    assert r.most_frequent.cost == pytest.approx(optimum)
    m = decode_matching(g, r.most_frequent.index)
    assert m.pairs == ((0, 0),)
    assert m.unmatched_y == (1,)
    assert r.best.distance == pytest.approx(r.exact.distance, abs=1e-9)


@pytest.mark.slow
def test_noisy_reference_pair_dcp_finds_optimum(reference):
    """The most frequent sample is the optimum; the least frequent one is not."""
    d1, d2 = reference["noisy-one-circle"], reference["noisy-two-circles"]
    assert (len(d1), len(d2)) == (2, 3)
    variant = Variant.dcp(0.2)
    r = estimate_distance(
        d1, d2, variant, num_layers=1, shots=10000, seed=0, grid_resolution=ODD_GRID_RESOLUTION
    )
    g = build_graph(d1, d2, variant)
    optimum, state = brute_force_optimum(g)
    assert r.most_frequent.index == state
    assert r.most_frequent.cost == pytest.approx(optimum)
    assert decode_matching(g, state).pairs == ((0, 0), (1, 1))
    assert r.least_frequent_feasible is not None
    assert r.least_frequent_feasible.cost > optimum + 1e-9


@pytest.mark.slow
def test_noisy_reference_pair_wasserstein_is_reported(reference):
    d1, d2 = reference["noisy-one-circle"], reference["noisy-two-circles"]
    variant = Variant.wasserstein()
    r = estimate_distance(d1, d2, variant, num_layers=1, shots=10000, seed=0, with_exact=True)
    optimum, _ = brute_force_optimum(build_graph(d1, d2, variant))
    assert r.qubits == 2 * 3 + 2 + 3
    assert optimum == pytest.approx(r.exact.optimal_cost)
    assert r.best.cost >= optimum - 1e-9
    assert r.best.distance >= r.exact.distance - 1e-9
