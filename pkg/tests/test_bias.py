import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from backpressure.bias import (
    UNREACHABLE,
    BiasError,
    DistanceScheme,
    compute_biases_sssp,
    converge_neighbor_updates,
    distances_for,
    estimate_duty_cycle,
    initial_table,
    load_duty_cycle,
    neighbor_update_round,
    per_hop_distances,
    save_duty_cycle,
    scale_min,
)
from backpressure.netgraph import ConflictGraph, Network, apply_mobility_step, build_conflict_graph, generate_network

from conftest import line_network


def test_edr_distance_is_mean_rate():
    net = generate_network(20, 0)
    d = per_hop_distances(net, "edr", 26.0)
    assert np.all(d == 26.0)


def test_sp_over_xr_formula():
    net = line_network(2, rate=13.0)
    assert per_hop_distances(net, "sp_over_xr", 26.0, duty_cycle=[0.5])[0] == pytest.approx(4.0)
    net = line_network(2, rate=26.0)
    assert per_hop_distances(net, "sp_over_xr", 26.0, duty_cycle=[1.0])[0] == 1.0


def test_sp_over_xr_needs_duty_cycle():
    with pytest.raises(BiasError):
        per_hop_distances(line_network(3), "sp_over_xr", 26.0)


def test_scale_min_examples():
    np.testing.assert_allclose(scale_min([2, 4, 8], 1.0, 26.0), [26, 52, 104])
    np.testing.assert_array_equal(scale_min([3.3] * 4, 1.0, 26.0), [26.0] * 4)
    with pytest.raises(BiasError):
        scale_min([], 1.0, 26.0)


@given(
    st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=40),
    st.floats(0.1, 3.0),
    st.floats(1.0, 50.0),
)
def test_scale_min_properties(delta, a, rbar):
    out = scale_min(delta, a, rbar)
    assert abs(out.min() - a * rbar) <= 1e-9 * a * rbar
    ref = scale_min(delta, 1.0, rbar)
    np.testing.assert_allclose(out / out[0], ref / ref[0], rtol=1e-9)


def test_two_node_bias():
    net = line_network(2)
    B = compute_biases_sssp(net, [5.0], [1])
    np.testing.assert_array_equal(B[:, 0], [5.0, 0.0])


def test_line_hop_pattern():
    net = line_network(4)
    rbar = 26.0
    B = compute_biases_sssp(net, np.full(3, rbar), [3])
    np.testing.assert_array_equal(B[:, 0], [3 * rbar, 2 * rbar, rbar, 0.0])


def _dijkstra_table(net, delta, commodities):
    g = nx.Graph()
    g.add_nodes_from(range(net.n_nodes))
    for (i, j), d in zip(net.links, delta):
        g.add_edge(i, j, weight=float(d))
    out = np.zeros((net.n_nodes, len(commodities)))
    for col, c in enumerate(commodities):
        dist = nx.single_source_dijkstra_path_length(g, c)
        out[:, col] = [dist[i] for i in range(net.n_nodes)]
    return out


@pytest.mark.parametrize("seed", range(5))
def test_sssp_matches_reference(seed):
    net = generate_network(20, seed)
    x = estimate_duty_cycle(build_conflict_graph(net))
    for delta in (per_hop_distances(net, "edr", net.mean_rate()), per_hop_distances(net, "sp_over_xr", net.mean_rate(), duty_cycle=x)):
        comm = list(range(20))
        B = compute_biases_sssp(net, delta, comm)
        np.testing.assert_array_equal(B, _dijkstra_table(net, delta, comm))
        # Bellman optimality at every non-destination node
        nbrs = net.neighbors()
        for col, c in enumerate(comm):
            assert B[c, col] == 0
            for i in range(20):
                if i != c:
                    assert B[i, col] == min(B[j, col] + delta[net.link_id(i, j)] for j in nbrs[i])


def test_sssp_disconnected():
    net = Network(np.zeros((3, 2)), [(0, 1)], np.array([20.0]), 1.0, 1.0)
    with pytest.raises(BiasError):
        compute_biases_sssp(net, [1.0], [0])


def test_neighbor_round_examples():
    net = line_network(3)
    B = initial_table(3, [2])
    B = neighbor_update_round(B, net, [1.0, 1.0], [2])
    assert B[1, 0] == 1 and B[0, 0] == UNREACHABLE
    B = neighbor_update_round(B, net, [1.0, 1.0], [2])
    np.testing.assert_array_equal(B[:, 0], [2, 1, 0])
    assert np.array_equal(neighbor_update_round(B, net, [1.0, 1.0], [2]), B)


def test_destination_stays_zero():
    net = line_network(3)
    B = np.array([[5.0], [7.0], [9.0]])
    assert neighbor_update_round(B, net, [1.0, 1.0], [1])[1, 0] == 0


def test_isolated_node_becomes_unreachable():
    net = Network(np.zeros((3, 2)), [(0, 1)], np.array([20.0]), 1.0, 1.0)
    B = neighbor_update_round(np.array([[3.0], [0.0], [2.0]]), net, [1.0], [1])
    assert B[2, 0] == UNREACHABLE and B[0, 0] == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_neighbor_rounds_reach_sssp(seed):
    net = generate_network(30, seed)
    delta = per_hop_distances(net, "edr", net.mean_rate())
    comm = [0, 7, 29]
    target = compute_biases_sssp(net, delta, comm)
    B, rounds = converge_neighbor_updates(initial_table(30, comm), net, delta, comm)
    assert rounds <= net.n_nodes
    np.testing.assert_array_equal(B, target)
    # re-convergence from a stale table after nodes move
    rng = np.random.default_rng(seed)
    for _ in range(3):
        net, _ = apply_mobility_step(net, 10, 0.1, rng)
        delta = per_hop_distances(net, "edr", 26.0)
        target = compute_biases_sssp(net, delta, comm)
        B, rounds = converge_neighbor_updates(B, net, delta, comm)
        assert rounds <= net.n_nodes
        np.testing.assert_array_equal(B, target)


def test_neighbor_round_respects_active_set():
    net = line_network(3)
    B = initial_table(3, [2])
    out = neighbor_update_round(B, net, [1.0, 1.0], [2], active={0})
    assert out[1, 0] == UNREACHABLE


def test_duty_cycle_heuristic():
    cg = ConflictGraph.from_edges(5, [(0, 1), (0, 2), (0, 3)])
    x = estimate_duty_cycle(cg)
    assert x[4] == 1.0 and x[0] == 0.25


def test_duty_cycle_file(tmp_path):
    net = generate_network(10, 1)
    x = np.linspace(0.1, 1.0, net.n_links)
    path = tmp_path / "duty.txt"
    save_duty_cycle(path, net, x)
    np.testing.assert_array_equal(load_duty_cycle(path, net), x)
    path.write_text("0 1 0.5\n")
    with pytest.raises(BiasError):
        load_duty_cycle(path, net)


def test_distances_for_min_scaling():
    net = generate_network(20, 2)
    x = estimate_duty_cycle(build_conflict_graph(net))
    d = distances_for(net, DistanceScheme("sp_over_xr", min_multiplier=1.0), 26.0, x)
    assert d.min() == 26.0
    assert np.all(distances_for(net, DistanceScheme("edr", min_multiplier=0.5), 26.0) == 13.0)
    assert np.all(distances_for(net, DistanceScheme(), 26.0) == 0)
