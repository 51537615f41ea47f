import math

import networkx as nx
import numpy as np
import pytest

from netrobust.core.errors import ConvergenceError, UndefinedValueError
from netrobust.core.graph_models import Graph, SparseErParams, sample_sparse_er
from netrobust.core.metrics import (
    average_path_length, connected_components, empirical_susceptibility, global_clustering,
    leading_eigenvalue, metric_report, small_world_from_stats, small_world_index,
)
from netrobust.utils.rng import make_rng


def to_networkx(g: Graph) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.edges.tolist())
    return G


def ring_lattice(n: int, k: int) -> Graph:
    edges = [(i, (i + d) % n) for i in range(n) for d in range(1, k // 2 + 1)]
    return Graph.from_edges(n, edges)


def permuted(g: Graph, seed: int) -> Graph:
    perm = make_rng(seed).permutation(g.n)
    return Graph.from_edges(g.n, perm[g.edges])


# ============================================================================
# KOMPONENTEN
# ============================================================================

def test_components_triangle_plus_isolated():
    g = Graph.from_edges(4, [[0, 1], [1, 2], [0, 2]])
    comp = connected_components(g)
    assert sorted(comp.sizes.tolist()) == [1, 3]
    assert comp.largest == 3
    assert set(comp.component_id.tolist()) == set(range(comp.count))


def test_components_empty_graph():
    comp = connected_components(Graph.empty(5))
    assert comp.sizes.tolist() == [1, 1, 1, 1, 1]


def test_subcritical_er_has_small_components():
    largest = [connected_components(sample_sparse_er(SparseErParams(1000, 0.5), s)).largest for s in range(100)]
    assert np.median(largest) < 50


def test_susceptibility():
    assert empirical_susceptibility(Graph.from_edges(3, [[0, 1]])) == pytest.approx(5 / 3)
    path = Graph.from_edges(6, [[i, i + 1] for i in range(5)])
    assert empirical_susceptibility(path) == pytest.approx(6.0)
    assert empirical_susceptibility(Graph.empty(4)) == pytest.approx(1.0)


# ============================================================================
# CLUSTERING UND PFADLÄNGEN
# ============================================================================

def test_clustering_small_graphs(triangle, path3):
    assert global_clustering(triangle) == pytest.approx(1.0)
    assert global_clustering(path3) == 0.0
    K5 = Graph.from_edges(5, [[i, j] for i in range(5) for j in range(i + 1, 5)])
    assert global_clustering(K5) == pytest.approx(1.0)
    assert global_clustering(Graph.empty(3)) == 0.0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_clustering_matches_networkx(seed):
    g = sample_sparse_er(SparseErParams(300, 8.0), seed)
    assert global_clustering(g) == pytest.approx(nx.transitivity(to_networkx(g)), abs=1e-12)
    assert global_clustering(permuted(g, seed)) == pytest.approx(global_clustering(g), abs=1e-12)


def test_path_length_small_graphs(triangle, path3):
    assert average_path_length(triangle) == pytest.approx(1.0)
    assert average_path_length(path3) == pytest.approx(4 / 3)
    assert average_path_length(Graph.from_edges(4, [[0, 1], [2, 3]])) == pytest.approx(1.0)
    with pytest.raises(UndefinedValueError):
        average_path_length(Graph.empty(4))


def test_path_length_matches_networkx_per_component():
    g = sample_sparse_er(SparseErParams(600, 1.5), seed=7)
    G = to_networkx(g)
    total, pairs = 0.0, 0
    for nodes in nx.connected_components(G):
        size = len(nodes)
        if size < 2:
            continue
        total += nx.average_shortest_path_length(G.subgraph(nodes)) * size * (size - 1)
        pairs += size * (size - 1)
    assert average_path_length(g) == pytest.approx(total / pairs, rel=1e-12)
    assert average_path_length(g) >= 1.0


# ============================================================================
# SMALL WORLD
# ============================================================================

def test_small_world_from_stats():
    assert small_world_from_stats(0.2, 3.0, 0.1, 3.0) == pytest.approx(2.0)
    with pytest.raises(UndefinedValueError):
        small_world_from_stats(0.2, 3.0, 0.0, 3.0)


def test_small_world_index_of_er_is_about_one():
    g = sample_sparse_er(SparseErParams(200, 20.0), seed=99)
    assert abs(small_world_index(g, range(20)) - 1.0) < 0.2


def test_ring_lattice_is_small_world():
    assert small_world_index(ring_lattice(100, 4), range(20)) > 1.5


# ============================================================================
# EIGENWERT
# ============================================================================

def test_leading_eigenvalue_small_graphs(triangle, path3):
    assert leading_eigenvalue(triangle) == pytest.approx(2.0, abs=1e-6)
    assert leading_eigenvalue(path3) == pytest.approx(math.sqrt(2.0), abs=1e-6)
    star = Graph.from_edges(5, [[0, i] for i in range(1, 5)])
    assert leading_eigenvalue(star) == pytest.approx(2.0, abs=1e-6)


def test_leading_eigenvalue_matches_dense_spectrum():
    g = sample_sparse_er(SparseErParams(150, 5.0), seed=21)
    dense = g.to_sparse().toarray()
    expected = np.linalg.eigvalsh(dense)[-1]
    value = leading_eigenvalue(g)
    assert value == pytest.approx(expected, rel=1e-4)
    deg = g.degrees
    assert value >= max(deg.mean(), math.sqrt(deg.max())) - 1e-6
    assert value <= deg.max() + 1e-6


def test_leading_eigenvalue_convergence_error():
    with pytest.raises(ConvergenceError) as info:
        leading_eigenvalue(ring_lattice(30, 2), tol=0.0, max_iters=3)
    assert info.value.last_iterate is not None


# ============================================================================
# REPORT
# ============================================================================

def test_metric_report_on_empty_graph():
    row = metric_report(Graph.empty(5), reference_seeds=range(2))
    assert row["m"] == 0
    assert row["C"] == 0.0
    assert math.isnan(row["L"]) and math.isnan(row["S"])
    assert row["susceptibility"] == pytest.approx(1.0)
    assert row["lcc_size"] == 1


def test_metric_report_columns(triangle):
    row = metric_report(triangle, reference_seeds=range(3))
    assert list(row) == ["n", "m", "C", "L", "S", "lambda1", "susceptibility", "lcc_size"]
