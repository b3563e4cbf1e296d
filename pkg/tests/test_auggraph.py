"""Graph construction, connectivity, diameters, bipartiteness and spectra."""

import math

import numpy as np
import pytest

from augoverlap.auggraph import (
    AugGraph,
    UnionFind,
    build_graph,
    connected_components,
    graph_stats,
    is_bipartite,
    second_eigenvalue_abs,
    subgraph_diameter,
    top_eigenpair,
)
from augoverlap.data import LabelSet, ViewSet


def _graph_from_edges(n, edges):
    return AugGraph(n=n, edges=frozenset(edges), threshold=1.0, metric="euclidean")


def _path_adj(n):
    return _graph_from_edges(n, {(i, i + 1) for i in range(n - 1)}).neighbors()


class TestUnionFind:
    def test_union_and_find(self):
        uf = UnionFind(4)
        assert uf.union(0, 1)
        assert not uf.union(1, 0)  # already joined
        uf.union(2, 3)
        assert uf.find(0) == uf.find(1)
        assert uf.find(0) != uf.find(2)


class TestBuildGraph:
    def test_euclidean_threshold(self):
        views = ViewSet(np.array([[0.0, 0.0], [1.0, 0.0]]), n=2, c=1)
        assert build_graph(views, 0.5).edges == frozenset()
        g = build_graph(views, 1.0)
        assert g.edges == frozenset({(0, 1)})
        assert g.edge_scores[(0, 1)] == pytest.approx(1.0)

    def test_min_over_view_pairs(self):
        # anchors far apart but one view pair is close
        views = ViewSet(np.array([[0.0, 0.0], [10.0, 0.0], [10.2, 0.0], [20.0, 0.0]]), n=2, c=2)
        g = build_graph(views, 0.5)
        assert g.edges == frozenset({(0, 1)})
        assert g.edge_scores[(0, 1)] == pytest.approx(0.2)

    def test_cosine_metric(self):
        views = ViewSet(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]), n=3, c=1, normalized=True)
        g = build_graph(views, 0.9, metric="cosine")
        assert g.edges == frozenset({(0, 2)})

    def test_cosine_requires_normalized(self):
        views = ViewSet(np.array([[2.0, 0.0], [0.0, 2.0]]), n=2, c=1)
        with pytest.raises(ValueError, match="normalized"):
            build_graph(views, 0.5, metric="cosine")

    def test_validation(self):
        views = ViewSet(np.ones((2, 2)), n=2, c=1)
        with pytest.raises(ValueError, match="unknown metric"):
            build_graph(views, 0.5, metric="manhattan")
        with pytest.raises(ValueError, match="> 0"):
            build_graph(views, 0.0)
        with pytest.raises(ValueError, match="cosine threshold"):
            build_graph(ViewSet(np.eye(2), n=2, c=1, normalized=True), -1.5, metric="cosine")


class TestComponentsAndDiameter:
    def test_components(self):
        g = _graph_from_edges(5, {(0, 1), (1, 2), (3, 4)})
        assert connected_components(g) == [[0, 1, 2], [3, 4]]

    def test_path_diameter(self):
        assert subgraph_diameter(_path_adj(5), list(range(5))) == 4.0

    def test_single_vertex(self):
        assert subgraph_diameter(_path_adj(3), [0]) == 0.0

    def test_disconnected_subset_is_inf(self):
        adj = _graph_from_edges(4, {(0, 1), (2, 3)}).neighbors()
        assert math.isinf(subgraph_diameter(adj, [0, 1, 2, 3]))


class TestBipartite:
    def test_even_cycle(self):
        adj = _graph_from_edges(4, {(0, 1), (1, 2), (2, 3), (0, 3)}).neighbors()
        assert is_bipartite(adj, [0, 1, 2, 3])

    def test_odd_cycle(self):
        adj = _graph_from_edges(3, {(0, 1), (1, 2), (0, 2)}).neighbors()
        assert not is_bipartite(adj, [0, 1, 2])


class TestSpectra:
    def test_k3_top_eigenpair(self):
        a = np.ones((3, 3)) - np.eye(3)
        lam, v = top_eigenpair(a)
        assert lam == pytest.approx(2.0, abs=1e-8)
        np.testing.assert_allclose(v, 1.0 / math.sqrt(3.0), atol=1e-6)

    def test_k3_second_eigenvalue(self):
        a = np.ones((3, 3)) - np.eye(3)
        lam, v = top_eigenpair(a)
        assert second_eigenvalue_abs(a, lam, v) == pytest.approx(1.0, abs=1e-6)

    def test_path2(self):
        a = np.array([[0.0, 1.0], [1.0, 0.0]])
        lam, v = top_eigenpair(a)
        assert lam == pytest.approx(1.0, abs=1e-8)

    def test_matches_dense_eigensolver(self, rng):
        for _ in range(20):
            n = int(rng.integers(3, 15))
            a = (rng.random((n, n)) < 0.5).astype(float)
            a = np.triu(a, 1)
            a = a + a.T
            eig = np.sort(np.abs(np.linalg.eigvalsh(a)))[::-1]
            lam, v = top_eigenpair(a)
            assert lam == pytest.approx(np.max(np.linalg.eigvalsh(a)), abs=1e-6)

    def test_empty_matrix(self):
        with pytest.raises(ValueError):
            top_eigenpair(np.zeros((0, 0)))


class TestGraphStats:
    def test_two_triangles(self):
        g = _graph_from_edges(6, {(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)})
        labels = LabelSet(np.array([0, 0, 0, 1, 1, 1]), k=2)
        stats = graph_stats(g, labels)
        assert len(stats.components) == 2
        assert stats.d_max == 1.0
        assert stats.intra_edge_fraction == 1.0
        assert not stats.no_edges
        for cs in stats.per_class:
            assert cs.connected and not cs.bipartite
            assert cs.lambda1 == pytest.approx(2.0, abs=1e-6)
            assert cs.lambda2_abs == pytest.approx(1.0, abs=1e-6)

    def test_disconnected_class(self):
        g = _graph_from_edges(4, {(0, 1)})
        labels = LabelSet(np.array([0, 0, 1, 1]), k=2)
        stats = graph_stats(g, labels)
        cs = stats.per_class[1]
        assert not cs.connected and math.isinf(cs.diameter) and cs.omega == 0.0
        assert math.isinf(stats.d_max)

    def test_edgeless_graph(self):
        g = _graph_from_edges(2, set())
        stats = graph_stats(g, LabelSet(np.array([0, 1]), k=2))
        assert stats.no_edges and stats.intra_edge_fraction == 1.0
        # single-vertex classes count as trivially connected
        assert stats.d_max == 0.0

    def test_inter_class_edges_counted(self):
        g = _graph_from_edges(4, {(0, 1), (1, 2), (2, 3)})
        labels = LabelSet(np.array([0, 0, 1, 1]), k=2)
        stats = graph_stats(g, labels)
        assert stats.intra_edge_fraction == pytest.approx(2.0 / 3.0)

    def test_label_mismatch(self):
        g = _graph_from_edges(3, set())
        with pytest.raises(ValueError, match="labels have n=2"):
            graph_stats(g, LabelSet(np.array([0, 1]), k=2))

    def test_bipartite_class_flagged(self):
        g = _graph_from_edges(4, {(0, 1), (1, 2), (2, 3), (0, 3)})  # 4-cycle
        stats = graph_stats(g, LabelSet(np.array([0, 0, 0, 0]), k=1))
        cs = stats.per_class[0]
        assert cs.bipartite
        assert cs.lambda2_abs == pytest.approx(cs.lambda1)  # degenerate spectrum signature
