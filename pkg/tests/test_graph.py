"""Neighborhood graphs, geodesics, Laplacians, and alignment matrices."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unfoldkit.data import Dataset
from unfoldkit.graph import (DisconnectedGraphError, build_knn_graph,
                             diffusion_operator, geodesic_distances,
                             graph_laplacian, lle_alignment)


def line(*xs):
    return Dataset(points=np.array([list(map(float, xs))]))


def random_connected_graph(rng, n, kmax=4):
    data = Dataset(points=rng.normal(size=(3, n)))
    for k in range(2, min(kmax, n - 1) + 1):
        g = build_knn_graph(data, k)
        if g.is_connected():
            return data, g
    g = build_knn_graph(data, n - 1)
    return data, g


class TestBuildKnnGraph:
    def test_collinear_tie_breaks_to_lowest_index(self):
        g = build_knn_graph(line(0, 1, 2), 1)
        # middle point is equidistant from both ends; lowest index wins
        assert (1, 0) in g.edges
        assert (1, 2) not in g.edges

    def test_two_points(self):
        g = build_knn_graph(line(0, 10), 1)
        assert g.edges == frozenset({(0, 1), (1, 0)})
        assert g.lengths[(0, 1)] == pytest.approx(10.0)

    def test_within_class_stays_inside_classes(self):
        data = Dataset(points=np.array([[0.0, 1.0, 10.0, 11.0]]),
                       labels=("A", "A", "B", "B"))
        g = build_knn_graph(data, 1, mode="within-class")
        for (i, j) in g.edges:
            assert data.labels[i] == data.labels[j]
        assert (0, 1) in g.edges and (2, 3) in g.edges

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            build_knn_graph(line(0, 1), 2)
        with pytest.raises(ValueError):
            build_knn_graph(line(0, 1), 0)

    def test_within_class_requires_labels(self):
        with pytest.raises(ValueError, match="label"):
            build_knn_graph(line(0, 1, 2), 1, mode="within-class")

    def test_small_class_rejected(self):
        data = Dataset(points=np.array([[0.0, 1.0, 2.0]]),
                       labels=("A", "A", "B"))
        with pytest.raises(ValueError):
            build_knn_graph(data, 1, mode="within-class")

    def test_each_point_has_k_out_neighbors(self):
        rng = np.random.default_rng(0)
        data = Dataset(points=rng.normal(size=(2, 9)))
        g = build_knn_graph(data, 3)
        counts = np.zeros(9, dtype=int)
        for (i, _) in g.edges:
            counts[i] += 1
        assert np.all(counts == 3)

    def test_tau_matches_edges(self):
        g = build_knn_graph(line(0, 1, 3, 6), 2)
        for i in range(4):
            for j in range(4):
                assert g.tau(i, j) == (1 if (i, j) in g.edges else 0)


class TestGeodesics:
    def test_unit_path(self):
        D = geodesic_distances(build_knn_graph(line(0, 1, 2), 1))
        assert D.values[0, 2] == pytest.approx(4.0)
        assert D.kind == "geodesic"

    def test_single_edge(self):
        D = geodesic_distances(build_knn_graph(line(0, 3), 1))
        assert D.values[0, 1] == pytest.approx(9.0)

    def test_unit_square_cycle(self):
        pts = np.array([[0.0, 1.0, 1.0, 0.0], [0.0, 0.0, 1.0, 1.0]])
        g = build_knn_graph(Dataset(points=pts), 2)
        D = geodesic_distances(g)
        # opposite corners are two unit hops apart
        assert D.values[0, 2] == pytest.approx(4.0)
        assert D.values[1, 3] == pytest.approx(4.0)

    def test_disconnected_graph_names_components(self):
        data = line(0, 1, 100, 101)
        g = build_knn_graph(data, 1)
        with pytest.raises(DisconnectedGraphError) as ei:
            geodesic_distances(g)
        assert "[0, 1]" in str(ei.value) and "[2, 3]" in str(ei.value)

    def test_path_graph_matches_bruteforce(self):
        # gaps grow left to right so every 1-NN edge chains to a path
        xs = [0.0, 1.0, 2.1, 3.3, 4.6]
        D = geodesic_distances(build_knn_graph(line(*xs), 1))
        for i in range(5):
            for j in range(5):
                assert D.values[i, j] == pytest.approx((xs[i] - xs[j]) ** 2)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000),
           st.integers(min_value=4, max_value=20))
    def test_triangle_inequality_on_roots(self, seed, n):
        rng = np.random.default_rng(seed)
        _, g = random_connected_graph(rng, n)
        if not g.is_connected():
            return
        d = np.sqrt(geodesic_distances(g).values)
        lhs = d[:, :, None]
        rhs = d[:, None, :] + d[None, :, :]
        assert np.all(lhs <= rhs + 1e-9)


class TestLaplacian:
    def test_two_node_binary(self):
        W, L = graph_laplacian(build_knn_graph(line(0, 1), 1))
        np.testing.assert_allclose(L, [[1, -1], [-1, 1]])

    def test_triangle_binary(self):
        pts = np.array([[0.0, 1.0, 0.5], [0.0, 0.0, 0.9]])
        _, L = graph_laplacian(build_knn_graph(Dataset(points=pts), 2))
        np.testing.assert_allclose(L, 2 * np.eye(3) - (np.ones((3, 3)) - np.eye(3)))

    def test_disconnected_is_block_diagonal(self):
        g = build_knn_graph(line(0, 1, 100, 101), 1)
        _, L = graph_laplacian(g)
        assert L[0, 2] == 0 and L[1, 3] == 0

    def test_bad_sigma(self):
        g = build_knn_graph(line(0, 1), 1)
        with pytest.raises(ValueError):
            graph_laplacian(g, weight="rbf", sigma=-1.0)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000),
           st.integers(min_value=3, max_value=15),
           st.sampled_from(["binary", "rbf"]))
    def test_rows_sum_zero_and_psd(self, seed, n, weight):
        rng = np.random.default_rng(seed)
        _, g = random_connected_graph(rng, n)
        _, L = graph_laplacian(g, weight=weight)
        np.testing.assert_allclose(L @ np.ones(n), 0.0, atol=1e-10)
        for _ in range(100):
            x = rng.normal(size=n)
            assert x @ L @ x >= -1e-10 * (x @ x)


class TestLleAlignment:
    def test_two_points_forced_weight(self):
        data = line(0, 1)
        M = lle_alignment(data, build_knn_graph(data, 1), reg=0.0)
        np.testing.assert_allclose(M.values, [[2, -2], [-2, 2]], atol=1e-12)

    def test_midpoint_weights_are_half(self):
        # the midpoint of two equidistant neighbors gets weights (1/2, 1/2),
        # so the collinear configuration is reconstructed exactly and the
        # alignment quadratic form vanishes on it
        data = line(0, 1, 2)
        M = lle_alignment(data, build_knn_graph(data, 2), reg=1e-9)
        X = data.points
        resid = float((X @ M.values @ X.T)[0, 0])
        assert resid == pytest.approx(0.0, abs=1e-8)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000),
           st.integers(min_value=4, max_value=15))
    def test_m_annihilates_ones_and_psd(self, seed, n):
        rng = np.random.default_rng(seed)
        data, g = random_connected_graph(rng, n)
        M = lle_alignment(data, g).values
        np.testing.assert_allclose(M @ np.ones(n), 0.0, atol=1e-8)
        vals = np.linalg.eigvalsh(M)
        assert vals[0] >= -1e-9 * max(vals[-1], 1e-300)

    def test_negative_reg_rejected(self):
        data = line(0, 1, 2)
        with pytest.raises(ValueError):
            lle_alignment(data, build_knn_graph(data, 1), reg=-1e-3)


class TestDiffusionOperator:
    def test_one_step_rows_sum_to_one(self):
        rng = np.random.default_rng(3)
        data, g = random_connected_graph(rng, 8)
        M = diffusion_operator(g, t=1).values
        np.testing.assert_allclose(M.sum(axis=1), 1.0, atol=1e-12)

    def test_two_node_swap(self):
        data = line(0, 1)
        M = diffusion_operator(build_knn_graph(data, 1), t=1).values
        np.testing.assert_allclose(M, [[0, 1], [1, 0]], atol=1e-12)

    def test_two_node_square_is_identity(self):
        data = line(0, 1)
        M = diffusion_operator(build_knn_graph(data, 1), t=2).values
        np.testing.assert_allclose(M, np.eye(2), atol=1e-12)

    def test_bad_t(self):
        data = line(0, 1)
        with pytest.raises(ValueError):
            diffusion_operator(build_knn_graph(data, 1), t=0)
