"""The kernel catalog: every spectral method's kernel, centering, HSIC."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unfoldkit.data import Dataset
from unfoldkit.graph import (AlignmentMatrix, DistanceMatrix, build_knn_graph,
                             diffusion_operator, euclidean_distance_matrix,
                             geodesic_distances, graph_laplacian,
                             lle_alignment)
from unfoldkit.kernels import (CATALOG_METHODS, KernelMatrix,
                               build_catalog_kernel, center_kernel,
                               centering_matrix, delta_kernel, hsic)


def km(values, **kw):
    return KernelMatrix(values=np.asarray(values, dtype=float), **kw)


def catalog_inputs(data, graph):
    return {
        "pca": data,
        "mds": euclidean_distance_matrix(data),
        "isomap": geodesic_distances(graph),
        "spectral-clustering": graph,
        "laplacian-eigenmap-pinv": graph_laplacian(graph)[1],
        "lle-shift": lle_alignment(data, graph),
        "lle-pinv": lle_alignment(data, graph),
        "diffusion": diffusion_operator(graph),
    }


class TestCenterKernel:
    def test_identity(self):
        K = center_kernel(km(np.eye(2)))
        np.testing.assert_allclose(K.values, [[0.5, -0.5], [-0.5, 0.5]])
        assert K.centered

    def test_idempotent(self):
        K = km([[1.0, -1.0], [-1.0, 1.0]])
        np.testing.assert_allclose(center_kernel(center_kernel(K)).values,
                                   center_kernel(K).values, atol=1e-14)

    def test_ones_annihilated(self):
        K = center_kernel(km(np.ones((4, 4))))
        np.testing.assert_allclose(K.values, 0.0, atol=1e-12)

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            km([[0.0, 1.0], [2.0, 0.0]])


class TestCatalogKernels:
    def test_mds_two_points(self):
        D = DistanceMatrix(values=np.array([[0.0, 4.0], [4.0, 0.0]]),
                           kind="euclidean")
        K = build_catalog_kernel("mds", D)
        np.testing.assert_allclose(K.values, [[1, -1], [-1, 1]], atol=1e-12)

    def test_laplacian_pinv_two_node(self):
        L = np.array([[1.0, -1.0], [-1.0, 1.0]])
        K = build_catalog_kernel("laplacian-eigenmap-pinv", L)
        np.testing.assert_allclose(K.values, [[0.25, -0.25], [-0.25, 0.25]],
                                   atol=1e-12)

    def test_lle_shift_two_node(self):
        M = AlignmentMatrix(values=np.array([[2.0, -2.0], [-2.0, 2.0]]),
                            source="lle")
        K = build_catalog_kernel("lle-shift", M)
        np.testing.assert_allclose(K.values, [[2, 2], [2, 2]], atol=1e-12)

    def test_diffusion_identity_passthrough(self):
        M = AlignmentMatrix(values=np.eye(3), source="diffusion-operator")
        K = build_catalog_kernel("diffusion", M)
        np.testing.assert_allclose(K.values, np.eye(3))

    def test_unknown_method(self):
        with pytest.raises(ValueError, match="unknown kernel"):
            build_catalog_kernel("polynomial", None)

    def test_mds_rejects_geodesic_input(self):
        D = DistanceMatrix(values=np.zeros((2, 2)), kind="geodesic")
        with pytest.raises(ValueError):
            build_catalog_kernel("mds", D)

    def test_all_methods_symmetric(self):
        rng = np.random.default_rng(1)
        data = Dataset(points=rng.normal(size=(3, 12)))
        graph = build_knn_graph(data, 4)
        assert graph.is_connected()
        for method, inp in catalog_inputs(data, graph).items():
            K = build_catalog_kernel(method, inp).values
            np.testing.assert_allclose(K, K.T, atol=1e-10,
                                       err_msg=method)

    def test_psd_members_of_catalog(self):
        rng = np.random.default_rng(2)
        data = Dataset(points=rng.normal(size=(3, 10)))
        graph = build_knn_graph(data, 3)
        assert graph.is_connected()
        inputs = catalog_inputs(data, graph)
        for method in ("pca", "laplacian-eigenmap-pinv", "lle-shift",
                       "lle-pinv"):
            build_catalog_kernel(method, inputs[method]).check_psd()

    def test_laplacian_pinv_already_centered(self):
        rng = np.random.default_rng(3)
        data = Dataset(points=rng.normal(size=(2, 10)))
        graph = build_knn_graph(data, 3)
        K = build_catalog_kernel("laplacian-eigenmap-pinv",
                                 graph_laplacian(graph)[1]).values
        H = centering_matrix(10)
        assert np.linalg.norm(H @ K @ H - K) <= 1e-9 * np.linalg.norm(K)

    def test_lle_shift_reverses_eigenvector_order(self):
        rng = np.random.default_rng(4)
        data = Dataset(points=rng.normal(size=(3, 12)))
        graph = build_knn_graph(data, 4)
        M = lle_alignment(data, graph)
        K = build_catalog_kernel("lle-shift", M).values
        mv = np.linalg.eigvalsh(M.values)
        kv = np.linalg.eigvalsh(K)
        np.testing.assert_allclose(np.sort(mv[-1] - mv), np.sort(kv),
                                   atol=1e-9)


class TestHsic:
    def test_hand_value(self):
        K = km([[1.0, -1.0], [-1.0, 1.0]])
        assert hsic(K, K) == pytest.approx(4.0)

    def test_zero_label_kernel(self):
        K = km([[1.0, -1.0], [-1.0, 1.0]])
        assert hsic(K, km(np.zeros((2, 2)))) == pytest.approx(0.0)

    def test_ones_kernel_annihilated(self):
        K = km(np.ones((3, 3)))
        Kl = km(np.diag([1.0, 2.0, 3.0]))
        assert hsic(K, Kl) == pytest.approx(0.0, abs=1e-12)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            hsic(km(np.eye(2)), km(np.eye(3)))


class TestDeltaKernel:
    def test_two_classes(self):
        K = delta_kernel(["A", "A", "B"])
        np.testing.assert_allclose(K.values,
                                   [[1, 1, 0], [1, 1, 0], [0, 0, 1]])

    def test_all_equal(self):
        np.testing.assert_allclose(delta_kernel(["x"] * 4).values,
                                   np.ones((4, 4)))

    def test_all_distinct(self):
        np.testing.assert_allclose(delta_kernel(list(range(5))).values,
                                   np.eye(5))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            delta_kernel([])

    @settings(max_examples=20, deadline=None)
    @given(st.lists(st.sampled_from("abc"), min_size=1, max_size=12))
    def test_always_psd(self, labels):
        delta_kernel(labels).check_psd()
